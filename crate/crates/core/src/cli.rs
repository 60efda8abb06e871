//! The `dreams` command line.
//!
//! Exit codes: 0 success, 1 validation failure (including unreadable
//! documents and rejected edits), 2 usage error, 3 I/O error. Data goes to
//! stdout, diagnostics to stderr. With `--json`, output bodies match the
//! corresponding HTTP responses.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::layout::{layout, Direction, LayeredLayout, LayoutConfig};
use crate::metrics::{effort_from_log, model_stats, SessionLog};
use crate::model::{EvidenceKind, ModelDocument, ModelKind, NodeDetails, NodeKind, Polarity};
use crate::search::{build_index, query, SearchQuery, DEFAULT_LIMIT};
use crate::service::{self, ChangeResponse, LayoutResponse, SearchResponse, ServiceConfig};
use crate::store::{self, RenderOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dreams", version, about = "Build, lay out, search and serve causal design-research models")]
struct Cli {
    /// Model document to read or write.
    #[arg(long, global = true, value_name = "PATH")]
    file: Option<PathBuf>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create an empty model document.
    New {
        /// rm / reference_model or im / impact_model.
        #[arg(long, value_parser = parse_model_kind)]
        kind: ModelKind,
        #[arg(long)]
        title: String,
        /// Replace an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Add a factor node.
    AddNode {
        #[arg(long, value_parser = parse_with::<NodeKind>)]
        kind: NodeKind,
        #[arg(long)]
        label: String,
        #[arg(long)]
        notes: Option<String>,
        #[arg(long = "tag")]
        tags: Vec<String>,
    },
    /// Add a causal link between two nodes.
    AddLink {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        /// + / positive or - / negative.
        #[arg(long, value_parser = parse_with::<Polarity>, allow_hyphen_values = true)]
        polarity: Polarity,
    },
    /// Attach evidence to a link.
    Attach {
        #[arg(long)]
        link: String,
        #[arg(long, value_parser = parse_with::<EvidenceKind>)]
        kind: EvidenceKind,
        #[arg(long)]
        text: String,
        #[arg(long)]
        locator: Option<String>,
    },
    /// Check a document and list broken invariants.
    Validate,
    /// Compute a layered layout.
    Layout {
        #[command(flatten)]
        layout: LayoutArgs,
        /// Earlier `layout --json` output to keep positions stable against.
        #[arg(long, value_name = "PATH")]
        previous: Option<PathBuf>,
        /// Also write the layout JSON here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Render the laid-out model as SVG.
    Render {
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Export the model in Graphviz DOT.
    ExportDot {
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Search labels, notes, tags and evidence.
    Search {
        /// Query text; every word must prefix-match.
        #[arg(default_value = "")]
        query: String,
        #[arg(long, value_parser = parse_with::<NodeKind>)]
        kind: Option<NodeKind>,
        #[arg(long, value_parser = parse_with::<Polarity>, allow_hyphen_values = true)]
        polarity: Option<Polarity>,
        #[arg(long, value_parser = parse_with::<EvidenceKind>)]
        evidence: Option<EvidenceKind>,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Print structure and effort measures.
    Stats {
        #[command(flatten)]
        layout: LayoutArgs,
        /// Session log (JSON) to take effort measures from.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "DREAMS_DATA_DIR", default_value = "dreams-data")]
        data_dir: PathBuf,
        #[arg(long, env = "DREAMS_BIND", default_value = service::DEFAULT_BIND)]
        bind: String,
        /// Allowed browser origin; repeat or comma-separate. Any origin when omitted.
        #[arg(long = "cors-origin", env = "DREAMS_CORS_ORIGINS", value_delimiter = ',')]
        cors_origins: Vec<String>,
        /// Layout settings (JSON).
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct LayoutArgs {
    /// Layout settings (JSON); individual flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_direction)]
    direction: Option<Direction>,
}

fn parse_model_kind(s: &str) -> std::result::Result<ModelKind, String> {
    match s {
        "rm" | "RM" => Ok(ModelKind::ReferenceModel),
        "im" | "IM" => Ok(ModelKind::ImpactModel),
        other => other.parse().map_err(|e: Error| e.to_string()),
    }
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_direction(s: &str) -> std::result::Result<Direction, String> {
    match s {
        "top_down" | "td" => Ok(Direction::TopDown),
        "left_right" | "lr" => Ok(Direction::LeftRight),
        other => Err(format!("unknown direction {other:?} (top_down or left_right)")),
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn need_file(file: &Option<PathBuf>) -> std::result::Result<&Path, Failure> {
    file.as_deref()
        .ok_or_else(|| Failure::Usage("--file <PATH> is required for this command".into()))
}

fn load(path: &Path) -> Result<ModelDocument> {
    store::deserialize(&std::fs::read_to_string(path)?)
}

fn save(path: &Path, doc: &ModelDocument) -> Result<()> {
    let text = store::serialize(doc)?;
    store::write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let value = serde_json::to_value(value).map_err(|e| Error::Domain(e.to_string()))?;
    out.write_all(store::canonical(&value.to_string())?.as_bytes())?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: format!("{what}: {e}"),
    })
}

fn layout_config(args: &LayoutArgs) -> Result<LayoutConfig> {
    let mut config = match &args.config {
        Some(path) => read_json(path, "layout config")?,
        None => LayoutConfig::default(),
    };
    if let Some(d) = args.direction {
        config.direction = d;
    }
    config.validate()?;
    Ok(config)
}

/// Loads the file, applies `change`, writes it back and reports the result.
fn edit<R>(
    path: &Path,
    json: bool,
    out: &mut dyn Write,
    change: impl FnOnce(&mut ModelDocument) -> Result<R>,
    report: impl FnOnce(&R) -> String,
) -> Outcome {
    let mut doc = load(path)?;
    let result = change(&mut doc)?;
    save(path, &doc)?;
    let id = report(&result);
    if json {
        print_json(
            out,
            &ChangeResponse {
                id: Some(id),
                removed_link_ids: Vec::new(),
                document: store::to_value(&doc),
            },
        )?;
    } else {
        writeln!(out, "{id}")?;
    }
    Ok(EXIT_OK)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::New { kind, title, force } => {
            let path = need_file(&cli.file)?;
            if path.exists() && !force {
                return Err(Failure::Lib(Error::Conflict {
                    detail: format!("{} already exists (use --force to replace it)", path.display()),
                    id: None,
                }));
            }
            let doc = ModelDocument::new(kind, &title)?;
            save(path, &doc)?;
            if json {
                print_json(out, &store::to_value(&doc))?;
            } else {
                writeln!(out, "{}", doc.id)?;
            }
            Ok(EXIT_OK)
        }
        Command::AddNode {
            kind,
            label,
            notes,
            tags,
        } => edit(
            need_file(&cli.file)?,
            json,
            out,
            |m| m.add_node_with(kind, &label, NodeDetails { notes, tags }),
            String::clone,
        ),
        Command::AddLink {
            source,
            target,
            polarity,
        } => edit(
            need_file(&cli.file)?,
            json,
            out,
            |m| m.add_link(&source, &target, polarity),
            String::clone,
        ),
        Command::Attach {
            link,
            kind,
            text,
            locator,
        } => edit(
            need_file(&cli.file)?,
            json,
            out,
            |m| m.attach_evidence(&link, kind, &text, locator.as_deref()),
            String::clone,
        ),
        Command::Validate => validate(need_file(&cli.file)?, json, out),
        Command::Layout {
            layout: args,
            previous,
            out: target,
        } => {
            let doc = load(need_file(&cli.file)?)?;
            let config = layout_config(&args)?;
            let previous: Option<LayeredLayout> = match previous {
                Some(p) => Some(read_json::<LayoutResponse>(&p, "previous layout")?.layout),
                None => None,
            };
            let computed = layout(&doc, &config, previous.as_ref())?;
            let body = LayoutResponse {
                model_id: doc.id.clone(),
                revision: doc.revision,
                layout: computed,
            };
            if let Some(target) = target {
                let mut buf = Vec::new();
                print_json(&mut buf, &body)?;
                store::write_atomic(&target, &buf)?;
            }
            if json {
                print_json(out, &body)?;
            } else {
                let l = &body.layout;
                for (id, layer) in &l.layer_of {
                    let p = l.position_of[id];
                    writeln!(out, "{id}\t{layer}\t{}\t{}\t{}", l.order_of[id], p.x, p.y)?;
                }
                writeln!(out, "crossings\t{}", l.crossing_count)?;
            }
            Ok(EXIT_OK)
        }
        Command::Render { layout: args, out: target } => {
            let doc = load(need_file(&cli.file)?)?;
            let computed = layout(&doc, &layout_config(&args)?, None)?;
            let svg = store::render_svg(&doc, &computed, &RenderOptions::default())?;
            store::write_atomic(&target, svg.as_bytes())?;
            if !json {
                writeln!(out, "{}", target.display())?;
            }
            Ok(EXIT_OK)
        }
        Command::ExportDot { out: target } => {
            let doc = load(need_file(&cli.file)?)?;
            let dot = store::export_dot(&doc);
            match target {
                Some(t) => store::write_atomic(&t, dot.as_bytes())?,
                None => out.write_all(dot.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Command::Search {
            query: text,
            kind,
            polarity,
            evidence,
            limit,
        } => {
            let doc = load(need_file(&cli.file)?)?;
            let q = SearchQuery {
                text,
                kind_filter: kind,
                polarity_filter: polarity,
                evidence_filter: evidence,
                limit,
            };
            let hits = query(&build_index(&doc), &doc, &q)?;
            if json {
                print_json(
                    out,
                    &SearchResponse {
                        model_id: doc.id.clone(),
                        revision: doc.revision,
                        hits,
                    },
                )?;
            } else {
                for h in hits {
                    let snippet = h.snippet.text.replace(['\t', '\n'], " ");
                    writeln!(
                        out,
                        "{:.2}\t{}\t{}\t{}",
                        h.score,
                        h.target.id(),
                        h.matched_field.as_str(),
                        snippet
                    )?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Stats { layout: args, log } => {
            let doc = load(need_file(&cli.file)?)?;
            let computed = layout(&doc, &layout_config(&args)?, None)?;
            let mut report = model_stats(&doc, &computed)?;
            if let Some(log) = log {
                let log: SessionLog = read_json(&log, "session log")?;
                report = report.with_effort(&effort_from_log(&log)?);
            }
            if json {
                print_json(out, &report)?;
            } else {
                write!(out, "{report}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Serve {
            data_dir,
            bind,
            cors_origins,
            config,
        } => {
            let _ = tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .try_init();
            let layout = match config {
                Some(p) => read_json(&p, "layout config")?,
                None => LayoutConfig::default(),
            };
            let config = ServiceConfig {
                data_dir,
                bind,
                cors_origins: (!cors_origins.is_empty()).then_some(cors_origins),
                layout,
            };
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(service::serve(config))?;
            Ok(EXIT_OK)
        }
    }
}

fn validate(path: &Path, json: bool, out: &mut dyn Write) -> Outcome {
    let text = std::fs::read_to_string(path)?;
    let lines: Vec<String>;
    let violations = match store::parse_unchecked(&text) {
        Ok(doc) => {
            let v = doc.validate();
            lines = v.iter().map(ToString::to_string).collect();
            v
        }
        Err(e @ (Error::Parse { .. } | Error::UnsupportedVersion { .. })) => {
            if json {
                print_json(out, &serde_json::json!({ "valid": false, "error": e.to_string(), "violations": [] }))?;
            } else {
                writeln!(out, "unreadable\t-\t{e}")?;
            }
            return Ok(EXIT_INVALID);
        }
        Err(e) => return Err(e.into()),
    };
    if json {
        print_json(out, &serde_json::json!({ "valid": violations.is_empty(), "violations": violations }))?;
    } else {
        for line in lines {
            writeln!(out, "{line}")?;
        }
    }
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_INVALID })
}
