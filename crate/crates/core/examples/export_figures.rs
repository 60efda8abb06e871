//! Writes DOT and SVG exports of a laid-out model.
use std::path::{Path, PathBuf};

use dreams::layout::{layout, LayoutConfig};
use dreams::store::{export_dot, render_svg, write_atomic, RenderOptions};
use dreams::{EvidenceKind, ModelDocument, ModelKind, NodeKind, Polarity};

pub fn run(dir: &Path) -> Result<(PathBuf, PathBuf), dreams::Error> {
    let mut m = ModelDocument::new(ModelKind::ImpactModel, "Support impact")?;
    let tool = m.add_node(NodeKind::KeyFactor, "Integrated evidence")?;
    let trace = m.add_node(NodeKind::SuccessFactor, "Traceability")?;
    let search = m.add_node(NodeKind::AssumptionNode, "Users search by keyword")?;
    let l = m.add_link(&tool, &trace, Polarity::Positive)?;
    m.add_link(&search, &trace, Polarity::Positive)?;
    m.attach_evidence(&l, EvidenceKind::Experience, "Pilot users found sources faster", None)?;

    let l = layout(&m, &LayoutConfig::default(), None)?;
    let dot = dir.join("support-impact.dot");
    let svg = dir.join("support-impact.svg");
    write_atomic(&dot, export_dot(&m).as_bytes())?;
    write_atomic(&svg, render_svg(&m, &l, &RenderOptions::default())?.as_bytes())?;
    Ok((dot, svg))
}

#[allow(dead_code)]
fn main() -> Result<(), dreams::Error> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let (dot, svg) = run(&dir)?;
    println!("wrote {}\nwrote {}", dot.display(), svg.display());
    Ok(())
}
