//! Evaluation measures: structure counts for a laid-out model, effort
//! figures from an instrumented editing session, layout churn between two
//! layouts, and percentage reductions between two conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{LayeredLayout, Point};
use crate::model::{EvidenceKind, ModelDocument, Polarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Creation,
    Revision,
    Retrieval,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Creation, Phase::Revision, Phase::Retrieval];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    AddNode,
    AddLink,
    AttachEvidence,
    Update,
    Remove,
    ManualMove { node: String, from: Point, to: Point },
    AutoLayout,
    Search { query: String },
    OpenEvidence { link: String },
    PhaseStart { phase: Phase },
    PhaseEnd { phase: Phase },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedAction {
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub action: Action,
}

/// Timestamped actions of one editing session, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionLog {
    pub actions: Vec<LoggedAction>,
}

impl SessionLog {
    pub fn push(&mut self, at: DateTime<Utc>, action: Action) {
        self.actions.push(LoggedAction { at, action });
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.actions.windows(2) {
            if pair[1].at < pair[0].at {
                return Err(Error::validation(format!(
                    "session log timestamps decrease at {}",
                    pair[1].at.to_rfc3339()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Effort {
    pub repositioning_actions: u64,
    pub creation_seconds: Option<f64>,
    pub revision_seconds: Option<f64>,
    pub retrieval_seconds: Option<f64>,
}

/// Counts manual moves and sums the time between matching phase markers.
/// A phase may be entered several times; phases never entered get `None`.
pub fn effort_from_log(log: &SessionLog) -> Result<Effort> {
    log.validate()?;
    let mut open: BTreeMap<Phase, DateTime<Utc>> = BTreeMap::new();
    let mut spent: BTreeMap<Phase, f64> = BTreeMap::new();
    let mut moves = 0;
    for entry in &log.actions {
        match &entry.action {
            Action::ManualMove { .. } => moves += 1,
            Action::PhaseStart { phase } => {
                if open.insert(*phase, entry.at).is_some() {
                    return Err(Error::IncompleteLog(format!(
                        "{phase:?} phase started twice without an end"
                    )));
                }
            }
            Action::PhaseEnd { phase } => {
                let Some(start) = open.remove(phase) else {
                    return Err(Error::IncompleteLog(format!(
                        "{phase:?} phase ended without a start"
                    )));
                };
                let secs = (entry.at - start).num_milliseconds() as f64 / 1000.0;
                *spent.entry(*phase).or_default() += secs;
            }
            _ => {}
        }
    }
    if let Some(phase) = open.keys().next() {
        return Err(Error::IncompleteLog(format!("{phase:?} phase never ended")));
    }
    Ok(Effort {
        repositioning_actions: moves,
        creation_seconds: spent.get(&Phase::Creation).copied(),
        revision_seconds: spent.get(&Phase::Revision).copied(),
        retrieval_seconds: spent.get(&Phase::Retrieval).copied(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityCounts {
    pub positive: u64,
    pub negative: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceCounts {
    pub assumption: u64,
    pub reference: u64,
    pub experience: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub node_count: u64,
    pub link_count: PolarityCounts,
    pub evidence_count: EvidenceCounts,
    pub crossing_count: u64,
    pub repositioning_actions: Option<u64>,
    pub creation_seconds: Option<f64>,
    pub revision_seconds: Option<f64>,
    pub retrieval_seconds: Option<f64>,
}

/// Structure counts of `model` and the crossing count of its layout.
pub fn model_stats(model: &ModelDocument, layout: &LayeredLayout) -> Result<MetricsReport> {
    let nodes: BTreeSet<&str> = model.nodes.iter().map(|n| n.id.as_str()).collect();
    let links: BTreeSet<&str> = model.links.iter().map(|l| l.id.as_str()).collect();
    let placed: BTreeSet<&str> = layout.layer_of.keys().map(String::as_str).collect();
    let routed: BTreeSet<&str> = layout.routes.keys().map(String::as_str).collect();
    if let Some(id) = nodes.symmetric_difference(&placed).next() {
        return Err(Error::validation_at("layout does not match model nodes", *id));
    }
    if let Some(id) = links.symmetric_difference(&routed).next() {
        return Err(Error::validation_at("layout does not match model links", *id));
    }

    let mut report = MetricsReport {
        node_count: model.nodes.len() as u64,
        crossing_count: layout.crossing_count,
        ..MetricsReport::default()
    };
    for link in &model.links {
        match link.polarity {
            Polarity::Positive => report.link_count.positive += 1,
            Polarity::Negative => report.link_count.negative += 1,
        }
        for item in &link.evidence {
            match item.kind {
                EvidenceKind::Assumption => report.evidence_count.assumption += 1,
                EvidenceKind::Reference => report.evidence_count.reference += 1,
                EvidenceKind::Experience => report.evidence_count.experience += 1,
            }
        }
    }
    Ok(report)
}

impl MetricsReport {
    pub fn with_effort(mut self, effort: &Effort) -> Self {
        self.repositioning_actions = Some(effort.repositioning_actions);
        self.creation_seconds = effort.creation_seconds;
        self.revision_seconds = effort.revision_seconds;
        self.retrieval_seconds = effort.retrieval_seconds;
        self
    }
}

fn cell<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| v.to_string())
}

fn minutes(secs: Option<f64>) -> Option<String> {
    secs.map(|s| format!("{:.1}", s / 60.0))
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("Model creation time (min)", cell(minutes(self.creation_seconds))),
            ("Revision time (min)", cell(minutes(self.revision_seconds))),
            ("Edge crossings", self.crossing_count.to_string()),
            ("Repositioning actions", cell(self.repositioning_actions)),
            ("Evidence retrieval time (min)", cell(minutes(self.retrieval_seconds))),
            ("Nodes", self.node_count.to_string()),
            (
                "Links (+/-)",
                format!("{}/{}", self.link_count.positive, self.link_count.negative),
            ),
            (
                "Evidence (assumption/reference/experience)",
                format!(
                    "{}/{}/{}",
                    self.evidence_count.assumption,
                    self.evidence_count.reference,
                    self.evidence_count.experience
                ),
            ),
        ];
        let width = rows.iter().map(|(m, _)| m.len()).max().unwrap_or(0);
        writeln!(f, "{:<width$}  Value", "Measure")?;
        for (measure, value) in rows {
            writeln!(f, "{measure:<width$}  {value}")?;
        }
        Ok(())
    }
}

/// `100 (baseline - treatment) / baseline`, rounded half-up to one decimal.
pub fn reduction_percent(baseline_mean: f64, treatment_mean: f64) -> Result<f64> {
    let usable = baseline_mean.is_finite() && baseline_mean > 0.0 && treatment_mean.is_finite();
    if !usable {
        return Err(Error::Domain(format!(
            "baseline mean must be positive and finite, got {baseline_mean}"
        )));
    }
    let pct = 100.0 * (baseline_mean - treatment_mean) / baseline_mean;
    // the epsilon keeps exact halves like 12.25 from rounding down
    Ok(((pct * 10.0) + 0.5 + 1e-9).floor() / 10.0)
}

/// One row of a two-condition comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub measure: String,
    pub baseline_mean: f64,
    pub treatment_mean: f64,
    pub reduction_percent: Option<f64>,
}

/// Means of two conditions side by side with the reduction between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub treatment: String,
    pub rows: Vec<ComparisonRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0u32), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl Comparison {
    /// Builds rows from `(measure, baseline mean, treatment mean)` triples.
    pub fn from_means(
        baseline: &str,
        treatment: &str,
        means: &[(&str, f64, f64)],
    ) -> Self {
        let rows = means
            .iter()
            .map(|&(measure, b, t)| ComparisonRow {
                measure: measure.to_owned(),
                baseline_mean: b,
                treatment_mean: t,
                reduction_percent: reduction_percent(b, t).ok(),
            })
            .collect();
        Comparison {
            baseline: baseline.to_owned(),
            treatment: treatment.to_owned(),
            rows,
        }
    }

    /// Averages per-session reports of each condition. A measure is left out
    /// when some report lacks it.
    pub fn from_reports(
        baseline: &str,
        treatment: &str,
        base: &[MetricsReport],
        treat: &[MetricsReport],
    ) -> Self {
        type Getter = fn(&MetricsReport) -> Option<f64>;
        let measures: [(&str, Getter); 5] = [
            ("Model creation time (min)", |r| r.creation_seconds.map(|s| s / 60.0)),
            ("Revision time (min)", |r| r.revision_seconds.map(|s| s / 60.0)),
            ("Edge crossings", |r| Some(r.crossing_count as f64)),
            ("Repositioning actions", |r| r.repositioning_actions.map(|n| n as f64)),
            ("Evidence retrieval time (min)", |r| r.retrieval_seconds.map(|s| s / 60.0)),
        ];
        let all = |reports: &[MetricsReport], get: Getter| -> Option<f64> {
            let values: Option<Vec<f64>> = reports.iter().map(get).collect();
            mean(values?.into_iter())
        };
        let means: Vec<(&str, f64, f64)> = measures
            .iter()
            .filter_map(|&(m, get)| Some((m, all(base, get)?, all(treat, get)?)))
            .collect();
        Comparison::from_means(baseline, treatment, &means)
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_owned()
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header = [
            "Measure".to_owned(),
            format!("{} (mean)", self.baseline),
            format!("{} (mean)", self.treatment),
            format!("Reduction with {}", self.treatment),
        ];
        let body: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.measure.clone(),
                    trim_number(r.baseline_mean),
                    trim_number(r.treatment_mean),
                    cell(r.reduction_percent.map(|p| format!("{p:.1}%"))),
                ]
            })
            .collect();
        let mut widths = header.clone().map(|h| h.chars().count());
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        for row in std::iter::once(&header).chain(&body) {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            writeln!(f, "{}", line.join("  ").trim_end())?;
        }
        Ok(())
    }
}

/// Ranks within each layer, counting only nodes in `keep`.
fn ranks_among(layout: &LayeredLayout, keep: &BTreeSet<&str>) -> BTreeMap<String, usize> {
    let mut by_layer: BTreeMap<usize, Vec<(usize, &str)>> = BTreeMap::new();
    for (id, &layer) in &layout.layer_of {
        if keep.contains(id.as_str()) {
            let order = layout.order_of.get(id).copied().unwrap_or(usize::MAX);
            by_layer.entry(layer).or_default().push((order, id));
        }
    }
    let mut out = BTreeMap::new();
    for mut members in by_layer.into_values() {
        members.sort();
        for (rank, (_, id)) in members.into_iter().enumerate() {
            out.insert(id.to_owned(), rank);
        }
    }
    out
}

/// Fraction of the nodes present in both layouts whose layer, or whose rank
/// among those shared nodes within the layer, differs between the two.
pub fn layout_stability(previous: &LayeredLayout, new: &LayeredLayout) -> Result<f64> {
    let before: BTreeSet<&str> = previous.layer_of.keys().map(String::as_str).collect();
    let after: BTreeSet<&str> = new.layer_of.keys().map(String::as_str).collect();
    let common: BTreeSet<&str> = before.intersection(&after).copied().collect();
    if common.is_empty() {
        return Err(Error::Domain("layouts share no nodes".into()));
    }
    let old_rank = ranks_among(previous, &common);
    let new_rank = ranks_among(new, &common);
    let moved = common
        .iter()
        .filter(|&&id| {
            previous.layer_of[id] != new.layer_of[id] || old_rank[id] != new_rank[id]
        })
        .count();
    Ok(moved as f64 / common.len() as f64)
}
