//! Revises a laid-out model and re-lays it out seeded from the previous
//! layout, then measures how many existing nodes moved.
use dreams::layout::{layout, LayoutConfig};
use dreams::metrics::layout_stability;
use dreams::{ModelDocument, ModelKind, NodeKind, Polarity};

pub fn run() -> Result<f64, dreams::Error> {
    let mut m = ModelDocument::new(ModelKind::ReferenceModel, "Requirements churn")?;
    let mut ids = Vec::new();
    for label in ["Stakeholder count", "Scope clarity", "Change requests", "Rework", "Schedule slip", "Team morale"] {
        ids.push(m.add_node(NodeKind::InfluencingFactor, label)?);
    }
    for (s, t, p) in [(0, 1, Polarity::Negative), (0, 2, Polarity::Positive), (1, 2, Polarity::Negative), (2, 3, Polarity::Positive), (3, 4, Polarity::Positive), (4, 5, Polarity::Negative)] {
        m.add_link(&ids[s], &ids[t], p)?;
    }
    let config = LayoutConfig::default();
    let before = layout(&m, &config, None)?;

    let leaf = m.add_node(NodeKind::SuccessFactor, "Delivery on time")?;
    m.add_link(&ids[4], &leaf, Polarity::Negative)?;
    let after = layout(&m, &config, Some(&before))?;

    layout_stability(&before, &after)
}

#[allow(dead_code)]
fn main() -> Result<(), dreams::Error> {
    let churn = run()?;
    println!("share of existing nodes that moved: {churn:.3}");
    Ok(())
}
