//! Builds a small Reference Model: typed factors, signed links and the
//! evidence behind each link.
use dreams::{EvidenceKind, ModelDocument, ModelKind, NodeKind, Polarity};

pub fn run() -> Result<ModelDocument, dreams::Error> {
    let mut rm = ModelDocument::new(ModelKind::ReferenceModel, "Sketching in conceptual design")?;
    let time = rm.add_node(NodeKind::InfluencingFactor, "Time pressure")?;
    let exp = rm.add_node(NodeKind::InfluencingFactor, "Designer experience")?;
    let sketches = rm.add_node(NodeKind::KeyFactor, "Number of sketches")?;
    let quality = rm.add_node(NodeKind::SuccessFactor, "Concept quality")?;

    let l1 = rm.add_link(&time, &sketches, Polarity::Negative)?;
    let l2 = rm.add_link(&exp, &sketches, Polarity::Positive)?;
    let l3 = rm.add_link(&sketches, &quality, Polarity::Positive)?;

    rm.attach_evidence(&l1, EvidenceKind::Reference, "Protocol study of 12 designers", Some("doi:10.1016/x"))?;
    rm.attach_evidence(&l2, EvidenceKind::Experience, "Seen in two industrial workshops", None)?;
    rm.attach_evidence(&l3, EvidenceKind::Assumption, "More variants widen the solution space", None)?;

    assert!(rm.validate().is_empty());
    Ok(rm)
}

#[allow(dead_code)]
fn main() -> Result<(), dreams::Error> {
    let rm = run()?;
    println!("{} ({}), revision {}", rm.title, rm.kind, rm.revision);
    for node in &rm.nodes {
        println!("  [{}] {}", node.kind, node.label);
    }
    for link in &rm.links {
        let label = |id: &str| rm.node(id).map(|n| n.label.as_str()).unwrap_or("?");
        println!(
            "  {} --{}--> {}  ({} evidence)",
            label(&link.source),
            link.polarity.glyph(),
            label(&link.target),
            link.evidence.len()
        );
    }
    Ok(())
}
