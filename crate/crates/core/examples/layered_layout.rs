//! Lays out a model containing a feedback loop. One link of the loop is
//! drawn reversed so every layer points the same way.
use dreams::layout::{layout, LayoutConfig};
use dreams::{LayeredLayout, ModelDocument, ModelKind, NodeKind, Polarity};

pub fn run() -> Result<(ModelDocument, LayeredLayout), dreams::Error> {
    let mut m = ModelDocument::new(ModelKind::ImpactModel, "Tool support loop")?;
    let support = m.add_node(NodeKind::KeyFactor, "Layout support")?;
    let clutter = m.add_node(NodeKind::InfluencingFactor, "Visual clutter")?;
    let effort = m.add_node(NodeKind::SuccessFactor, "Revision effort")?;
    let size = m.add_node(NodeKind::InfluencingFactor, "Model size")?;
    m.add_link(&support, &clutter, Polarity::Negative)?;
    m.add_link(&clutter, &effort, Polarity::Positive)?;
    m.add_link(&effort, &size, Polarity::Negative)?;
    m.add_link(&size, &clutter, Polarity::Positive)?;
    m.add_link(&support, &effort, Polarity::Negative)?;

    let l = layout(&m, &LayoutConfig::default(), None)?;
    Ok((m, l))
}

#[allow(dead_code)]
fn main() -> Result<(), dreams::Error> {
    let (m, l) = run()?;
    for node in &m.nodes {
        let p = l.position_of[&node.id];
        println!("layer {} rank {}  ({:>6.1}, {:>6.1})  {}", l.layer_of[&node.id], l.order_of[&node.id], p.x, p.y, node.label);
    }
    println!("reversed links: {}", l.reversed_links.len());
    println!("crossings: {}", l.crossing_count);
    Ok(())
}
