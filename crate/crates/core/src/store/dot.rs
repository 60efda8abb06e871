use std::fmt::Write;

use crate::model::{ModelDocument, ModelKind, NodeKind, Polarity};

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn kind_style(kind: NodeKind) -> (&'static str, &'static str, &'static str) {
    // (shape, style, fill colour)
    match kind {
        NodeKind::InfluencingFactor => ("box", "filled", "#dbeafe"),
        NodeKind::SuccessFactor => ("ellipse", "filled", "#dcfce7"),
        NodeKind::KeyFactor => ("box", "filled,bold,rounded", "#fef3c7"),
        NodeKind::AssumptionNode => ("note", "filled,dashed", "#f3e8ff"),
    }
}

/// Graphviz DOT text: one node statement per factor, one edge statement per
/// link. Negative links are dashed and labelled with a minus sign.
pub fn export_dot(model: &ModelDocument) -> String {
    let mut out = String::new();
    let kind = match model.kind {
        ModelKind::ReferenceModel => "reference model",
        ModelKind::ImpactModel => "impact model",
    };
    let _ = writeln!(out, "digraph {} {{", quote(&model.id));
    let _ = writeln!(
        out,
        "  graph [rankdir=TB, labelloc=t, label={}];",
        quote(&format!("{} ({kind})", model.title))
    );
    let _ = writeln!(out, "  node [fontname=\"Helvetica\"];");
    let _ = writeln!(out, "  edge [fontname=\"Helvetica\"];");
    for node in &model.nodes {
        let (shape, style, fill) = kind_style(node.kind);
        let _ = writeln!(
            out,
            "  {} [label={}, shape={shape}, style={}, fillcolor={}, class={}];",
            quote(&node.id),
            quote(&node.label),
            quote(style),
            quote(fill),
            quote(node.kind.as_str()),
        );
    }
    for link in &model.links {
        let style = match link.polarity {
            Polarity::Positive => "solid",
            Polarity::Negative => "dashed",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [id={}, label={}, style={style}, tooltip={}];",
            quote(&link.source),
            quote(&link.target),
            quote(&link.id),
            quote(link.polarity.glyph()),
            quote(&format!("{} evidence item(s)", link.evidence.len())),
        );
    }
    out.push_str("}\n");
    out
}
