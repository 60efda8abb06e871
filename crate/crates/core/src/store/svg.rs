use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::layout::{LayeredLayout, Point};
use crate::model::{ModelDocument, NodeKind, Polarity};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Canvas pixels per layout unit.
    pub scale: f64,
    pub margin: f64,
    pub node_width: f64,
    pub node_height: f64,
    pub font_size: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            scale: 1.0,
            margin: 24.0,
            node_width: 150.0,
            node_height: 44.0,
            font_size: 13.0,
        }
    }
}

/// Maps layout coordinates onto the canvas.
struct Frame {
    min_x: f64,
    min_y: f64,
    width: f64,
    height: f64,
    opts: RenderOptions,
}

impl Frame {
    fn new(layout: &LayeredLayout, opts: &RenderOptions) -> Self {
        let points = layout
            .position_of
            .values()
            .chain(layout.routes.values().flatten());
        let (mut min_x, mut min_y, mut max_x, mut max_y) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        if !min_x.is_finite() {
            (min_x, min_y, max_x, max_y) = (0.0, 0.0, 0.0, 0.0);
        }
        Frame {
            min_x,
            min_y,
            width: (max_x - min_x) * opts.scale + 2.0 * opts.margin + opts.node_width,
            height: (max_y - min_y) * opts.scale + 2.0 * opts.margin + opts.node_height,
            opts: opts.clone(),
        }
    }

    fn map(&self, p: &Point) -> (f64, f64) {
        (
            (p.x - self.min_x) * self.opts.scale + self.opts.margin + self.opts.node_width / 2.0,
            (p.y - self.min_y) * self.opts.scale + self.opts.margin + self.opts.node_height / 2.0,
        )
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' && c != '\r' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn fill_of(kind: NodeKind) -> &'static str {
    super::dot::kind_style(kind).2
}

/// Moves `from` towards `to` until it leaves a `w` x `h` box centred on
/// `from`, so arrowheads stop at the node outline.
fn clip_to_box(from: (f64, f64), to: (f64, f64), w: f64, h: f64) -> (f64, f64) {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let tx = if dx.abs() > 1e-9 { (w / 2.0) / dx.abs() } else { f64::INFINITY };
    let ty = if dy.abs() > 1e-9 { (h / 2.0) / dy.abs() } else { f64::INFINITY };
    let t = tx.min(ty);
    if t >= 1.0 || !t.is_finite() {
        from
    } else {
        (from.0 + dx * t, from.1 + dy * t)
    }
}

fn midpoint(points: &[(f64, f64)]) -> (f64, f64) {
    let lengths: Vec<f64> = points
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .collect();
    let mut remaining = lengths.iter().sum::<f64>() / 2.0;
    for (w, len) in points.windows(2).zip(&lengths) {
        if remaining <= *len && *len > 0.0 {
            let t = remaining / len;
            return (w[0].0 + (w[1].0 - w[0].0) * t, w[0].1 + (w[1].1 - w[0].1) * t);
        }
        remaining -= len;
    }
    points[0]
}

fn check_coverage(model: &ModelDocument, layout: &LayeredLayout) -> Result<()> {
    let nodes: BTreeSet<&str> = model.nodes.iter().map(|n| n.id.as_str()).collect();
    let placed: BTreeSet<&str> = layout.position_of.keys().map(String::as_str).collect();
    if let Some(id) = nodes.symmetric_difference(&placed).next() {
        return Err(Error::validation_at("layout does not match the model's nodes", *id));
    }
    let links: BTreeSet<&str> = model.links.iter().map(|l| l.id.as_str()).collect();
    let routed: BTreeSet<&str> = layout.routes.keys().map(String::as_str).collect();
    if let Some(id) = links.symmetric_difference(&routed).next() {
        return Err(Error::validation_at("layout does not match the model's links", *id));
    }
    if let Some(link) = model.links.iter().find(|l| layout.routes[&l.id].len() < 2) {
        return Err(Error::validation_at("route needs at least two points", &link.id));
    }
    Ok(())
}

/// Renders a laid-out model as standalone SVG 1.1.
///
/// Each link is an arrowed path through its route with the polarity glyph at
/// the path midpoint and, when it carries evidence, a small count badge.
/// Nodes are drawn on top, shaped and coloured by kind.
pub fn render_svg(model: &ModelDocument, layout: &LayeredLayout, opts: &RenderOptions) -> Result<String> {
    check_coverage(model, layout)?;
    let frame = Frame::new(layout, opts);
    let (nw, nh) = (opts.node_width, opts.node_height);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}" font-family="Helvetica, Arial, sans-serif" font-size="{fs}">"#,
        w = frame.width,
        h = frame.height,
        fs = opts.font_size,
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&model.title));
    out.push_str(concat!(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" ",
        "markerWidth=\"8\" markerHeight=\"8\" orient=\"auto\">",
        "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#374151\"/></marker></defs>\n"
    ));

    out.push_str("<g class=\"links\">\n");
    for link in &model.links {
        let mut pts: Vec<(f64, f64)> = layout.routes[&link.id].iter().map(|p| frame.map(p)).collect();
        let mid = midpoint(&pts);
        let last = pts.len() - 1;
        pts[0] = clip_to_box(pts[0], pts[1], nw, nh);
        pts[last] = clip_to_box(pts[last], pts[last - 1], nw, nh);
        let d = pts
            .iter()
            .enumerate()
            .map(|(i, (x, y))| format!("{} {x:.2} {y:.2}", if i == 0 { "M" } else { "L" }))
            .collect::<Vec<_>>()
            .join(" ");
        let (polarity, dash) = match link.polarity {
            Polarity::Positive => ("positive", ""),
            Polarity::Negative => ("negative", r#" stroke-dasharray="6 4""#),
        };
        let _ = writeln!(out, r#"<g class="link" id="link-{}" data-polarity="{polarity}">"#, escape(&link.id));
        let _ = writeln!(
            out,
            r##"<path d="{d}" fill="none" stroke="#374151" stroke-width="1.5"{dash} marker-end="url(#arrow)"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text class="polarity" x="{:.2}" y="{:.2}" font-weight="bold">{}</text>"#,
            mid.0 + 6.0,
            mid.1 - 4.0,
            link.polarity.glyph()
        );
        if !link.evidence.is_empty() {
            let _ = writeln!(
                out,
                concat!(
                    r##"<g class="evidence-badge"><rect x="{:.2}" y="{:.2}" width="18" height="14" rx="7" fill="#fde68a" stroke="#92400e"/>"##,
                    r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text></g>"#
                ),
                mid.0 + 16.0,
                mid.1 - 15.0,
                mid.0 + 25.0,
                mid.1 - 4.5,
                link.evidence.len()
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"nodes\">\n");
    let max_chars = ((nw - 12.0) / (opts.font_size * 0.6)).floor().max(4.0) as usize;
    for node in &model.nodes {
        let (cx, cy) = frame.map(&layout.position_of[&node.id]);
        let fill = fill_of(node.kind);
        let _ = writeln!(
            out,
            r#"<g class="node node-{}" id="node-{}">"#,
            node.kind.as_str(),
            escape(&node.id)
        );
        let _ = writeln!(out, "<title>{}</title>", escape(&node.label));
        let (x, y) = (cx - nw / 2.0, cy - nh / 2.0);
        let _ = match node.kind {
            NodeKind::SuccessFactor => writeln!(
                out,
                r##"<ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{:.2}" ry="{:.2}" fill="{fill}" stroke="#1f2937"/>"##,
                nw / 2.0,
                nh / 2.0
            ),
            NodeKind::KeyFactor => writeln!(
                out,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{nw:.2}" height="{nh:.2}" rx="10" fill="{fill}" stroke="#1f2937" stroke-width="2.5"/>"##
            ),
            NodeKind::AssumptionNode => writeln!(
                out,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{nw:.2}" height="{nh:.2}" fill="{fill}" stroke="#1f2937" stroke-dasharray="4 3"/>"##
            ),
            NodeKind::InfluencingFactor => writeln!(
                out,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{nw:.2}" height="{nh:.2}" fill="{fill}" stroke="#1f2937"/>"##
            ),
        };
        let label: String = if node.label.chars().count() > max_chars {
            node.label.chars().take(max_chars - 1).chain(['…']).collect()
        } else {
            node.label.clone()
        };
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            cy + opts.font_size * 0.35,
            escape(&label)
        );
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
