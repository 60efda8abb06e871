//! Layered (Sugiyama-style) layout of causal models.
//!
//! The pipeline runs cycle removal, longest-path layering, dummy insertion,
//! barycentric crossing reduction and coordinate assignment. Each stage is
//! exposed on its own over plain index graphs so it can be checked in
//! isolation; [`layout`] wires them together over a [`ModelDocument`].
//!
//! Re-layout after an edit can be seeded with the previous layout: surviving
//! nodes and bend points start from their previous left-to-right order, and
//! the crossing reduction only replaces that ordering when it finds strictly
//! fewer crossings.

mod coords;
mod crossings;
mod cycles;
mod layering;
mod proper;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelDocument;

pub use coords::assign_coordinates;
pub use crossings::{count_crossings, minimize_crossings};
pub use cycles::remove_cycles;
pub use layering::assign_layers;
pub use proper::{insert_dummies, Orders, ProperGraph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    TopDown,
    LeftRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutConfig {
    pub layer_gap: f64,
    pub node_gap: f64,
    pub direction: Direction,
    pub max_sweeps: u32,
    /// Initial in-layer order by node id (true) or by position in the
    /// model's node list (false).
    pub deterministic_seed_order: bool,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            layer_gap: 120.0,
            node_gap: 180.0,
            direction: Direction::TopDown,
            max_sweeps: 8,
            deterministic_seed_order: true,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.layer_gap > 0.0 && self.layer_gap.is_finite()) {
            return Err(Error::validation("layer_gap must be positive"));
        }
        if !(self.node_gap > 0.0 && self.node_gap.is_finite()) {
            return Err(Error::validation("node_gap must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::validation("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

/// Result of laying out one model. Maps are keyed by node or link id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredLayout {
    pub direction: Direction,
    pub layer_of: BTreeMap<String, usize>,
    /// Rank among the model nodes of the same layer, left to right.
    pub order_of: BTreeMap<String, usize>,
    pub position_of: BTreeMap<String, Point>,
    /// Polyline from the stored source to the stored target, one point per
    /// layer crossed.
    pub routes: BTreeMap<String, Vec<Point>>,
    /// Links drawn against their stored direction to break cycles.
    pub reversed_links: BTreeSet<String>,
    pub crossing_count: u64,
}

impl LayeredLayout {
    pub fn empty(direction: Direction) -> Self {
        LayeredLayout {
            direction,
            layer_of: BTreeMap::new(),
            order_of: BTreeMap::new(),
            position_of: BTreeMap::new(),
            routes: BTreeMap::new(),
            reversed_links: BTreeSet::new(),
            crossing_count: 0,
        }
    }

    fn along(&self, p: &Point) -> f64 {
        match self.direction {
            Direction::TopDown => p.x,
            Direction::LeftRight => p.y,
        }
    }

    fn across(&self, p: &Point) -> f64 {
        match self.direction {
            Direction::TopDown => p.y,
            Direction::LeftRight => p.x,
        }
    }

    /// Counts crossings again, straight from the route geometry: every pair
    /// of segments between the same two layers whose ends swap sides.
    pub fn route_crossings(&self) -> u64 {
        type Segment = (f64, f64);
        let mut by_layer: BTreeMap<i64, Vec<Segment>> = BTreeMap::new();
        for route in self.routes.values() {
            for pair in route.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let (top, bottom) = if self.across(a) <= self.across(b) { (a, b) } else { (b, a) };
                let key = (self.across(top) * 64.0).round() as i64;
                by_layer
                    .entry(key)
                    .or_default()
                    .push((self.along(top), self.along(bottom)));
            }
        }
        let mut count = 0;
        for segs in by_layer.values() {
            for (i, s) in segs.iter().enumerate() {
                for t in &segs[i + 1..] {
                    if (s.0 - t.0) * (s.1 - t.1) < 0.0 {
                        count += 1;
                    }
                }
            }
        }
        count
    }
}

/// Lays out `model`. With `previous`, nodes and bend points that survive on
/// the same layer keep their previous relative order, and crossing
/// reduction only places the rest among them. Without it every vertex is
/// free.
///
/// The result depends only on the arguments.
pub fn layout(
    model: &ModelDocument,
    config: &LayoutConfig,
    previous: Option<&LayeredLayout>,
) -> Result<LayeredLayout> {
    config.validate()?;
    let index: HashMap<&str, usize> = model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let mut edges = Vec::with_capacity(model.links.len());
    for link in &model.links {
        let (Some(&s), Some(&t)) = (index.get(link.source.as_str()), index.get(link.target.as_str())) else {
            return Err(Error::validation_at("link endpoint is not a node", &link.id));
        };
        if s == t {
            return Err(Error::validation_at("self-loops cannot be laid out", &link.id));
        }
        edges.push((s, t));
    }

    let reversed: BTreeSet<usize> = remove_cycles(model.nodes.len(), &edges).into_iter().collect();
    let oriented: Vec<(usize, usize)> = edges
        .iter()
        .enumerate()
        .map(|(e, &(s, t))| if reversed.contains(&e) { (t, s) } else { (s, t) })
        .collect();
    let layers = assign_layers(model.nodes.len(), &oriented)?;
    let graph = insert_dummies(&layers, &oriented);

    let tiebreak = tiebreak_ranks(model, &graph, config.deterministic_seed_order);
    let orders = match previous {
        Some(prev) => {
            let (initial, movable) = seeded_orders(model, &graph, &reversed, prev, &tiebreak);
            crossings::minimize_with(&graph, initial, config.max_sweeps, Some(&movable))
        }
        None => minimize_crossings(&graph, identity_by(&graph, &tiebreak), config.max_sweeps),
    };
    let crossing_count = count_crossings(&graph, &orders);
    let points = assign_coordinates(&graph, &orders, config);

    let mut out = LayeredLayout::empty(config.direction);
    out.crossing_count = crossing_count;
    for order in &orders {
        let mut rank = 0;
        for &v in order {
            if let Vertex::Real(i) = graph.vertices[v] {
                let id = &model.nodes[i].id;
                out.layer_of.insert(id.clone(), layers[i]);
                out.order_of.insert(id.clone(), rank);
                out.position_of.insert(id.clone(), points[v]);
                rank += 1;
            }
        }
    }
    for (e, link) in model.links.iter().enumerate() {
        let mut route: Vec<Point> = graph.chains[e].iter().map(|&v| points[v]).collect();
        if reversed.contains(&e) {
            route.reverse();
            out.reversed_links.insert(link.id.clone());
        }
        out.routes.insert(link.id.clone(), route);
    }
    Ok(out)
}

/// Total order used to break ties: model nodes (by id, or by model position)
/// before bend points (by link, then step).
fn tiebreak_ranks(model: &ModelDocument, graph: &ProperGraph, by_id: bool) -> Vec<usize> {
    let mut keyed: Vec<(u8, &str, usize, usize)> = graph
        .vertices
        .iter()
        .enumerate()
        .map(|(v, vertex)| match *vertex {
            Vertex::Real(i) if by_id => (0, model.nodes[i].id.as_str(), 0, v),
            Vertex::Real(i) => (0, "", i, v),
            Vertex::Dummy { edge, step } if by_id => (1, model.links[edge].id.as_str(), step, v),
            Vertex::Dummy { edge, step } => (1, "", edge * graph.layer_count + step, v),
        })
        .collect();
    keyed.sort_unstable();
    let mut rank = vec![0; keyed.len()];
    for (r, k) in keyed.iter().enumerate() {
        rank[k.3] = r;
    }
    rank
}

fn identity_by(graph: &ProperGraph, tiebreak: &[usize]) -> Orders {
    let mut orders = graph.identity_orders();
    for order in &mut orders {
        order.sort_by_key(|&v| tiebreak[v]);
    }
    orders
}

/// Initial orders seeded from `prev`, plus a flag per vertex that had no
/// seed and so may move.
fn seeded_orders(
    model: &ModelDocument,
    graph: &ProperGraph,
    reversed: &BTreeSet<usize>,
    prev: &LayeredLayout,
    tiebreak: &[usize],
) -> (Orders, Vec<bool>) {
    let seeds: Vec<Option<f64>> = (0..graph.vertex_count())
        .map(|v| seed_of(model, graph, reversed, prev, v))
        .collect();
    let (upper, _) = graph.adjacency();
    let mut pos = vec![0usize; graph.vertex_count()];
    let mut orders = graph.identity_orders();
    for order in orders.iter_mut() {
        let mut seeded: Vec<usize> = order.iter().copied().filter(|&v| seeds[v].is_some()).collect();
        seeded.sort_by(|&a, &b| {
            seeds[a]
                .unwrap()
                .total_cmp(&seeds[b].unwrap())
                .then(tiebreak[a].cmp(&tiebreak[b]))
        });
        // survivors keep their previous order; newcomers slot in by barycenter
        let mut keyed: Vec<(f64, u8, usize, usize)> = seeded
            .iter()
            .enumerate()
            .map(|(rank, &v)| (rank as f64, 0, tiebreak[v], v))
            .collect();
        for &v in order.iter().filter(|&&v| seeds[v].is_none()) {
            let ns = &upper[v];
            let key = if ns.is_empty() {
                f64::INFINITY
            } else {
                ns.iter().map(|&u| pos[u] as f64).sum::<f64>() / ns.len() as f64
            };
            keyed.push((key, 1, tiebreak[v], v));
        }
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        order.clear();
        for (rank, (.., v)) in keyed.into_iter().enumerate() {
            pos[v] = rank;
            order.push(v);
        }
    }
    (orders, seeds.iter().map(Option::is_none).collect())
}

/// Previous along-layer coordinate of a vertex, if it existed in the same
/// layer last time.
fn seed_of(
    model: &ModelDocument,
    graph: &ProperGraph,
    reversed: &BTreeSet<usize>,
    prev: &LayeredLayout,
    v: usize,
) -> Option<f64> {
    match graph.vertices[v] {
        Vertex::Real(i) => {
            let id = &model.nodes[i].id;
            (prev.layer_of.get(id) == Some(&graph.layer[v]))
                .then(|| prev.position_of.get(id).map(|p| prev.along(p)))
                .flatten()
        }
        Vertex::Dummy { edge, step } => {
            let link = &model.links[edge];
            let was_reversed = prev.reversed_links.contains(&link.id);
            let chain = &graph.chains[edge];
            let route = prev.routes.get(&link.id)?;
            let upper_end = graph.vertices[chain[0]];
            let Vertex::Real(upper_node) = upper_end else { return None };
            let same_span = was_reversed == reversed.contains(&edge)
                && route.len() == chain.len()
                && prev.layer_of.get(&model.nodes[upper_node].id) == Some(&graph.layer[chain[0]]);
            if !same_span {
                return None;
            }
            let point = if was_reversed { &route[route.len() - 1 - step] } else { &route[step] };
            Some(prev.along(point))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, NodeKind, Polarity};

    fn chain_model(n: usize) -> (ModelDocument, Vec<String>) {
        let mut m = ModelDocument::new(ModelKind::ReferenceModel, "chain").unwrap();
        let ids: Vec<String> = (0..n)
            .map(|i| m.add_node(NodeKind::InfluencingFactor, &format!("n{i}")).unwrap())
            .collect();
        for w in ids.windows(2) {
            m.add_link(&w[0], &w[1], Polarity::Positive).unwrap();
        }
        (m, ids)
    }

    #[test]
    fn empty_model() {
        let m = ModelDocument::new(ModelKind::ReferenceModel, "empty").unwrap();
        let l = layout(&m, &LayoutConfig::default(), None).unwrap();
        assert_eq!(l, LayeredLayout::empty(Direction::TopDown));
    }

    #[test]
    fn chain_layers_and_routes() {
        let (m, ids) = chain_model(3);
        let l = layout(&m, &LayoutConfig::default(), None).unwrap();
        let layers: Vec<usize> = ids.iter().map(|id| l.layer_of[id]).collect();
        assert_eq!(layers, vec![0, 1, 2]);
        assert!(l.routes.values().all(|r| r.len() == 2));
        assert_eq!(l.crossing_count, 0);
    }

    #[test]
    fn feedback_link_is_reversed_but_routed_forwards() {
        let (mut m, ids) = chain_model(3);
        let back = m.add_link(&ids[2], &ids[0], Polarity::Negative).unwrap();
        let l = layout(&m, &LayoutConfig::default(), None).unwrap();
        assert_eq!(l.reversed_links.iter().collect::<Vec<_>>(), vec![&back]);
        assert!(l.layer_of[&ids[2]] > l.layer_of[&ids[0]]);
        let route = &l.routes[&back];
        assert_eq!(route.len(), 3, "one bend point for a two-layer span");
        assert_eq!(route[0], l.position_of[&ids[2]]);
        assert_eq!(route[2], l.position_of[&ids[0]]);
    }

    #[test]
    fn rejects_bad_config() {
        let (m, _) = chain_model(2);
        let bad = LayoutConfig {
            max_sweeps: 0,
            ..LayoutConfig::default()
        };
        assert!(layout(&m, &bad, None).is_err());
    }

    #[test]
    fn route_crossings_agree_with_count() {
        let mut m = ModelDocument::new(ModelKind::ReferenceModel, "k22").unwrap();
        let a = m.add_node(NodeKind::InfluencingFactor, "a").unwrap();
        let b = m.add_node(NodeKind::InfluencingFactor, "b").unwrap();
        let c = m.add_node(NodeKind::SuccessFactor, "c").unwrap();
        let d = m.add_node(NodeKind::SuccessFactor, "d").unwrap();
        for (s, t) in [(&a, &c), (&a, &d), (&b, &c), (&b, &d)] {
            m.add_link(s, t, Polarity::Positive).unwrap();
        }
        let l = layout(&m, &LayoutConfig::default(), None).unwrap();
        assert_eq!(l.crossing_count, 1);
        assert_eq!(l.route_crossings(), 1);
    }

    #[test]
    fn relayout_with_itself_is_a_fixed_point() {
        let (mut m, ids) = chain_model(5);
        m.add_link(&ids[0], &ids[3], Polarity::Negative).unwrap();
        m.add_link(&ids[4], &ids[1], Polarity::Negative).unwrap();
        let config = LayoutConfig::default();
        let first = layout(&m, &config, None).unwrap();
        let second = layout(&m, &config, Some(&first)).unwrap();
        assert_eq!(first.order_of, second.order_of);
        assert_eq!(first.crossing_count, second.crossing_count);
    }
}
