use crate::error::{Error, Result};

/// A vertex of a proper layered graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    /// An input vertex, by its index in the input graph.
    Real(usize),
    /// The `step`-th bend point (1-based) of a long input edge.
    Dummy { edge: usize, step: usize },
}

/// A layered digraph in which every edge joins adjacent layers, pointing
/// from layer `i` to layer `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperGraph {
    pub vertices: Vec<Vertex>,
    pub layer: Vec<usize>,
    pub layer_count: usize,
    pub edges: Vec<(usize, usize)>,
    /// For each input edge: the vertex path from its upper end to its lower
    /// end. Empty when built directly with [`ProperGraph::new`].
    pub chains: Vec<Vec<usize>>,
}

/// Per-layer vertex orders, left to right.
pub type Orders = Vec<Vec<usize>>;

impl ProperGraph {
    /// Builds a proper layered graph from explicit layers, rejecting any
    /// edge that does not go from one layer to the next.
    pub fn new(layer: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = layer.len();
        for &(s, t) in &edges {
            if s >= n || t >= n {
                return Err(Error::Domain(format!("edge ({s}, {t}) has an unknown end")));
            }
            if layer[t] != layer[s] + 1 {
                return Err(Error::Domain(format!(
                    "edge ({s}, {t}) spans layers {} -> {}",
                    layer[s], layer[t]
                )));
            }
        }
        let layer_count = layer.iter().map(|l| l + 1).max().unwrap_or(0);
        Ok(ProperGraph {
            vertices: (0..n).map(Vertex::Real).collect(),
            layer,
            layer_count,
            edges,
            chains: Vec::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Vertices grouped by layer in index order.
    pub fn identity_orders(&self) -> Orders {
        let mut orders = vec![Vec::new(); self.layer_count];
        for (v, &l) in self.layer.iter().enumerate() {
            orders[l].push(v);
        }
        orders
    }

    /// Neighbours one layer up (`upper`) and one layer down (`lower`).
    pub(crate) fn adjacency(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut upper = vec![Vec::new(); self.vertex_count()];
        let mut lower = vec![Vec::new(); self.vertex_count()];
        for &(s, t) in &self.edges {
            lower[s].push(t);
            upper[t].push(s);
        }
        (upper, lower)
    }

    /// Checks that `orders` is a permutation of each layer.
    pub fn check_orders(&self, orders: &Orders) -> Result<()> {
        if orders.len() != self.layer_count {
            return Err(Error::Domain(format!(
                "{} layer orders for {} layers",
                orders.len(),
                self.layer_count
            )));
        }
        let mut seen = vec![false; self.vertex_count()];
        for (l, order) in orders.iter().enumerate() {
            for &v in order {
                if v >= seen.len() || self.layer[v] != l || seen[v] {
                    return Err(Error::Domain(format!("vertex {v} misplaced in layer {l}")));
                }
                seen[v] = true;
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::Domain("layer orders miss some vertices".into()))
        }
    }
}

/// Splits every edge spanning `k > 1` layers into a chain through `k - 1`
/// dummy vertices. `edges` must already point downwards
/// (`layers[t] > layers[s]`).
pub fn insert_dummies(layers: &[usize], edges: &[(usize, usize)]) -> ProperGraph {
    let mut vertices: Vec<Vertex> = (0..layers.len()).map(Vertex::Real).collect();
    let mut layer = layers.to_vec();
    let mut proper_edges = Vec::with_capacity(edges.len());
    let mut chains = Vec::with_capacity(edges.len());
    for (e, &(s, t)) in edges.iter().enumerate() {
        debug_assert!(layers[t] > layers[s], "edge {e} does not point down");
        let mut chain = vec![s];
        let mut prev = s;
        for step in 1..layers[t] - layers[s] {
            let d = vertices.len();
            vertices.push(Vertex::Dummy { edge: e, step });
            layer.push(layers[s] + step);
            proper_edges.push((prev, d));
            chain.push(d);
            prev = d;
        }
        proper_edges.push((prev, t));
        chain.push(t);
        chains.push(chain);
    }
    let layer_count = layer.iter().map(|l| l + 1).max().unwrap_or(0);
    ProperGraph {
        vertices,
        layer,
        layer_count,
        edges: proper_edges,
        chains,
    }
}
