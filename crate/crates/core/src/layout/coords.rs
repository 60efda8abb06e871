//! Coordinate assignment: each layer starts centred on a shared axis with
//! exactly `node_gap` spacing, then a few barycentric passes pull vertices
//! towards their neighbours while keeping order and minimum spacing.

use super::proper::{Orders, ProperGraph};
use super::{Direction, LayoutConfig, Point};

const REFINE_PASSES: usize = 4;

/// Coordinates live on a 1/64 grid so spacing arithmetic stays exact for
/// gaps that are themselves multiples of 1/64.
fn snap(x: f64) -> f64 {
    (x * 64.0).round() / 64.0
}

/// Positions for every vertex of `g` (dummies included), indexed by vertex.
pub fn assign_coordinates(g: &ProperGraph, orders: &Orders, config: &LayoutConfig) -> Vec<Point> {
    let gap = config.node_gap;
    let mut x = vec![0.0; g.vertex_count()];
    for order in orders {
        let half = (order.len() as f64 - 1.0) / 2.0;
        for (rank, &v) in order.iter().enumerate() {
            x[v] = snap((rank as f64 - half) * gap);
        }
    }

    let (upper, lower) = g.adjacency();
    for _ in 0..REFINE_PASSES {
        for order in orders.iter().skip(1) {
            pull_towards(order, &upper, &mut x, gap);
        }
        for l in (0..orders.len().saturating_sub(1)).rev() {
            pull_towards(&orders[l], &lower, &mut x, gap);
        }
    }

    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let shift = if lo.is_finite() { snap((lo + hi) / 2.0) } else { 0.0 };

    (0..g.vertex_count())
        .map(|v| {
            let along = x[v] - shift;
            let across = g.layer[v] as f64 * config.layer_gap;
            match config.direction {
                Direction::TopDown => Point { x: along, y: across },
                Direction::LeftRight => Point { x: across, y: along },
            }
        })
        .collect()
}

fn pull_towards(order: &[usize], neighbours: &[Vec<usize>], x: &mut [f64], gap: f64) {
    if order.is_empty() {
        return;
    }
    let desired: Vec<f64> = order
        .iter()
        .map(|&v| {
            let ns = &neighbours[v];
            if ns.is_empty() {
                x[v]
            } else {
                ns.iter().map(|&u| x[u]).sum::<f64>() / ns.len() as f64
            }
        })
        .collect();
    let placed = spaced_fit(&desired, gap);
    for (&v, p) in order.iter().zip(placed) {
        x[v] = p;
    }
}

/// Least-squares positions closest to `desired` such that consecutive
/// positions are at least `gap` apart. Shifting by `i * gap` turns this into
/// isotonic regression, solved by pool-adjacent-violators.
fn spaced_fit(desired: &[f64], gap: f64) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for (i, d) in desired.iter().enumerate() {
        let mut block = (d - i as f64 * gap, 1usize);
        while let Some(&(sum, count)) = blocks.last() {
            if sum / count as f64 > block.0 / block.1 as f64 {
                blocks.pop();
                block = (block.0 + sum, block.1 + count);
            } else {
                break;
            }
        }
        blocks.push(block);
    }
    let mut out = Vec::with_capacity(desired.len());
    for (sum, count) in blocks {
        let mean = snap(sum / count as f64);
        for _ in 0..count {
            out.push(mean + out.len() as f64 * gap);
        }
    }
    for i in 1..out.len() {
        if out[i] - out[i - 1] < gap {
            out[i] = out[i - 1] + gap;
        }
    }
    out
}
