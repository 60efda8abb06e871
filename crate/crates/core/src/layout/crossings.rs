//! Crossing counting and barycentric crossing reduction on proper layered
//! graphs.

use super::proper::{Orders, ProperGraph};

fn positions(g: &ProperGraph, orders: &Orders) -> Vec<usize> {
    let mut pos = vec![0; g.vertex_count()];
    for order in orders {
        for (rank, &v) in order.iter().enumerate() {
            pos[v] = rank;
        }
    }
    pos
}

/// Exact number of pairwise edge crossings, summed over adjacent layer
/// pairs. Edges sharing an endpoint never cross.
///
/// Per layer pair the edges are sorted by upper position and the
/// inversions among their lower positions are counted with a Fenwick tree,
/// giving O(E log V) overall.
pub fn count_crossings(g: &ProperGraph, orders: &Orders) -> u64 {
    let pos = positions(g, orders);
    let mut by_layer: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.layer_count];
    for &(s, t) in &g.edges {
        by_layer[g.layer[s]].push((pos[s], pos[t]));
    }
    let mut total = 0u64;
    for (l, mut segs) in by_layer.into_iter().enumerate() {
        if segs.len() < 2 {
            continue;
        }
        segs.sort_unstable();
        let width = orders.get(l + 1).map_or(0, Vec::len);
        let mut tree = Fenwick::new(width);
        for (inserted, &(_, lower)) in segs.iter().enumerate() {
            // earlier segments whose lower end lies strictly to the right
            total += (inserted as u64) - tree.prefix_sum(lower + 1);
            tree.add(lower);
        }
    }
    total
}

struct Fenwick(Vec<u64>);

impl Fenwick {
    fn new(len: usize) -> Self {
        Fenwick(vec![0; len + 1])
    }

    fn add(&mut self, index: usize) {
        let mut i = index + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over indices `0..end`.
    fn prefix_sum(&self, end: usize) -> u64 {
        let mut i = end;
        let mut sum = 0;
        while i > 0 {
            sum += self.0[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }
}

/// Reorders one layer by the mean position of each vertex's neighbours in
/// the adjacent fixed layer. Vertices without such neighbours keep their
/// current rank as key. Ties keep the current relative order, or reverse
/// it when `flip_ties` is set.
///
/// With `movable`, the other vertices keep their relative order and the
/// movable ones are merged in among them by key.
fn reorder_layer(
    order: &mut Vec<usize>,
    neighbours: &[Vec<usize>],
    pos: &mut [usize],
    flip_ties: bool,
    movable: Option<&[bool]>,
) {
    let mut keyed: Vec<(f64, usize, usize)> = order
        .iter()
        .enumerate()
        .map(|(rank, &v)| {
            let ns = &neighbours[v];
            let key = if ns.is_empty() {
                rank as f64
            } else {
                ns.iter().map(|&u| pos[u] as f64).sum::<f64>() / ns.len() as f64
            };
            (key, rank, v)
        })
        .collect();
    let by_key = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
        let tie = if flip_ties { b.1.cmp(&a.1) } else { a.1.cmp(&b.1) };
        a.0.total_cmp(&b.0).then(tie)
    };
    let ranked: Vec<usize> = match movable {
        None => {
            keyed.sort_by(by_key);
            keyed.into_iter().map(|k| k.2).collect()
        }
        Some(movable) => {
            let (mut free, fixed): (Vec<_>, Vec<_>) = keyed.into_iter().partition(|k| movable[k.2]);
            free.sort_by(by_key);
            let mut merged = Vec::with_capacity(free.len() + fixed.len());
            let mut free = free.into_iter().peekable();
            for f in fixed {
                while let Some(m) = free.next_if(|m| by_key(m, &f).is_lt()) {
                    merged.push(m.2);
                }
                merged.push(f.2);
            }
            merged.extend(free.map(|m| m.2));
            merged
        }
    };
    order.clear();
    for (rank, v) in ranked.into_iter().enumerate() {
        pos[v] = rank;
        order.push(v);
    }
}

/// Crossings between the edges of `u` and those of `v` when `u` is left of
/// `v`, counted against one adjacent layer.
fn pair_crossings(u: usize, v: usize, neighbours: &[Vec<usize>], pos: &[usize]) -> u64 {
    let mut c = 0;
    for &a in &neighbours[u] {
        for &b in &neighbours[v] {
            if pos[a] > pos[b] {
                c += 1;
            }
        }
    }
    c
}

/// Crossings between the edges of `u` and `v` with `u` left of `v`,
/// against both adjacent layers.
fn pair_cost(u: usize, v: usize, upper: &[Vec<usize>], lower: &[Vec<usize>], pos: &[usize]) -> u64 {
    pair_crossings(u, v, upper, pos) + pair_crossings(u, v, lower, pos)
}

/// Sifting: moves each vertex to the slot of its layer where its edges
/// cross the fewest others, the others held in place. A vertex only moves
/// for a strict gain, so repeated passes end. With `movable`, only the
/// flagged vertices move.
fn sift(
    current: &mut Orders,
    pos: &mut [usize],
    upper: &[Vec<usize>],
    lower: &[Vec<usize>],
    movable: Option<&[bool]>,
) {
    let mut improved = true;
    while improved {
        improved = false;
        for order in current.iter_mut() {
            let snapshot = order.clone();
            for v in snapshot {
                if movable.is_some_and(|m| !m[v]) {
                    continue;
                }
                let from = pos[v];
                let others: Vec<usize> = order.iter().copied().filter(|&w| w != v).collect();
                // cost of slot k: others[..k] lie left of v, the rest right
                let mut cost: u64 = others.iter().map(|&w| pair_cost(v, w, upper, lower, pos)).sum();
                let (mut best, mut best_cost) = (0, cost);
                let mut current_cost = if from == 0 { cost } else { u64::MAX };
                for (k, &w) in others.iter().enumerate() {
                    cost = cost - pair_cost(v, w, upper, lower, pos) + pair_cost(w, v, upper, lower, pos);
                    if cost < best_cost {
                        (best, best_cost) = (k + 1, cost);
                    }
                    if k + 1 == from {
                        current_cost = cost;
                    }
                }
                if best_cost < current_cost {
                    order.remove(from);
                    order.insert(best, v);
                    for (rank, &w) in order.iter().enumerate() {
                        pos[w] = rank;
                    }
                    improved = true;
                }
            }
        }
    }
}

/// Layer-by-layer barycenter sweeps (down then up), each followed by a
/// sifting pass, at most `max_sweeps` rounds. Returns the ordering
/// with the fewest crossings seen, which is never worse than `initial`.
/// Barycenter ties are broken one way on even rounds and the other way on
/// odd ones; the sweeps stop once two rounds in a row bring no strict
/// improvement.
pub fn minimize_crossings(g: &ProperGraph, initial: Orders, max_sweeps: u32) -> Orders {
    // further starts from depth-first and mirrored orders escape some
    // local optima; earlier starts win ties
    let mirrored: Orders = initial.iter().map(|o| o.iter().rev().copied().collect()).collect();
    let starts = [
        depth_first_orders(g, &initial),
        depth_first_orders(g, &mirrored),
        mirrored,
    ];
    let mut best = minimize_with(g, initial, max_sweeps, None);
    let mut best_count = count_crossings(g, &best);
    for start in starts {
        if best_count == 0 {
            break;
        }
        let candidate = minimize_with(g, start, max_sweeps, None);
        let count = count_crossings(g, &candidate);
        if count < best_count {
            (best, best_count) = (candidate, count);
        }
    }
    best
}

/// Orders each layer by first visit in a depth-first walk over the
/// undirected graph, started from vertices in their `initial` order, so
/// connected parts end up side by side.
fn depth_first_orders(g: &ProperGraph, initial: &Orders) -> Orders {
    let pos = positions(g, initial);
    let (upper, lower) = g.adjacency();
    let mut seen = vec![false; g.vertex_count()];
    let mut orders: Orders = vec![Vec::new(); g.layer_count];
    for &root in initial.iter().flatten() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            orders[g.layer[v]].push(v);
            let mut next: Vec<usize> = upper[v].iter().chain(&lower[v]).copied().filter(|&u| !seen[u]).collect();
            // pushed in reverse so the leftmost neighbour is walked first
            next.sort_by_key(|&u| std::cmp::Reverse(pos[u]));
            next.dedup();
            for u in next {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    orders
}

/// [`minimize_crossings`] where only the vertices flagged in `movable`
/// may change their relative order; `None` frees every vertex.
pub(crate) fn minimize_with(g: &ProperGraph, initial: Orders, max_sweeps: u32, movable: Option<&[bool]>) -> Orders {
    let (upper, lower) = g.adjacency();
    let mut best_count = count_crossings(g, &initial);
    let mut best = initial.clone();
    let mut current = initial;
    let mut pos = positions(g, &current);
    let layers = g.layer_count;

    let mut idle = 0;
    for round in 0..max_sweeps {
        if best_count == 0 || layers < 2 {
            break;
        }
        let before = best_count;
        let flip = round % 2 == 1;
        for order in current.iter_mut().skip(1) {
            reorder_layer(order, &upper, &mut pos, flip, movable);
        }
        sift(&mut current, &mut pos, &upper, &lower, movable);
        let down = count_crossings(g, &current);
        if down < best_count {
            best_count = down;
            best = current.clone();
        }
        for l in (0..layers - 1).rev() {
            reorder_layer(&mut current[l], &lower, &mut pos, flip, movable);
        }
        sift(&mut current, &mut pos, &upper, &lower, movable);
        let up = count_crossings(g, &current);
        if up < best_count {
            best_count = up;
            best = current.clone();
        }
        if best_count < before {
            idle = 0;
        } else {
            idle += 1;
            if idle == 2 {
                break;
            }
        }
    }
    best
}
