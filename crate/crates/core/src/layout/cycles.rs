//! Greedy feedback-arc-set heuristic (Eades, Lin and Smyth).
//!
//! Vertices are peeled into a sequence: sinks go to the back, sources to the
//! front, and otherwise the vertex with the largest out-degree minus
//! in-degree goes to the front. Arcs pointing backwards in that sequence
//! form the feedback set. For graphs with no 2-cycles and no isolated
//! vertices the set has at most |E|/2 - |V|/6 arcs; on any input it has at
//! most |E|/2.

/// Returns indices into `edges` whose reversal makes the digraph acyclic.
///
/// Self-loops are ignored: reversing one cannot break it, and model links
/// never loop.
pub fn remove_cycles(node_count: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let sequence = peel_sequence(node_count, edges);
    let mut position = vec![0usize; node_count];
    for (rank, &v) in sequence.iter().enumerate() {
        position[v] = rank;
    }
    edges
        .iter()
        .enumerate()
        .filter(|(_, &(s, t))| s != t && position[s] > position[t])
        .map(|(i, _)| i)
        .collect()
}

fn peel_sequence(node_count: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut out_edges = vec![Vec::new(); node_count];
    let mut in_edges = vec![Vec::new(); node_count];
    let mut out_degree = vec![0i64; node_count];
    let mut in_degree = vec![0i64; node_count];
    for &(s, t) in edges {
        if s == t {
            continue;
        }
        out_edges[s].push(t);
        in_edges[t].push(s);
        out_degree[s] += 1;
        in_degree[t] += 1;
    }

    let mut alive = vec![true; node_count];
    let mut remaining = node_count;
    let mut front = Vec::with_capacity(node_count);
    let mut back = Vec::new();

    let remove = |v: usize,
                      alive: &mut Vec<bool>,
                      out_degree: &mut Vec<i64>,
                      in_degree: &mut Vec<i64>| {
        alive[v] = false;
        for &t in &out_edges[v] {
            in_degree[t] -= 1;
        }
        for &s in &in_edges[v] {
            out_degree[s] -= 1;
        }
    };

    while remaining > 0 {
        // lowest index first keeps the result deterministic
        while let Some(v) = (0..node_count).find(|&v| alive[v] && out_degree[v] == 0) {
            remove(v, &mut alive, &mut out_degree, &mut in_degree);
            back.push(v);
            remaining -= 1;
        }
        while let Some(v) = (0..node_count).find(|&v| alive[v] && in_degree[v] == 0) {
            remove(v, &mut alive, &mut out_degree, &mut in_degree);
            front.push(v);
            remaining -= 1;
        }
        if remaining > 0 {
            let v = (0..node_count)
                .filter(|&v| alive[v])
                .max_by_key(|&v| (out_degree[v] - in_degree[v], std::cmp::Reverse(v)))
                .expect("a live vertex");
            remove(v, &mut alive, &mut out_degree, &mut in_degree);
            front.push(v);
            remaining -= 1;
        }
    }
    front.extend(back.into_iter().rev());
    front
}
