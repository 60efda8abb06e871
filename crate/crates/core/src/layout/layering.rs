use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Longest-path layering: every vertex sits one layer below its deepest
/// predecessor and sources sit in layer 0.
///
/// Fails if the graph still contains a cycle (including a self-loop).
pub fn assign_layers(node_count: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    let mut successors = vec![Vec::new(); node_count];
    let mut in_degree = vec![0usize; node_count];
    for &(s, t) in edges {
        successors[s].push(t);
        in_degree[t] += 1;
    }
    let mut layer = vec![0usize; node_count];
    let mut queue: VecDeque<usize> = (0..node_count).filter(|&v| in_degree[v] == 0).collect();
    let mut visited = 0;
    while let Some(v) = queue.pop_front() {
        visited += 1;
        for &t in &successors[v] {
            layer[t] = layer[t].max(layer[v] + 1);
            in_degree[t] -= 1;
            if in_degree[t] == 0 {
                queue.push_back(t);
            }
        }
    }
    if visited != node_count {
        return Err(Error::Domain(
            "layer assignment needs an acyclic graph".into(),
        ));
    }
    Ok(layer)
}
