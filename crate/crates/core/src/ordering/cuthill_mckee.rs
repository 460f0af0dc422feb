//! Cuthill–McKee and reverse Cuthill–McKee.

use std::collections::VecDeque;

use crate::graph::{component_members, pseudo_peripheral_vertex, AdjacencyGraph, Ordering};

/// Breadth-first ordering from a pseudo-peripheral vertex of each component,
/// visiting unvisited neighbors in ascending degree (then id) order.
/// Components are processed in component-id order.
pub fn cuthill_mckee(graph: &AdjacencyGraph) -> Ordering {
    let n = graph.n();
    let mut visited = vec![false; n];
    let mut seq = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs = Vec::new();
    for members in component_members(graph) {
        let root = pseudo_peripheral_vertex(graph, members[0]);
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            seq.push(v);
            nbrs.clear();
            nbrs.extend(graph.neighbors(v).iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (graph.degree(w), w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    Ordering::from_elim_seq(seq).expect("BFS visits every vertex once")
}

pub fn reverse_cuthill_mckee(graph: &AdjacencyGraph) -> Ordering {
    cuthill_mckee(graph).reversed()
}
