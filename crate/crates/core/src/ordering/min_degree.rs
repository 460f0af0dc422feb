//! Exact minimum degree on the evolving elimination graph.

use std::collections::BTreeSet;

use crate::graph::{AdjacencyGraph, Ordering};

/// Repeatedly eliminates a vertex of smallest current degree, smallest id
/// first on ties, and joins its remaining neighbors into a clique.
pub fn minimum_degree(graph: &AdjacencyGraph) -> Ordering {
    let n = graph.n();
    let mut adj: Vec<BTreeSet<usize>> =
        (0..n).map(|v| graph.neighbors(v).iter().copied().collect()).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut seq = Vec::with_capacity(n);

    while let Some((_, v)) = queue.pop_first() {
        seq.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &w in &nbrs {
            queue.remove(&(adj[w].len(), w));
            adj[w].remove(&v);
        }
        for (a, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[a + 1..] {
                if adj[x].insert(y) {
                    adj[y].insert(x);
                }
            }
        }
        for &w in &nbrs {
            queue.insert((adj[w].len(), w));
        }
    }
    Ordering::from_elim_seq(seq).expect("each vertex eliminated once")
}
