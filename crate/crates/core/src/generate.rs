//! Small graph families used by tests, the verifier and training sets.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{AdjacencyGraph, Ordering};

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> AdjacencyGraph {
    AdjacencyGraph::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("in range")
}

/// Star with center `0` and `leaves` leaves.
pub fn star(leaves: usize) -> AdjacencyGraph {
    AdjacencyGraph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("in range")
}

pub fn complete(n: usize) -> AdjacencyGraph {
    AdjacencyGraph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
        .expect("in range")
}

/// 5-point grid with row-major labels: vertex `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> AdjacencyGraph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    AdjacencyGraph::from_edges(rows * cols, edges).expect("in range")
}

/// Square grid where each cell receives one diagonal with probability 1/2,
/// in a random direction. Labels are row-major.
pub fn triangulated_grid<R: Rng + ?Sized>(side: usize, rng: &mut R) -> AdjacencyGraph {
    let base = grid(side, side);
    let id = |r: usize, c: usize| r * side + c;
    let mut edges: Vec<(usize, usize)> = base.edges().collect();
    for r in 0..side.saturating_sub(1) {
        for c in 0..side.saturating_sub(1) {
            if rng.gen_bool(0.5) {
                if rng.gen_bool(0.5) {
                    edges.push((id(r, c), id(r + 1, c + 1)));
                } else {
                    edges.push((id(r, c + 1), id(r + 1, c)));
                }
            }
        }
    }
    AdjacencyGraph::from_edges(side * side, edges).expect("in range")
}

/// G(n, p) random graph.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> AdjacencyGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    AdjacencyGraph::from_edges(n, edges).expect("in range")
}

/// Uniformly random elimination ordering.
pub fn random_ordering<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Ordering {
    let mut seq: Vec<usize> = (0..n).collect();
    seq.shuffle(rng);
    Ordering::from_elim_seq(seq).expect("shuffle of a permutation")
}

/// Applies a uniformly random relabeling. Returns the graph and the map
/// `old -> new`.
pub fn shuffled<R: Rng + ?Sized>(graph: &AdjacencyGraph, rng: &mut R) -> (AdjacencyGraph, Vec<usize>) {
    let mut label: Vec<usize> = (0..graph.n()).collect();
    label.shuffle(rng);
    let g = graph.relabeled(&label).expect("shuffle of a permutation");
    (g, label)
}

/// Leaf-first (perfect) elimination ordering of a forest: repeatedly
/// eliminates the smallest-id vertex of degree at most one. Returns `None`
/// when the graph has a cycle.
pub fn leaf_first_ordering(graph: &AdjacencyGraph) -> Option<Ordering> {
    let n = graph.n();
    let mut degree: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let mut done = vec![false; n];
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..n).filter(|&v| degree[v] <= 1).map(std::cmp::Reverse).collect();
    let mut seq = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(v)) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        seq.push(v);
        for &w in graph.neighbors(v) {
            if !done[w] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    heap.push(std::cmp::Reverse(w));
                }
            }
        }
    }
    (seq.len() == n).then(|| Ordering::from_elim_seq(seq).expect("each vertex once"))
}
