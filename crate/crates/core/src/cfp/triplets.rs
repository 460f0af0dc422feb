//! Path-first triplet sampling.
//!
//! A triplet `(i, k, j)` is drawn from a self-avoiding random walk: `i` and
//! `j` are two walk vertices at least two hops apart that are not adjacent
//! in the graph, and `k` lies strictly between them on the walk. The walk
//! segment from `i` to `j` is kept as the witness path.

use rand::Rng;

use crate::graph::{connected_components, AdjacencyGraph};

/// Interior vertex `k` on a witnessed path between non-adjacent `i` and `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub i: usize,
    pub k: usize,
    pub j: usize,
    /// Simple path from `i` to `j` through `k`.
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Maximum number of hops in a walk.
    pub walk_cap: usize,
    /// Walks attempted per triplet before giving up on it.
    pub retries: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { walk_cap: 8, retries: 16 }
    }
}

/// Triplets drawn per vertex during training.
pub const DEFAULT_TRIPLETS_PER_VERTEX: usize = 10;

/// Samples up to `count` triplets. Returns fewer only when walks keep
/// failing; a graph whose components are all cliques yields none.
pub fn sample_triplets<R: Rng + ?Sized>(
    graph: &AdjacencyGraph,
    count: usize,
    config: SamplerConfig,
    rng: &mut R,
) -> Vec<Triplet> {
    let starts = non_clique_vertices(graph);
    let mut out = Vec::with_capacity(count);
    if starts.is_empty() || config.walk_cap < 2 {
        return out;
    }
    let mut on_walk = vec![false; graph.n()];
    let mut walk = Vec::with_capacity(config.walk_cap + 1);
    for _ in 0..count {
        for _ in 0..config.retries.max(1) {
            random_walk(graph, starts[rng.gen_range(0..starts.len())], config.walk_cap, rng, &mut walk, &mut on_walk);
            if let Some(t) = pick(graph, &walk, rng) {
                out.push(t);
                break;
            }
        }
    }
    out
}

fn random_walk<R: Rng + ?Sized>(
    graph: &AdjacencyGraph,
    start: usize,
    cap: usize,
    rng: &mut R,
    walk: &mut Vec<usize>,
    on_walk: &mut [bool],
) {
    for &v in walk.iter() {
        on_walk[v] = false;
    }
    walk.clear();
    walk.push(start);
    on_walk[start] = true;
    let mut open = Vec::new();
    while walk.len() <= cap {
        let last = *walk.last().expect("nonempty");
        open.clear();
        open.extend(graph.neighbors(last).iter().copied().filter(|&w| !on_walk[w]));
        if open.is_empty() {
            break;
        }
        let next = open[rng.gen_range(0..open.len())];
        on_walk[next] = true;
        walk.push(next);
    }
}

fn pick<R: Rng + ?Sized>(graph: &AdjacencyGraph, walk: &[usize], rng: &mut R) -> Option<Triplet> {
    let mut pairs = Vec::new();
    for a in 0..walk.len() {
        for b in a + 2..walk.len() {
            if !graph.has_edge(walk[a], walk[b]) {
                pairs.push((a, b));
            }
        }
    }
    if pairs.is_empty() {
        return None;
    }
    let (a, b) = pairs[rng.gen_range(0..pairs.len())];
    let k = walk[rng.gen_range(a + 1..b)];
    let mut witness = walk[a..=b].to_vec();
    if rng.gen_bool(0.5) {
        witness.reverse();
    }
    Some(Triplet { i: witness[0], k, j: *witness.last().expect("two or more"), witness })
}

/// Vertices in components that are not cliques, i.e. that contain some
/// non-adjacent connected pair.
fn non_clique_vertices(graph: &AdjacencyGraph) -> Vec<usize> {
    let (comp, count) = connected_components(graph);
    let mut size = vec![0usize; count];
    let mut degree_sum = vec![0usize; count];
    for v in 0..graph.n() {
        size[comp[v]] += 1;
        degree_sum[comp[v]] += graph.degree(v);
    }
    (0..graph.n())
        .filter(|&v| {
            let c = comp[v];
            degree_sum[c] < size[c] * (size[c] - 1)
        })
        .collect()
}

/// Independent eligibility check: `i`, `k`, `j` distinct, `(i, j)` not an
/// edge, and the witness a simple `i`–`j` path holding `k` strictly inside.
pub fn is_eligible(graph: &AdjacencyGraph, t: &Triplet) -> bool {
    let w = &t.witness;
    let n = graph.n();
    if t.i >= n || t.j >= n || t.k >= n || t.i == t.j || t.i == t.k || t.j == t.k {
        return false;
    }
    if graph.has_edge(t.i, t.j) || w.len() < 3 || w[0] != t.i || w[w.len() - 1] != t.j {
        return false;
    }
    let mut seen = std::collections::HashSet::new();
    if !w.iter().all(|&v| v < n && seen.insert(v)) {
        return false;
    }
    w.windows(2).all(|e| graph.has_edge(e[0], e[1])) && w[1..w.len() - 1].contains(&t.k)
}
