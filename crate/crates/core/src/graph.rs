//! Adjacency graphs of symmetric patterns, elimination orderings and the
//! breadth-first routines shared by the ordering heuristics.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::matrix_io::SparseSymmetricPattern;

/// Undirected graph of a symmetric matrix: vertex `i` is row/column `i`,
/// edges are the off-diagonal structural nonzeros.
///
/// Neighbor lists are sorted, without self-loops or duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl AdjacencyGraph {
    pub fn from_pattern(pattern: &SparseSymmetricPattern) -> Self {
        Self::from_edges(pattern.n(), pattern.off_diagonal())
            .expect("pattern indices are in range")
    }

    /// Builds a graph from an edge list. Self-loops are dropped and repeated
    /// edges merged.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut m = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            m += list.len();
        }
        Ok(Self { adj, m: m / 2 })
    }

    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], m: 0 }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Undirected edge count.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Pattern of `A` with a full diagonal.
    pub fn to_pattern(&self) -> SparseSymmetricPattern {
        let n = self.n();
        SparseSymmetricPattern::from_entries(n, (0..n).map(|i| (i, i)).chain(self.edges()))
            .expect("graph vertices are in range")
    }

    /// Relabels vertex `v` as `new_label[v]`.
    pub fn relabeled(&self, new_label: &[usize]) -> Result<Self> {
        check_permutation(new_label, self.n())?;
        Self::from_edges(self.n(), self.edges().map(|(u, v)| (new_label[u], new_label[v])))
    }

    /// Subgraph induced by `vertices`. Vertex `t` of the result is
    /// `vertices[t]` of `self`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n()];
        for (t, &v) in vertices.iter().enumerate() {
            local[v] = t;
        }
        let mut m = 0;
        let adj: Vec<Vec<usize>> = vertices
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adj[v]
                    .iter()
                    .filter_map(|&w| (local[w] != usize::MAX).then_some(local[w]))
                    .collect();
                list.sort_unstable();
                m += list.len();
                list
            })
            .collect();
        Self { adj, m: m / 2 }
    }
}

fn check_permutation(seq: &[usize], n: usize) -> Result<()> {
    if seq.len() != n {
        return Err(Error::InvalidOrdering(format!(
            "length {} does not match vertex count {n}",
            seq.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in seq {
        if v >= n {
            return Err(Error::InvalidOrdering(format!("vertex {v} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidOrdering(format!("vertex {v} appears twice")));
        }
    }
    Ok(())
}

/// An elimination ordering: `elim_seq[t]` is the vertex eliminated at step
/// `t`, and `rank[v]` is the step at which `v` is eliminated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    elim_seq: Vec<usize>,
    rank: Vec<usize>,
}

impl Ordering {
    pub fn from_elim_seq(elim_seq: Vec<usize>) -> Result<Self> {
        check_permutation(&elim_seq, elim_seq.len())?;
        let mut rank = vec![0; elim_seq.len()];
        for (t, &v) in elim_seq.iter().enumerate() {
            rank[v] = t;
        }
        Ok(Self { elim_seq, rank })
    }

    pub fn from_ranks(rank: Vec<usize>) -> Result<Self> {
        check_permutation(&rank, rank.len())?;
        let mut elim_seq = vec![0; rank.len()];
        for (v, &t) in rank.iter().enumerate() {
            elim_seq[t] = v;
        }
        Ok(Self { elim_seq, rank })
    }

    pub fn identity(n: usize) -> Self {
        Self { elim_seq: (0..n).collect(), rank: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.elim_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elim_seq.is_empty()
    }

    pub fn elim_seq(&self) -> &[usize] {
        &self.elim_seq
    }

    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    pub fn reversed(&self) -> Self {
        let seq: Vec<usize> = self.elim_seq.iter().rev().copied().collect();
        Self::from_elim_seq(seq).expect("reversal of a permutation")
    }

    /// The same ordering expressed on a relabeled graph, where vertex `v`
    /// became `new_label[v]`.
    pub fn relabeled(&self, new_label: &[usize]) -> Result<Self> {
        check_permutation(new_label, self.len())?;
        Self::from_elim_seq(self.elim_seq.iter().map(|&v| new_label[v]).collect())
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::InvalidOrdering(format!(
                "ordering has {} entries but the graph has {n} vertices",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Component id per vertex, numbered from 0 in order of each component's
/// smallest vertex. Returns the ids and the number of components.
pub fn connected_components(graph: &AdjacencyGraph) -> (Vec<usize>, usize) {
    let n = graph.n();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = count;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in graph.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}

/// Vertex lists of each component, in component-id order.
pub fn component_members(graph: &AdjacencyGraph) -> Vec<Vec<usize>> {
    let (comp, count) = connected_components(graph);
    let mut members = vec![Vec::new(); count];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    members
}

/// Hop distance from `root`; `None` for vertices in other components.
pub fn bfs_levels(graph: &AdjacencyGraph, root: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; graph.n()];
    let mut queue = VecDeque::new();
    level[root] = Some(0);
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        let next = level[v].map(|l| l + 1);
        for &w in graph.neighbors(v) {
            if level[w].is_none() {
                level[w] = next;
                queue.push_back(w);
            }
        }
    }
    level
}

/// Iterated-BFS search for a vertex of large eccentricity in the component
/// of `start`.
///
/// From the current candidate, move to a minimum-degree vertex of the last
/// BFS level (smallest id on ties) as long as the eccentricity grows.
pub fn pseudo_peripheral_vertex(graph: &AdjacencyGraph, start: usize) -> usize {
    let mut current = start;
    let mut levels = bfs_levels(graph, current);
    let mut ecc = levels.iter().flatten().copied().max().unwrap_or(0);
    loop {
        let candidate = levels
            .iter()
            .enumerate()
            .filter(|&(_, l)| *l == Some(ecc))
            .map(|(v, _)| v)
            .min_by_key(|&v| (graph.degree(v), v))
            .unwrap_or(current);
        if candidate == current {
            return current;
        }
        let cand_levels = bfs_levels(graph, candidate);
        let cand_ecc = cand_levels.iter().flatten().copied().max().unwrap_or(0);
        if cand_ecc <= ecc {
            return current;
        }
        current = candidate;
        levels = cand_levels;
        ecc = cand_ecc;
    }
}
