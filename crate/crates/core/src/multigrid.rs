//! Graclus-style coarsening hierarchy.
//!
//! Each level contracts a matching of the previous one. Vertices are
//! visited in random order and paired with the unmatched neighbor that
//! maximizes `w(u, v) * (1 / d(u) + 1 / d(v))`, where `w` counts the fine
//! edges merged into `(u, v)` and `d` is the weighted degree. Coarse vertex
//! ids follow the smallest member id of their cluster.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::autodiff::{Matrix, RowGroups};
use crate::error::{Error, Result};
use crate::graph::AdjacencyGraph;

/// A level whose matching merges fewer than `n / STALL_FRACTION` pairs gets
/// a second pass pairing leftover vertices two hops apart.
const STALL_FRACTION: usize = 4;

/// Graphs from finest (`level 0`, the input) to coarsest, with the cluster
/// map from each level to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningHierarchy {
    graphs: Vec<AdjacencyGraph>,
    maps: Vec<Vec<usize>>,
}

impl CoarseningHierarchy {
    pub fn num_levels(&self) -> usize {
        self.graphs.len()
    }

    pub fn graph(&self, level: usize) -> &AdjacencyGraph {
        &self.graphs[level]
    }

    pub fn finest(&self) -> &AdjacencyGraph {
        &self.graphs[0]
    }

    pub fn coarsest(&self) -> &AdjacencyGraph {
        self.graphs.last().expect("at least one level")
    }

    /// Map from vertices of `level` to vertices of `level + 1`.
    pub fn cluster_map(&self, level: usize) -> &[usize] {
        &self.maps[level]
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.graphs.iter().map(AdjacencyGraph::n).collect()
    }

    /// Members of each coarse vertex of `level + 1`, ascending.
    pub fn clusters(&self, level: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.graphs[level + 1].n()];
        for (v, &c) in self.maps[level].iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    /// Row groups that copy coarse rows of `level + 1` onto the fine rows of
    /// `level`.
    pub fn prolong_groups(&self, level: usize) -> RowGroups {
        RowGroups::gather(&self.maps[level], self.graphs[level + 1].n()).expect("map in range")
    }

    /// Row groups that average fine rows of `level` into rows of `level + 1`.
    pub fn restrict_groups(&self, level: usize) -> RowGroups {
        RowGroups::new(self.clusters(level), self.graphs[level].n()).expect("map in range")
    }

    /// Piecewise-constant interpolation from `level + 1` to `level`.
    pub fn prolong(&self, coarse: &Matrix, level: usize) -> Result<Matrix> {
        self.check_level(level)?;
        self.prolong_groups(level).apply(coarse)
    }

    /// Cluster means from `level` to `level + 1`.
    pub fn restrict(&self, fine: &Matrix, level: usize) -> Result<Matrix> {
        self.check_level(level)?;
        self.restrict_groups(level).apply(fine)
    }

    /// Same hierarchy with the finest vertices renamed `v -> new_label[v]`.
    /// Coarse levels keep their ids.
    pub fn relabeled(&self, new_label: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        out.graphs[0] = self.graphs[0].relabeled(new_label)?;
        if let Some(map) = self.maps.first() {
            let mut fresh = vec![0; map.len()];
            for (v, &c) in map.iter().enumerate() {
                fresh[new_label[v]] = c;
            }
            out.maps[0] = fresh;
        }
        Ok(out)
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level + 1 >= self.graphs.len() {
            return Err(Error::invalid(format!(
                "level {level} has no coarser level (hierarchy has {})",
                self.graphs.len()
            )));
        }
        Ok(())
    }
}

/// Builds the hierarchy, contracting until at most two vertices remain.
/// An input with `n >= 2` ends with exactly two coarse vertices.
pub fn coarsen<R: Rng + ?Sized>(graph: &AdjacencyGraph, rng: &mut R) -> Result<CoarseningHierarchy> {
    if graph.n() == 0 {
        return Err(Error::invalid("cannot coarsen an empty graph"));
    }
    let mut weights: Vec<BTreeMap<usize, f64>> = (0..graph.n())
        .map(|v| graph.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
        .collect();
    let mut graphs = vec![graph.clone()];
    let mut maps = Vec::new();
    while weights.len() > 2 {
        let mate = match_level(&weights, rng);
        let (map, coarse_n) = number_clusters(&mate);
        let mut coarse: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); coarse_n];
        for (u, nbrs) in weights.iter().enumerate() {
            for (&v, &w) in nbrs {
                let (cu, cv) = (map[u], map[v]);
                if cu != cv {
                    *coarse[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        let g = AdjacencyGraph::from_edges(
            coarse_n,
            coarse.iter().enumerate().flat_map(|(u, m)| m.keys().filter(move |&&v| u < v).map(move |&v| (u, v))),
        )?;
        graphs.push(g);
        maps.push(map);
        weights = coarse;
    }
    Ok(CoarseningHierarchy { graphs, maps })
}

/// Partner of each vertex (itself when unmatched). Always merges at least one
/// pair when `n >= 3`.
fn match_level<R: Rng + ?Sized>(weights: &[BTreeMap<usize, f64>], rng: &mut R) -> Vec<usize> {
    let n = weights.len();
    let degree: Vec<f64> = weights.iter().map(|m| m.values().sum()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut mate: Vec<usize> = (0..n).collect();
    let mut merged = 0;
    for &u in &order {
        if mate[u] != u {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for (&v, &w) in &weights[u] {
            if mate[v] != v {
                continue;
            }
            let score = w * (1.0 / degree[u] + 1.0 / degree[v]);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, v));
            }
        }
        if let Some((_, v)) = best {
            mate[u] = v;
            mate[v] = u;
            merged += 1;
        }
    }

    if merged * STALL_FRACTION < n {
        // star-like levels: pair leftovers that share a neighbor
        for &u in &order {
            if mate[u] != u {
                continue;
            }
            let partner = weights[u]
                .keys()
                .flat_map(|&w| weights[w].keys())
                .copied()
                .find(|&x| x != u && mate[x] == x);
            if let Some(x) = partner {
                mate[u] = x;
                mate[x] = u;
                merged += 1;
            }
        }
        // isolated leftovers, including whole components already contracted
        let mut pending: Option<usize> = None;
        for u in 0..n {
            if mate[u] != u || !weights[u].is_empty() {
                continue;
            }
            match pending.take() {
                Some(p) => {
                    mate[p] = u;
                    mate[u] = p;
                    merged += 1;
                }
                None => pending = Some(u),
            }
        }
    }

    if merged == 0 {
        // nothing contracted: merge consecutive ids
        for u in (0..n - 1).step_by(2) {
            mate[u] = u + 1;
            mate[u + 1] = u;
        }
    }
    mate
}

/// Coarse id per vertex, numbering clusters by their smallest member.
fn number_clusters(mate: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; mate.len()];
    let mut next = 0;
    for v in 0..mate.len() {
        if map[v] == usize::MAX {
            map[v] = next;
            map[mate[v]] = next;
            next += 1;
        }
    }
    (map, next)
}

/// Row-group operators of a hierarchy, shared across forward passes.
#[derive(Debug, Clone)]
pub struct LevelOperators {
    /// Neighbor lists per level.
    pub neighbors: Vec<Arc<RowGroups>>,
    /// `prolong[l]` maps level `l + 1` rows to level `l`.
    pub prolong: Vec<Arc<RowGroups>>,
    /// `restrict[l]` maps level `l` rows to level `l + 1`.
    pub restrict: Vec<Arc<RowGroups>>,
}

impl LevelOperators {
    pub fn new(hierarchy: &CoarseningHierarchy) -> Self {
        let levels = hierarchy.num_levels();
        Self {
            neighbors: (0..levels)
                .map(|l| Arc::new(crate::autodiff::neighbor_groups(hierarchy.graph(l))))
                .collect(),
            prolong: (0..levels - 1).map(|l| Arc::new(hierarchy.prolong_groups(l))).collect(),
            restrict: (0..levels - 1).map(|l| Arc::new(hierarchy.restrict_groups(l))).collect(),
        }
    }
}
