//! Exact fill analysis.
//!
//! [`eliminate`] plays the elimination game: removing a vertex joins all of
//! its remaining neighbors into a clique, and every edge added that way is a
//! fill edge. [`fill_path_exists`] answers the same question pairwise from
//! the original graph alone: `(i, j)` fills exactly when some `i`–`j` path
//! has all of its interior vertices eliminated before both endpoints. The two
//! are independent routes to the same fill set and are cross-checked in the
//! test suite.

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::{AdjacencyGraph, Ordering};
use crate::matrix_io::SparseSymmetricPattern;

/// Result of a symbolic factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillReport {
    pub n: usize,
    /// New edges `(u, v)`, `u < v`, sorted.
    pub fill_edges: Vec<(usize, usize)>,
    /// Original edges plus fill edges, sorted.
    pub factor_edges: Vec<(usize, usize)>,
    /// `nnz(L + U - I)` = `n + 2 |factor_edges|`.
    pub nnz_factor_full: usize,
    /// Update flops, `sum_t d_t (d_t + 3) / 2` over elimination steps, where
    /// `d_t` is the degree of the eliminated vertex in the reduced graph.
    /// Square roots are not included; there are always `n` of them.
    pub flops: u64,
    /// Degree of each eliminated vertex in the reduced graph, by step.
    pub step_degrees: Vec<usize>,
}

impl FillReport {
    pub fn fill_count(&self) -> usize {
        self.fill_edges.len()
    }

    pub fn sqrt_count(&self) -> usize {
        self.n
    }
}

/// Runs the elimination game for `ordering` on `graph`.
pub fn eliminate(graph: &AdjacencyGraph, ordering: &Ordering) -> Result<FillReport> {
    let n = graph.n();
    ordering.check_len(n)?;

    let mut adj: Vec<BTreeSet<usize>> =
        (0..n).map(|v| graph.neighbors(v).iter().copied().collect()).collect();
    let mut fill = Vec::new();
    let mut flops = 0u64;
    let mut step_degrees = Vec::with_capacity(n);

    for &v in ordering.elim_seq() {
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &w in &nbrs {
            adj[w].remove(&v);
        }
        for (a, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[a + 1..] {
                if adj[x].insert(y) {
                    adj[y].insert(x);
                    fill.push((x.min(y), x.max(y)));
                }
            }
        }
        let d = nbrs.len() as u64;
        flops += d * (d + 3) / 2;
        step_degrees.push(nbrs.len());
    }

    fill.sort_unstable();
    let mut factor_edges: Vec<(usize, usize)> = graph.edges().chain(fill.iter().copied()).collect();
    factor_edges.sort_unstable();
    let nnz_factor_full = n + 2 * factor_edges.len();
    Ok(FillReport { n, fill_edges: fill, factor_edges, nnz_factor_full, flops, step_degrees })
}

/// Whether a fill path joins `i` and `j`: a path whose interior vertices all
/// rank strictly below both endpoints. An edge `(i, j)` is the degenerate
/// path with no interior.
pub fn fill_path_exists(
    graph: &AdjacencyGraph,
    ordering: &Ordering,
    i: usize,
    j: usize,
) -> Result<bool> {
    let n = graph.n();
    ordering.check_len(n)?;
    if i == j || i >= n || j >= n {
        return Err(Error::invalid(format!("need two distinct vertices, got ({i}, {j})")));
    }
    let rank = ordering.rank();
    let limit = rank[i].min(rank[j]);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[i] = true;
    queue.push_back(i);
    while let Some(v) = queue.pop_front() {
        for &w in graph.neighbors(v) {
            if w == j {
                return Ok(true);
            }
            if !seen[w] && rank[w] < limit {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    Ok(false)
}

/// Fill set computed pair by pair from [`fill_path_exists`]. Quadratic in
/// `n` times a BFS; meant as an oracle for graphs of a few hundred vertices.
pub fn fill_set_via_paths(graph: &AdjacencyGraph, ordering: &Ordering) -> Result<Vec<(usize, usize)>> {
    let n = graph.n();
    ordering.check_len(n)?;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !graph.has_edge(i, j) && fill_path_exists(graph, ordering, i, j)? {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Fill-in ratio `(nnz(L + U - I) - nnz(A)) / nnz(A)`.
pub fn fill_in_ratio(report: &FillReport, pattern: &SparseSymmetricPattern) -> Result<f64> {
    if report.n != pattern.n() {
        return Err(Error::shape(format!(
            "report is for n = {}, pattern has n = {}",
            report.n,
            pattern.n()
        )));
    }
    let nnz = pattern.nnz_full();
    if nnz == 0 {
        return Err(Error::invalid("fill-in ratio undefined for a matrix without nonzeros"));
    }
    Ok((report.nnz_factor_full as f64 - nnz as f64) / nnz as f64)
}

pub fn cholesky_flops(report: &FillReport) -> u64 {
    report.flops
}

/// Largest `|rank(u) - rank(v)|` over the edges of `graph`.
pub fn bandwidth(graph: &AdjacencyGraph, ordering: &Ordering) -> usize {
    let rank = ordering.rank();
    graph.edges().map(|(u, v)| rank[u].abs_diff(rank[v])).max().unwrap_or(0)
}

/// Values of `L + I` for the graph Laplacian `L` of the pattern, aligned with
/// `pattern.entries()`. Symmetric positive definite for every pattern.
pub fn laplacian_plus_identity(pattern: &SparseSymmetricPattern) -> Vec<f64> {
    let mut degree = vec![0usize; pattern.n()];
    for (i, j) in pattern.off_diagonal() {
        degree[i] += 1;
        degree[j] += 1;
    }
    pattern
        .entries()
        .iter()
        .map(|&(i, j)| if i == j { degree[i] as f64 + 1.0 } else { -1.0 })
        .collect()
}

/// Sparse Cholesky factor of `P A Pᵀ`, stored by columns in permuted labels.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    col_ptr: Vec<usize>,
    /// Row indices per column; the diagonal comes first.
    row_idx: Vec<usize>,
    values: Vec<f64>,
    /// Wall time of the symbolic and numeric phases together.
    pub elapsed: Duration,
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `(row, value)` pairs of column `k`, diagonal first.
    pub fn column(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[k]..self.col_ptr[k + 1];
        self.row_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Stored entries, including those that happen to be exactly zero.
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Positions `(row, col)`, `row > col`, holding a nonzero value.
    pub fn strict_lower_nonzeros(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|k| self.column(k).filter(move |&(r, x)| r != k && x != 0.0).map(move |(r, _)| (r, k)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Dense copy of `L`, row-major. Test and example use only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for k in 0..self.n {
            for (r, x) in self.column(k) {
                dense[r][k] = x;
            }
        }
        dense
    }
}

/// Numeric Cholesky factorization of the reordered matrix, restricted to the
/// symbolic factor pattern.
///
/// `values` are aligned with `pattern.entries()`; missing diagonal entries
/// are read as zero and will fail the positivity check.
pub fn numeric_cholesky(
    pattern: &SparseSymmetricPattern,
    values: &[f64],
    ordering: &Ordering,
) -> Result<CholeskyFactor> {
    let n = pattern.n();
    ordering.check_len(n)?;
    if values.len() != pattern.entries().len() {
        return Err(Error::shape(format!(
            "{} values for {} pattern entries",
            values.len(),
            pattern.entries().len()
        )));
    }
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("matrix value {x}")));
    }
    let start = Instant::now();
    let rank = ordering.rank();

    // symbolic phase: column structure of L in permuted labels
    let graph = AdjacencyGraph::from_pattern(pattern);
    let report = eliminate(&graph, ordering)?;
    let mut cols: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
    for &(u, v) in &report.factor_edges {
        let (a, b) = (rank[u].min(rank[v]), rank[u].max(rank[v]));
        cols[a].push(b);
    }
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0);
    let mut row_idx = Vec::with_capacity(n + 2 * report.factor_edges.len());
    for col in &mut cols {
        col[1..].sort_unstable();
        row_idx.extend_from_slice(col);
        col_ptr.push(row_idx.len());
    }
    drop(cols);
    // row structure: for each row j, the columns k < j with L[j][k] stored,
    // together with the position of that entry inside column k
    let mut row_cols: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for k in 0..n {
        for p in col_ptr[k] + 1..col_ptr[k + 1] {
            row_cols[row_idx[p]].push((k, p));
        }
    }

    // lower triangle of P A Pᵀ by column
    let mut a_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &x) in pattern.entries().iter().zip(values) {
        let (a, b) = (rank[i].min(rank[j]), rank[i].max(rank[j]));
        a_cols[a].push((b, x));
    }

    // left-looking numeric phase with a dense accumulator
    let mut lvals = vec![0.0; row_idx.len()];
    let mut work = vec![0.0; n];
    for j in 0..n {
        for &(r, x) in &a_cols[j] {
            work[r] += x;
        }
        for &(k, pos_jk) in &row_cols[j] {
            let ljk = lvals[pos_jk];
            for p in pos_jk..col_ptr[k + 1] {
                work[row_idx[p]] -= lvals[p] * ljk;
            }
        }
        let pivot = work[j];
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite { step: j, pivot });
        }
        let d = pivot.sqrt();
        let range = col_ptr[j]..col_ptr[j + 1];
        lvals[range.start] = d;
        work[j] = 0.0;
        for p in range.start + 1..range.end {
            let r = row_idx[p];
            lvals[p] = work[r] / d;
            work[r] = 0.0;
        }
    }
    Ok(CholeskyFactor { n, col_ptr, row_idx, values: lvals, elapsed: start.elapsed() })
}

/// `max |P A Pᵀ - L Lᵀ|` over the factor pattern, which contains every
/// position where either side can be nonzero.
pub fn reconstruction_error(
    pattern: &SparseSymmetricPattern,
    values: &[f64],
    ordering: &Ordering,
    factor: &CholeskyFactor,
) -> f64 {
    let n = factor.n;
    let rank = ordering.rank();
    // rows of L as sorted (col, value) lists
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for k in 0..n {
        for (r, x) in factor.column(k) {
            rows[r].push((k, x));
        }
    }
    let dot = |a: &[(usize, f64)], b: &[(usize, f64)]| {
        let (mut s, mut p, mut q) = (0.0, 0, 0);
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    s += a[p].1 * b[q].1;
                    p += 1;
                    q += 1;
                }
            }
        }
        s
    };
    let mut target = std::collections::HashMap::new();
    for (&(i, j), &x) in pattern.entries().iter().zip(values) {
        let (a, b) = (rank[i].max(rank[j]), rank[i].min(rank[j]));
        *target.entry((a, b)).or_insert(0.0) += x;
    }
    let mut err: f64 = 0.0;
    for k in 0..n {
        for (r, _) in factor.column(k) {
            let llt = dot(&rows[r], &rows[k]);
            let a = target.get(&(r, k)).copied().unwrap_or(0.0);
            err = err.max((a - llt).abs());
        }
    }
    err
}
