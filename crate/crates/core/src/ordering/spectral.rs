//! Fiedler vectors of graph Laplacians.
//!
//! Each connected component is handled on its own. The solver is Lanczos
//! with full reorthogonalization against the Krylov basis and the constant
//! vector, restarted from the current Ritz vector until the residual
//! `‖Lx - λx‖₂` drops below tolerance. The small tridiagonal problems are
//! solved with implicit QL.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{component_members, AdjacencyGraph, Ordering};

/// Residual target for each component's eigenpair.
pub const FIEDLER_TOLERANCE: f64 = 1e-9;

const MAX_KRYLOV: usize = 200;
const MAX_RESTARTS: usize = 200;

/// Fiedler vector of a graph, computed per connected component.
///
/// Each component block has unit norm and sums to zero; components with a
/// single vertex get a zero entry.
#[derive(Debug, Clone)]
pub struct FiedlerVector {
    pub values: Vec<f64>,
    /// Algebraic connectivity of each component, in component-id order
    /// (zero for single-vertex components).
    pub component_eigenvalues: Vec<f64>,
    /// Final residual `‖Lx - λx‖₂` of each component.
    pub component_residuals: Vec<f64>,
}

impl FiedlerVector {
    /// Smallest nonzero Laplacian eigenvalue over components with at least
    /// two vertices; zero when there are none.
    pub fn eigenvalue(&self) -> f64 {
        self.component_eigenvalues
            .iter()
            .copied()
            .filter(|&l| l > 0.0)
            .reduce(f64::min)
            .unwrap_or(0.0)
    }
}

/// `y = L x` for the combinatorial Laplacian `L = D - A`.
pub fn laplacian_apply(graph: &AdjacencyGraph, x: &[f64], y: &mut [f64]) {
    for v in 0..graph.n() {
        let nb = graph.neighbors(v);
        let s: f64 = nb.iter().map(|&w| x[w]).sum();
        y[v] = nb.len() as f64 * x[v] - s;
    }
}

/// `xᵀ L x`.
pub fn rayleigh_quotient(graph: &AdjacencyGraph, x: &[f64]) -> f64 {
    graph.edges().map(|(u, v)| (x[u] - x[v]).powi(2)).sum()
}

pub fn fiedler_vector(graph: &AdjacencyGraph) -> FiedlerVector {
    let n = graph.n();
    let mut values = vec![0.0; n];
    let mut eigenvalues = Vec::new();
    let mut residuals = Vec::new();
    for members in component_members(graph) {
        if members.len() < 2 {
            eigenvalues.push(0.0);
            residuals.push(0.0);
            continue;
        }
        let sub = graph.induced_subgraph(&members);
        let (lambda, x, res) = connected_fiedler(&sub);
        for (t, &v) in members.iter().enumerate() {
            values[v] = x[t];
        }
        eigenvalues.push(lambda);
        residuals.push(res);
    }
    FiedlerVector { values, component_eigenvalues: eigenvalues, component_residuals: residuals }
}

/// Vertices sorted by Fiedler entry (ties by id), one component after
/// another in component-id order.
pub fn fiedler_ordering(graph: &AdjacencyGraph) -> Ordering {
    let f = fiedler_vector(graph);
    let mut seq = Vec::with_capacity(graph.n());
    for mut members in component_members(graph) {
        members.sort_by(|&a, &b| f.values[a].total_cmp(&f.values[b]).then(a.cmp(&b)));
        seq.extend(members);
    }
    Ordering::from_elim_seq(seq).expect("components partition the vertices")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Orthogonalizes `x` against the constant vector and `basis` (twice, for
/// stability), returning the remaining norm.
fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        remove_mean(x);
        for q in basis {
            let c = dot(x, q);
            x.iter_mut().zip(q).for_each(|(v, qv)| *v -= c * qv);
        }
    }
    norm(x)
}

/// Returns `(λ₂, unit eigenvector, residual)` for a connected graph with at
/// least two vertices.
fn connected_fiedler(graph: &AdjacencyGraph) -> (f64, Vec<f64>, f64) {
    let n = graph.n();
    if n == 2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        return (2.0, vec![s, -s], 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f1ed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nx = orthogonalize(&mut x, &[]);
    x.iter_mut().for_each(|v| *v /= nx);

    let scale = (0..n).map(|v| 2.0 * graph.degree(v) as f64).fold(1.0, f64::max);
    let tol = FIEDLER_TOLERANCE * scale;
    let max_k = (n - 1).min(MAX_KRYLOV);
    let mut best = (f64::INFINITY, x.clone(), f64::INFINITY);
    let mut y = vec![0.0; n];

    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_k);
        let mut alpha = Vec::with_capacity(max_k);
        let mut beta: Vec<f64> = Vec::with_capacity(max_k);
        let mut q = x.clone();
        for k in 0..max_k {
            laplacian_apply(graph, &q, &mut y);
            let a = dot(&q, &y);
            alpha.push(a);
            basis.push(q.clone());
            if k + 1 == max_k {
                break;
            }
            let mut r = y.clone();
            let b = orthogonalize(&mut r, &basis);
            if b <= 1e-12 * scale {
                // invariant subspace: continue with a fresh direction
                let mut fresh: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
                let nf = orthogonalize(&mut fresh, &basis);
                if nf <= 1e-12 {
                    break;
                }
                fresh.iter_mut().for_each(|v| *v /= nf);
                beta.push(0.0);
                q = fresh;
            } else {
                r.iter_mut().for_each(|v| *v /= b);
                beta.push(b);
                q = r;
            }
        }
        let k = alpha.len();
        let (evals, evecs) = tridiagonal_eigen(&alpha, &beta[..k - 1]);
        let idx = (0..k).min_by(|&a, &b| evals[a].total_cmp(&evals[b])).expect("k >= 1");
        let mut ritz = vec![0.0; n];
        for (j, qj) in basis.iter().enumerate() {
            let c = evecs[j * k + idx];
            ritz.iter_mut().zip(qj).for_each(|(v, qv)| *v += c * qv);
        }
        let nr = orthogonalize(&mut ritz, &[]);
        ritz.iter_mut().for_each(|v| *v /= nr);
        laplacian_apply(graph, &ritz, &mut y);
        let lambda = dot(&ritz, &y);
        let res = norm(&y.iter().zip(&ritz).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        if res < best.2 {
            best = (lambda, ritz.clone(), res);
        }
        if res <= tol {
            break;
        }
        x = ritz;
    }
    let (lambda, mut vec, res) = best;
    fix_sign(&mut vec);
    (lambda, vec, res)
}

/// Makes the first entry of non-negligible magnitude positive.
pub(crate) fn fix_sign(x: &mut [f64]) {
    let mx = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * mx) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`) by implicit
/// QL with Wilkinson shifts. Returns eigenvalues and the eigenvectors as a
/// row-major `k x k` matrix whose column `i` belongs to eigenvalue `i`.
pub(crate) fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zk1 = z[k * n + i + 1];
                    let zk = z[k * n + i];
                    z[k * n + i + 1] = s * zk + c * zk1;
                    z[k * n + i] = c * zk - s * zk1;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    (d, z)
}
