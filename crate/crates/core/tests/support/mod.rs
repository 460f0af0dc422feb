//! Oracles shared by the integration and acceptance tests. Each one is
//! written independently of the code it checks.

#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use fillorder::autodiff::{
    gradient_check, orthonormalize, sage_layer, Activation, Matrix, RowGroups, Tape, Var,
};
use fillorder::cfp::{
    chain_loss, chain_loss_on_tape, joint_chain_loss, sample_triplets, spectral_embed, spectral_loss,
    CfpModel, GraphContext, ModelConfig, SamplerConfig, Triplet,
};
use fillorder::{AdjacencyGraph, Ordering};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree on shuffled labels plus independent extra edges.
pub fn random_connected(n: usize, p: f64, rng: &mut ChaCha8Rng) -> AdjacencyGraph {
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((label[rng.gen_range(0..v)], label[v]));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    AdjacencyGraph::from_edges(n, edges).unwrap()
}

/// Sorted Laplacian eigenvalues from a dense symmetric eigensolver.
pub fn dense_laplacian_spectrum(g: &AdjacencyGraph) -> Vec<f64> {
    let n = g.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
        l[(u, v)] -= 1.0;
        l[(v, u)] -= 1.0;
    }
    let mut ev: Vec<f64> = l.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Second-smallest Laplacian eigenvalue of a connected graph.
pub fn dense_lambda2(g: &AdjacencyGraph) -> f64 {
    dense_laplacian_spectrum(g)[1]
}

/// Triplet eligibility from an explicit edge set.
pub fn triplet_ok(edges: &HashSet<(usize, usize)>, t: &Triplet) -> Result<(), String> {
    let adj = |a: usize, b: usize| edges.contains(&(a.min(b), a.max(b)));
    let w = &t.witness;
    if t.i == t.j || t.i == t.k || t.j == t.k {
        return Err(format!("{t:?}: repeated vertex"));
    }
    if adj(t.i, t.j) {
        return Err(format!("{t:?}: endpoints adjacent"));
    }
    if w.first() != Some(&t.i) || w.last() != Some(&t.j) {
        return Err(format!("{t:?}: witness does not join the endpoints"));
    }
    if w.iter().collect::<HashSet<_>>().len() != w.len() {
        return Err(format!("{t:?}: witness repeats a vertex"));
    }
    if !w.windows(2).all(|e| adj(e[0], e[1])) {
        return Err(format!("{t:?}: witness uses a non-edge"));
    }
    if w.len() < 3 || !w[1..w.len() - 1].contains(&t.k) {
        return Err(format!("{t:?}: k is not strictly inside the witness"));
    }
    Ok(())
}

pub fn edge_set(g: &AdjacencyGraph) -> HashSet<(usize, usize)> {
    g.edges().collect()
}

/// Fill edges and update flops of dense boolean Gaussian elimination on the
/// permuted matrix, counting one flop per division and per multiply-subtract
/// pair on the lower triangle.
pub fn dense_elimination(g: &AdjacencyGraph, o: &Ordering) -> (Vec<(usize, usize)>, u64) {
    let n = g.n();
    let rank = o.rank();
    let mut nz = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        let (a, b) = (rank[u], rank[v]);
        nz[a][b] = true;
        nz[b][a] = true;
    }
    let original = nz.clone();
    let mut flops = 0u64;
    for k in 0..n {
        let below: Vec<usize> = (k + 1..n).filter(|&i| nz[i][k]).collect();
        flops += below.len() as u64;
        for (x, &i) in below.iter().enumerate() {
            for &j in &below[..=x] {
                flops += 1;
                if i != j {
                    nz[i][j] = true;
                    nz[j][i] = true;
                }
            }
        }
    }
    let seq = o.elim_seq();
    let mut fill = Vec::new();
    for a in 0..n {
        for b in 0..a {
            if nz[a][b] && !original[a][b] {
                let (u, v) = (seq[a], seq[b]);
                fill.push((u.min(v), u.max(v)));
            }
        }
    }
    fill.sort_unstable();
    (fill, flops)
}

fn uniform(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

/// Values bounded away from zero, for checks across the relu kink.
fn off_zero(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let m = uniform(rows, cols, 0.1, 1.0, rng);
    let signs: Vec<f64> = (0..rows * cols).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    Matrix::from_vec(rows, cols, m.data().iter().zip(&signs).map(|(x, s)| x * s).collect()).unwrap()
}

type Build = dyn Fn(&mut Tape, &[Var]) -> fillorder::Result<Var>;

/// Checks `build` through a random linear readout of its output.
fn check_op(inputs: Vec<Matrix>, build: &Build, rng: &mut ChaCha8Rng) -> f64 {
    let probe = {
        let mut t = Tape::new();
        let vs: Vec<Var> = inputs.iter().map(|m| t.leaf(m.clone())).collect();
        let out = build(&mut t, &vs).unwrap();
        let (r, c) = t.value(out).shape();
        uniform(r, c, -1.0, 1.0, rng)
    };
    let eval = |ps: &[Matrix], grads: bool| -> fillorder::Result<(f64, Vec<Matrix>)> {
        let mut t = Tape::new();
        let vs: Vec<Var> = ps.iter().map(|m| t.leaf(m.clone())).collect();
        let out = build(&mut t, &vs)?;
        let w = t.leaf(probe.clone());
        let s = t.dot(out, w)?;
        let g = if grads {
            let gr = t.backward(s)?;
            vs.iter().map(|&v| gr.wrt(v)).collect()
        } else {
            Vec::new()
        };
        Ok((t.scalar(s), g))
    };
    let (_, analytic) = eval(&inputs, true).unwrap();
    gradient_check(|ps| eval(ps, false).map(|r| r.0), &inputs, &analytic, 1e-5)
        .unwrap()
        .max_relative_error
}

fn groups(n_out: usize, n_src: usize, rng: &mut ChaCha8Rng) -> Arc<RowGroups> {
    let gs = (0..n_out)
        .map(|g| {
            let len = if g == 0 { 0 } else { rng.gen_range(1..=3) };
            (0..len).map(|_| rng.gen_range(0..n_src)).collect()
        })
        .collect();
    Arc::new(RowGroups::new(gs, n_src).unwrap())
}

/// Finite-difference results `(case, max relative error)` for every tape
/// primitive, both layers, both losses and the full model, on shapes drawn
/// from `seed` with graphs of at most 12 vertices.
pub fn gradient_cases(seed: u64) -> Vec<(&'static str, f64)> {
    let mut r = rng(seed);
    let rr = &mut r;
    let (a, b, c) = (rr.gen_range(1..=7), rr.gen_range(1..=7), rr.gen_range(1..=7));
    let mut out = Vec::new();
    macro_rules! case {
        ($name:expr, $inputs:expr, $build:expr) => {{
            let inputs = $inputs;
            let err = check_op(inputs, &$build, rr);
            out.push(($name, err));
        }};
    }
    case!("matmul", vec![uniform(a, b, -1.0, 1.0, rr), uniform(b, c, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| t.matmul(v[0], v[1]));
    case!("add", vec![uniform(a, b, -1.0, 1.0, rr), uniform(a, b, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| t.add(v[0], v[1]));
    case!("sub", vec![uniform(a, b, -1.0, 1.0, rr), uniform(a, b, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| t.sub(v[0], v[1]));
    case!("scale", vec![uniform(a, b, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| Ok(t.scale(v[0], -1.7)));
    case!("add_row", vec![uniform(a, b, -1.0, 1.0, rr), uniform(1, b, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| t.add_row(v[0], v[1]));
    case!("relu", vec![off_zero(a, b, rr)], |t: &mut Tape, v: &[Var]| Ok(t.relu(v[0])));
    case!("tanh", vec![uniform(a, b, -2.0, 2.0, rr)], |t: &mut Tape, v: &[Var]| Ok(t.tanh(v[0])));
    let gr = groups(a + 1, b, rr);
    case!("mean_rows", vec![uniform(b, c, -1.0, 1.0, rr)], move |t: &mut Tape, v: &[Var]| t.mean_rows(v[0], Arc::clone(&gr)));
    case!("concat_cols", vec![uniform(a, b, -1.0, 1.0, rr), uniform(a, c, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| t.concat_cols(v[0], v[1]));
    let col = rr.gen_range(0..b);
    case!("column", vec![uniform(a, b, -1.0, 1.0, rr)], move |t: &mut Tape, v: &[Var]| t.column(v[0], col));
    case!("dot", vec![uniform(a, b, -1.0, 1.0, rr), uniform(a, b, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| t.dot(v[0], v[1]));
    case!("scale_by", vec![uniform(a, b, -1.0, 1.0, rr), uniform(1, 1, -2.0, 2.0, rr)], |t: &mut Tape, v: &[Var]| t.scale_by(v[0], v[1]));
    case!("rsqrt", vec![uniform(a, b, 0.5, 2.0, rr)], |t: &mut Tape, v: &[Var]| Ok(t.rsqrt(v[0])));
    let x = uniform(a, b, -1.0, 1.0, rr);
    let y = Matrix::from_vec(a, b, x.data().iter().map(|v| if rr.gen_bool(0.5) { v + 0.3 } else { v - 0.3 }).collect()).unwrap();
    case!("max", vec![x, y], |t: &mut Tape, v: &[Var]| t.max(v[0], v[1]));
    case!("bce_with_logits", vec![uniform(a, b, -5.0, 5.0, rr)], |t: &mut Tape, v: &[Var]| Ok(t.bce_with_logits(v[0])));
    case!("mean_all", vec![uniform(a, b, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| Ok(t.mean_all(v[0])));
    case!("sum_all", vec![uniform(a, b, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| Ok(t.sum_all(v[0])));

    let n = rr.gen_range(4..=12);
    let g = random_connected(n, 0.2, rr);
    let nb = Arc::new(fillorder::autodiff::neighbor_groups(&g));
    for (name, act) in [("sage_layer relu", Activation::Relu), ("sage_layer tanh", Activation::Tanh)] {
        let nb = Arc::clone(&nb);
        let w = vec![uniform(n, b, -1.0, 1.0, rr), uniform(b, c, -1.0, 1.0, rr), uniform(b, c, -1.0, 1.0, rr)];
        case!(name, w, move |t: &mut Tape, v: &[Var]| sage_layer(t, v[0], &nb, v[1], v[2], act));
    }
    case!("orthonormalize", vec![uniform(n, 2, -1.0, 1.0, rr)], |t: &mut Tape, v: &[Var]| orthonormalize(t, v[0]));
    let triplets = sample_triplets(&g, 3 * n, SamplerConfig::default(), rr);
    if !triplets.is_empty() {
        let ts = triplets.clone();
        case!("chain_loss", vec![uniform(n, 1, -2.0, 2.0, rr)], move |t: &mut Tape, v: &[Var]| chain_loss_on_tape(t, v[0], &ts));
    }

    // whole-model losses, differentiated with respect to the weights; tanh
    // keeps tiny random models away from dead units and rank collapse
    let config = ModelConfig { hidden: rr.gen_range(3..=6), activation: Activation::Tanh };
    let model = CfpModel::new(config, rr).unwrap();
    let ctx = GraphContext::new(&g, rr).unwrap();
    let (_, gs) = spectral_loss(&model, &ctx).unwrap();
    let err = gradient_check(
        |ps| {
            let mut m = model.clone();
            m.spectral.values_mut().clone_from_slice(ps);
            spectral_loss(&m, &ctx).map(|r| r.0)
        },
        model.spectral.values(),
        &gs,
        1e-5,
    )
    .unwrap();
    out.push(("spectral rayleigh loss", err.max_relative_error));
    if !triplets.is_empty() {
        let x = spectral_embed(&model, &ctx).unwrap().features;
        let (_, ge) = chain_loss(&model, &ctx, &x, &triplets).unwrap();
        let err = gradient_check(
            |ps| {
                let mut m = model.clone();
                m.encoder.values_mut().clone_from_slice(ps);
                chain_loss(&m, &ctx, &x, &triplets).map(|r| r.0)
            },
            model.encoder.values(),
            &ge,
            1e-5,
        )
        .unwrap();
        out.push(("encoder chain loss", err.max_relative_error));

        let (_, gs, ge) = joint_chain_loss(&model, &ctx, &triplets).unwrap();
        let ns = model.spectral.len();
        let all: Vec<Matrix> = model.spectral.values().iter().chain(model.encoder.values()).cloned().collect();
        let grads: Vec<Matrix> = gs.into_iter().chain(ge).collect();
        let err = gradient_check(
            |ps| {
                let mut m = model.clone();
                m.spectral.values_mut().clone_from_slice(&ps[..ns]);
                m.encoder.values_mut().clone_from_slice(&ps[ns..]);
                joint_chain_loss(&m, &ctx, &triplets).map(|r| r.0)
            },
            &all,
            &grads,
            1e-5,
        )
        .unwrap();
        out.push(("full model chain loss", err.max_relative_error));
    }
    out
}
