//! Layers built from tape primitives.

use std::sync::Arc;

use rand::Rng;

use super::{Matrix, RowGroups, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::AdjacencyGraph;

/// Pointwise nonlinearity applied after a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, tape: &mut Tape, x: Var) -> Var {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Tanh => tape.tanh(x),
            Activation::Identity => x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::invalid(format!("unknown activation '{other}'"))),
        }
    }
}

/// Uniform Glorot initialization in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Matrix {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-bound..=bound)).collect();
    Matrix::from_vec(fan_in, fan_out, data).expect("sized above")
}

/// Neighbor lists of `graph` as row groups, for neighbor-mean aggregation.
pub fn neighbor_groups(graph: &AdjacencyGraph) -> RowGroups {
    RowGroups::new((0..graph.n()).map(|v| graph.neighbors(v).to_vec()).collect(), graph.n())
        .expect("neighbors are in range")
}

/// GraphSAGE convolution with mean aggregation:
/// `out(v) = act(h(v) W_self + mean_{u ~ v} h(u) W_neigh)`.
///
/// Features are rows; a vertex without neighbors aggregates a zero row.
pub fn sage_layer(
    tape: &mut Tape,
    features: Var,
    neighbors: &Arc<RowGroups>,
    w_self: Var,
    w_neigh: Var,
    activation: Activation,
) -> Result<Var> {
    let rows = tape.value(features).rows();
    if rows != neighbors.len() || rows != neighbors.source_rows() {
        return Err(Error::shape(format!(
            "sage layer: {rows} feature rows for a graph of {} vertices",
            neighbors.len()
        )));
    }
    let own = tape.matmul(features, w_self)?;
    let agg = tape.mean_rows(features, Arc::clone(neighbors))?;
    let nb = tape.matmul(agg, w_neigh)?;
    let pre = tape.add(own, nb)?;
    Ok(activation.apply(tape, pre))
}

/// Affine map `x W + b` with `b` a single row.
pub fn linear(tape: &mut Tape, x: Var, weight: Var, bias: Var) -> Result<Var> {
    let y = tape.matmul(x, weight)?;
    tape.add_row(y, bias)
}

/// Relative threshold below which a Gram–Schmidt residual counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Gram–Schmidt on the two columns of an `n x 2` matrix.
///
/// The output columns are orthonormal and span the input columns. No sign
/// normalization is applied: each column keeps the orientation of its input,
/// which keeps the map equivariant under row permutations. Built from tape
/// primitives, so gradients flow through the normalization.
pub fn orthonormalize(tape: &mut Tape, x: Var) -> Result<Var> {
    let (n, cols) = tape.value(x).shape();
    if cols != 2 || n < 2 {
        return Err(Error::shape(format!("orthonormalize expects n x 2 with n >= 2, got {n} x {cols}")));
    }
    let a = tape.column(x, 0)?;
    let b = tape.column(x, 1)?;
    let aa = tape.dot(a, a)?;
    let norm_a = tape.scalar(aa).sqrt();
    let norm_b = tape.value(b).data().iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm_a >= RANK_TOLERANCE) {
        return Err(Error::RankDeficient(format!("first column has norm {norm_a:e}")));
    }
    let inv_a = tape.rsqrt(aa);
    let q1 = tape.scale_by(a, inv_a)?;
    let proj = tape.dot(q1, b)?;
    let along = tape.scale_by(q1, proj)?;
    let p = tape.sub(b, along)?;
    let pp = tape.dot(p, p)?;
    let norm_p = tape.scalar(pp).sqrt();
    if !(norm_p >= RANK_TOLERANCE) || !(norm_p > 1e-10 * norm_b) {
        return Err(Error::RankDeficient(format!(
            "second column is dependent on the first (residual {norm_p:e})"
        )));
    }
    let inv_p = tape.rsqrt(pp);
    let q2 = tape.scale_by(p, inv_p)?;
    tape.concat_cols(q1, q2)
}
