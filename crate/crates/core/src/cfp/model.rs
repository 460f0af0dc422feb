//! The two-stage multigrid network.
//!
//! Stage I (spectral embedding): the two coarsest vertices are seeded with
//! `[1, 0]` and `[0, 1]`, lifted to the hidden width, and carried to the
//! finest level by prolongation with one SAGE layer per level. A linear map
//! to two columns and Gram–Schmidt give an orthonormal `n x 2` embedding.
//!
//! Stage II (vertex encoder): a SAGE layer on the embedding, then
//! restriction with a SAGE layer per coarsening step, prolongation with a
//! SAGE layer per uncoarsening step (fed the matching downward features as a
//! skip connection), and a final SAGE layer plus linear map to one score per
//! vertex. Layer weights are shared across levels.

use std::sync::Arc;

use rand::Rng;

use crate::autodiff::{
    glorot, linear, orthonormalize, sage_layer, Activation, AdamState, Matrix, RowGroups, Tape, Var,
    DEFAULT_LEARNING_RATE,
};
use crate::error::{Error, Result};
use crate::graph::{AdjacencyGraph, Ordering};
use crate::multigrid::{coarsen, CoarseningHierarchy, LevelOperators};
use crate::ordering::{ordering_from_scores, ScoreVector};

pub const DEFAULT_HIDDEN: usize = 16;

/// Centered embedding columns shorter than this are treated as constant.
const CONSTANT_COLUMN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub hidden: usize,
    pub activation: Activation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { hidden: DEFAULT_HIDDEN, activation: Activation::Relu }
    }
}

/// Named parameter matrices in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<Matrix>,
}

impl ParamSet {
    pub(crate) fn from_parts(names: Vec<String>, values: Vec<Matrix>) -> Self {
        debug_assert_eq!(names.len(), values.len());
        Self { names, values }
    }

    fn init<R: Rng + ?Sized>(shapes: &[(&str, usize, usize)], rng: &mut R) -> Self {
        let mut names = Vec::new();
        let mut values = Vec::new();
        for &(name, r, c) in shapes {
            names.push(name.to_string());
            values.push(if name.ends_with("_b") { Matrix::zeros(r, c) } else { glorot(r, c, rng) });
        }
        Self { names, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Matrix] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Matrix] {
        &mut self.values
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.names.iter().position(|n| n == name).map(|i| &self.values[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Matrix> {
        self.names.iter().position(|n| n == name).map(move |i| &mut self.values[i])
    }

    fn leaves(&self, tape: &mut Tape) -> Vec<Var> {
        self.values.iter().map(|m| tape.leaf(m.clone())).collect()
    }
}

mod sp {
    pub const LIFT_W: usize = 0;
    pub const LIFT_B: usize = 1;
    pub const SELF: usize = 2;
    pub const NEIGH: usize = 3;
    pub const OUT_W: usize = 4;
    pub const OUT_B: usize = 5;
}

mod enc {
    pub const IN_SELF: usize = 0;
    pub const IN_NEIGH: usize = 1;
    pub const DOWN_SELF: usize = 2;
    pub const DOWN_NEIGH: usize = 3;
    pub const UP_SELF: usize = 4;
    pub const UP_NEIGH: usize = 5;
    pub const FINAL_SELF: usize = 6;
    pub const FINAL_NEIGH: usize = 7;
    pub const SCORE_W: usize = 8;
    pub const SCORE_B: usize = 9;
}

/// Parameter names and shapes of stage I for hidden width `h`.
pub fn spectral_shapes(h: usize) -> Vec<(&'static str, usize, usize)> {
    vec![
        ("lift_w", 2, h),
        ("lift_b", 1, h),
        ("sage_self", h, h),
        ("sage_neigh", h, h),
        ("out_w", h, 2),
        ("out_b", 1, 2),
    ]
}

/// Parameter names and shapes of stage II for hidden width `h`.
pub fn encoder_shapes(h: usize) -> Vec<(&'static str, usize, usize)> {
    vec![
        ("in_self", 2, h),
        ("in_neigh", 2, h),
        ("down_self", h, h),
        ("down_neigh", h, h),
        ("up_self", 2 * h, h),
        ("up_neigh", 2 * h, h),
        ("final_self", h, h),
        ("final_neigh", h, h),
        ("score_w", h, 1),
        ("score_b", 1, 1),
    ]
}

/// Both stages' weights and their optimizer states.
#[derive(Debug, Clone, PartialEq)]
pub struct CfpModel {
    pub config: ModelConfig,
    pub spectral: ParamSet,
    pub encoder: ParamSet,
    pub spectral_adam: AdamState,
    pub encoder_adam: AdamState,
}

impl CfpModel {
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        if config.hidden == 0 {
            return Err(Error::invalid("hidden width must be positive"));
        }
        let spectral = ParamSet::init(&spectral_shapes(config.hidden), rng);
        let encoder = ParamSet::init(&encoder_shapes(config.hidden), rng);
        Ok(Self::from_params(config, spectral, encoder))
    }

    pub(crate) fn from_params(config: ModelConfig, spectral: ParamSet, encoder: ParamSet) -> Self {
        let spectral_adam = AdamState::new(spectral.values(), DEFAULT_LEARNING_RATE);
        let encoder_adam = AdamState::new(encoder.values(), DEFAULT_LEARNING_RATE);
        Self { config, spectral, encoder, spectral_adam, encoder_adam }
    }
}

/// A graph with its coarsening hierarchy and the row-group operators the
/// network applies to it.
#[derive(Debug, Clone)]
pub struct GraphContext {
    hierarchy: CoarseningHierarchy,
    ops: LevelOperators,
    edge_heads: Arc<RowGroups>,
    edge_tails: Arc<RowGroups>,
}

impl GraphContext {
    pub fn new<R: Rng + ?Sized>(graph: &AdjacencyGraph, rng: &mut R) -> Result<Self> {
        Self::from_hierarchy(coarsen(graph, rng)?)
    }

    pub fn from_hierarchy(hierarchy: CoarseningHierarchy) -> Result<Self> {
        let g = hierarchy.finest();
        let (heads, tails): (Vec<usize>, Vec<usize>) = g.edges().unzip();
        let edge_heads = Arc::new(RowGroups::gather(&heads, g.n())?);
        let edge_tails = Arc::new(RowGroups::gather(&tails, g.n())?);
        let ops = LevelOperators::new(&hierarchy);
        Ok(Self { hierarchy, ops, edge_heads, edge_tails })
    }

    pub fn graph(&self) -> &AdjacencyGraph {
        self.hierarchy.finest()
    }

    pub fn hierarchy(&self) -> &CoarseningHierarchy {
        &self.hierarchy
    }

    pub fn n(&self) -> usize {
        self.graph().n()
    }
}

/// Stage-I output.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// Orthonormal `n x 2` features.
    pub features: Matrix,
    /// Unit-norm, mean-zero Fiedler approximation.
    pub fiedler: Vec<f64>,
}

pub(crate) fn spectral_forward(
    tape: &mut Tape,
    p: &[Var],
    ctx: &GraphContext,
    act: Activation,
) -> Result<Var> {
    if ctx.n() < 2 {
        return Err(Error::invalid(format!("spectral embedding needs n >= 2, got {}", ctx.n())));
    }
    let levels = ctx.hierarchy.num_levels();
    let seeds = tape.leaf(Matrix::identity(2));
    let lifted = linear(tape, seeds, p[sp::LIFT_W], p[sp::LIFT_B])?;
    let mut h = act.apply(tape, lifted);
    h = sage_layer(tape, h, &ctx.ops.neighbors[levels - 1], p[sp::SELF], p[sp::NEIGH], act)?;
    for l in (0..levels - 1).rev() {
        h = tape.mean_rows(h, Arc::clone(&ctx.ops.prolong[l]))?;
        h = sage_layer(tape, h, &ctx.ops.neighbors[l], p[sp::SELF], p[sp::NEIGH], act)?;
    }
    let out = linear(tape, h, p[sp::OUT_W], p[sp::OUT_B])?;
    orthonormalize(tape, out)
}

/// The embedding column farther from the constant direction, centered and
/// normalized.
pub(crate) fn fiedler_on_tape(tape: &mut Tape, embedding: Var) -> Result<Var> {
    let x = tape.value(embedding);
    let n = x.rows();
    let centered_norm = |c: usize| {
        let col = x.column(c);
        let mean = col.iter().sum::<f64>() / n as f64;
        col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt()
    };
    let (n0, n1) = (centered_norm(0), centered_norm(1));
    let pick = if n1 > n0 { 1 } else { 0 };
    if n0.max(n1) < CONSTANT_COLUMN_TOLERANCE {
        return Err(Error::RankDeficient("embedding is constant on every vertex".into()));
    }
    let col = tape.column(embedding, pick)?;
    let mean = tape.mean_all(col);
    let ones = tape.leaf(Matrix::filled(n, 1, 1.0));
    let shift = tape.matmul(ones, mean)?;
    let centered = tape.sub(col, shift)?;
    let sq = tape.dot(centered, centered)?;
    let inv = tape.rsqrt(sq);
    tape.scale_by(centered, inv)
}

fn rayleigh_on_tape(tape: &mut Tape, f: Var, ctx: &GraphContext) -> Result<Var> {
    let heads = tape.mean_rows(f, Arc::clone(&ctx.edge_heads))?;
    let tails = tape.mean_rows(f, Arc::clone(&ctx.edge_tails))?;
    let diff = tape.sub(heads, tails)?;
    tape.dot(diff, diff)
}

pub(crate) fn encoder_forward(
    tape: &mut Tape,
    p: &[Var],
    ctx: &GraphContext,
    embedding: Var,
    act: Activation,
) -> Result<Var> {
    let (n, cols) = tape.value(embedding).shape();
    if n != ctx.n() || cols != 2 {
        return Err(Error::shape(format!("encoder input is {n} x {cols}, expected {} x 2", ctx.n())));
    }
    let levels = ctx.hierarchy.num_levels();
    let nb = &ctx.ops.neighbors;
    // orthonormal columns have entries of order 1/sqrt(n)
    let x = tape.scale(embedding, (n as f64).sqrt());
    let mut down = vec![sage_layer(tape, x, &nb[0], p[enc::IN_SELF], p[enc::IN_NEIGH], act)?];
    for l in 0..levels - 1 {
        let r = tape.mean_rows(down[l], Arc::clone(&ctx.ops.restrict[l]))?;
        down.push(sage_layer(tape, r, &nb[l + 1], p[enc::DOWN_SELF], p[enc::DOWN_NEIGH], act)?);
    }
    let mut h = down[levels - 1];
    for l in (0..levels - 1).rev() {
        let up = tape.mean_rows(h, Arc::clone(&ctx.ops.prolong[l]))?;
        let joined = tape.concat_cols(up, down[l])?;
        h = sage_layer(tape, joined, &nb[l], p[enc::UP_SELF], p[enc::UP_NEIGH], act)?;
    }
    h = sage_layer(tape, h, &nb[0], p[enc::FINAL_SELF], p[enc::FINAL_NEIGH], act)?;
    linear(tape, h, p[enc::SCORE_W], p[enc::SCORE_B])
}

/// Stage I forward pass.
pub fn spectral_embed(model: &CfpModel, ctx: &GraphContext) -> Result<SpectralEmbedding> {
    let mut tape = Tape::new();
    let p = model.spectral.leaves(&mut tape);
    let emb = spectral_forward(&mut tape, &p, ctx, model.config.activation)?;
    let f = fiedler_on_tape(&mut tape, emb)?;
    Ok(SpectralEmbedding { features: tape.value(emb).clone(), fiedler: tape.value(f).data().to_vec() })
}

/// Stage II forward pass on a given embedding.
pub fn vertex_scores(model: &CfpModel, ctx: &GraphContext, embedding: &Matrix) -> Result<ScoreVector> {
    let mut tape = Tape::new();
    let p = model.encoder.leaves(&mut tape);
    let x = tape.leaf(embedding.clone());
    let y = encoder_forward(&mut tape, &p, ctx, x, model.config.activation)?;
    ScoreVector::new(tape.value(y).data().to_vec())
}

/// Single-shot ordering: embed, score, sort by descending score.
pub fn reorder_cfp(model: &CfpModel, ctx: &GraphContext) -> Result<Ordering> {
    if ctx.n() < 2 {
        return Ok(Ordering::identity(ctx.n()));
    }
    let x = spectral_embed(model, ctx)?;
    Ok(ordering_from_scores(&vertex_scores(model, ctx, &x.features)?))
}

/// Rayleigh quotient of the Fiedler approximation and its gradient with
/// respect to the stage-I parameters.
pub fn spectral_loss(model: &CfpModel, ctx: &GraphContext) -> Result<(f64, Vec<Matrix>)> {
    let mut tape = Tape::new();
    let p = model.spectral.leaves(&mut tape);
    let emb = spectral_forward(&mut tape, &p, ctx, model.config.activation)?;
    let f = fiedler_on_tape(&mut tape, emb)?;
    let r = rayleigh_on_tape(&mut tape, f, ctx)?;
    let grads = tape.backward(r)?;
    Ok((tape.scalar(r), p.iter().map(|&v| grads.wrt(v)).collect()))
}

/// End-max chain loss on a fixed embedding and its gradient with respect to
/// the stage-II parameters.
pub fn chain_loss(
    model: &CfpModel,
    ctx: &GraphContext,
    embedding: &Matrix,
    triplets: &[super::Triplet],
) -> Result<(f64, Vec<Matrix>)> {
    let mut tape = Tape::new();
    let p = model.encoder.leaves(&mut tape);
    let x = tape.leaf(embedding.clone());
    let y = encoder_forward(&mut tape, &p, ctx, x, model.config.activation)?;
    let loss = super::chain_loss_on_tape(&mut tape, y, triplets)?;
    let grads = tape.backward(loss)?;
    Ok((tape.scalar(loss), p.iter().map(|&v| grads.wrt(v)).collect()))
}

/// Chain loss through both stages, with gradients for stage I and stage II.
pub fn joint_chain_loss(
    model: &CfpModel,
    ctx: &GraphContext,
    triplets: &[super::Triplet],
) -> Result<(f64, Vec<Matrix>, Vec<Matrix>)> {
    let mut tape = Tape::new();
    let ps = model.spectral.leaves(&mut tape);
    let pe = model.encoder.leaves(&mut tape);
    let emb = spectral_forward(&mut tape, &ps, ctx, model.config.activation)?;
    let y = encoder_forward(&mut tape, &pe, ctx, emb, model.config.activation)?;
    let loss = super::chain_loss_on_tape(&mut tape, y, triplets)?;
    let grads = tape.backward(loss)?;
    Ok((
        tape.scalar(loss),
        ps.iter().map(|&v| grads.wrt(v)).collect(),
        pe.iter().map(|&v| grads.wrt(v)).collect(),
    ))
}
