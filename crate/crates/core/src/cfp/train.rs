use std::io::Write;

use rand::Rng;

use super::model::{chain_loss, joint_chain_loss, reorder_cfp, spectral_embed, spectral_loss};
use super::{sample_triplets, CfpModel, GraphContext, SamplerConfig, DEFAULT_TRIPLETS_PER_VERTEX};
use crate::autodiff::{Matrix, DEFAULT_LEARNING_RATE};
use crate::error::{Error, Result};
use crate::graph::connected_components;
use crate::symbolic::{eliminate, fill_in_ratio};

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean loss over the training graphs, measured before each update.
    pub loss: f64,
    /// Mean fill-in ratio on the training graphs, when requested.
    pub fir: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfpTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub triplets_per_vertex: usize,
    pub sampler: SamplerConfig,
    /// Log the training-set FIR every this many epochs.
    pub fir_every: Option<usize>,
    /// Also update the stage-I weights.
    pub joint: bool,
}

impl Default for CfpTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: DEFAULT_LEARNING_RATE,
            triplets_per_vertex: DEFAULT_TRIPLETS_PER_VERTEX,
            sampler: SamplerConfig::default(),
            fir_every: None,
            joint: false,
        }
    }
}

pub fn check_learning_rate(lr: f64) -> Result<()> {
    if lr > 0.0 && lr <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("learning rate {lr} is outside (0, 1]")))
    }
}

/// Minimizes the mean Rayleigh quotient of the Fiedler approximation with
/// one Adam step per graph per epoch.
pub fn train_spectral(
    model: &mut CfpModel,
    graphs: &[GraphContext],
    epochs: usize,
    lr: f64,
) -> Result<Vec<EpochLog>> {
    check_learning_rate(lr)?;
    if graphs.is_empty() {
        return Err(Error::invalid("no training graphs"));
    }
    for (g, ctx) in graphs.iter().enumerate() {
        if ctx.n() < 2 || connected_components(ctx.graph()).1 != 1 {
            return Err(Error::invalid(format!(
                "training graph {g} must be connected with at least two vertices"
            )));
        }
    }
    model.spectral_adam.lr = lr;
    let mut log = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        let mut total = 0.0;
        for ctx in graphs {
            let (loss, grads) = spectral_loss(model, ctx)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            total += loss;
            model.spectral_adam.step(model.spectral.values_mut(), &grads)?;
        }
        log.push(EpochLog { epoch, loss: total / graphs.len() as f64, fir: None });
    }
    Ok(log)
}

/// Trains the encoder on the end-max chain loss. Triplets are resampled
/// every epoch; graphs that admit none are skipped. Stage I stays fixed
/// unless `config.joint` is set.
pub fn train_cfp<R: Rng + ?Sized>(
    model: &mut CfpModel,
    graphs: &[GraphContext],
    config: &CfpTrainConfig,
    rng: &mut R,
) -> Result<Vec<EpochLog>> {
    check_learning_rate(config.lr)?;
    if graphs.is_empty() {
        return Err(Error::invalid("no training graphs"));
    }
    model.encoder_adam.lr = config.lr;
    model.spectral_adam.lr = config.lr;
    let mut frozen: Vec<Option<Matrix>> = Vec::with_capacity(graphs.len());
    if !config.joint {
        for ctx in graphs {
            frozen.push(Some(spectral_embed(model, ctx)?.features));
        }
    }
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let mut total = 0.0;
        let mut used = 0usize;
        for (g, ctx) in graphs.iter().enumerate() {
            let count = config.triplets_per_vertex * ctx.n();
            let triplets = sample_triplets(ctx.graph(), count, config.sampler, rng);
            if triplets.is_empty() {
                continue;
            }
            let loss = if config.joint {
                let (loss, gs, ge) = joint_chain_loss(model, ctx, &triplets)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, loss });
                }
                model.spectral_adam.step(model.spectral.values_mut(), &gs)?;
                model.encoder_adam.step(model.encoder.values_mut(), &ge)?;
                loss
            } else {
                let x = frozen[g].as_ref().expect("embedded above");
                let (loss, ge) = chain_loss(model, ctx, x, &triplets)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, loss });
                }
                model.encoder_adam.step(model.encoder.values_mut(), &ge)?;
                loss
            };
            total += loss;
            used += 1;
        }
        if used == 0 {
            return Err(Error::invalid("no training graph admits a triplet"));
        }
        let fir = match config.fir_every {
            Some(k) if k > 0 && epoch % k == 0 => Some(mean_fir(model, graphs)?),
            _ => None,
        };
        log.push(EpochLog { epoch, loss: total / used as f64, fir });
    }
    Ok(log)
}

/// Mean fill-in ratio of the model's orderings over `graphs`.
pub fn mean_fir(model: &CfpModel, graphs: &[GraphContext]) -> Result<f64> {
    let mut total = 0.0;
    for ctx in graphs {
        let ordering = reorder_cfp(model, ctx)?;
        let report = eliminate(ctx.graph(), &ordering)?;
        total += fill_in_ratio(&report, &ctx.graph().to_pattern())?;
    }
    Ok(total / graphs.len() as f64)
}

/// Writes `stage,epoch,loss,fir` rows for each `(stage, log)` section;
/// `fir` is empty when not measured.
pub fn write_training_log<W: Write>(sections: &[(&str, &[EpochLog])], mut sink: W) -> Result<()> {
    writeln!(sink, "stage,epoch,loss,fir")?;
    for (stage, log) in sections {
        for row in *log {
            match row.fir {
                Some(f) => writeln!(sink, "{stage},{},{:?},{:?}", row.epoch, row.loss, f)?,
                None => writeln!(sink, "{stage},{},{:?},", row.epoch, row.loss)?,
            }
        }
    }
    Ok(())
}

/// Trailing moving average with window `w`; entry `t` averages epochs
/// `t - w + 1 ..= t` and is `None` before a full window is available.
pub fn moving_average(values: &[f64], w: usize) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (t, &v) in values.iter().enumerate() {
        sum += v;
        if t >= w {
            sum -= values[t - w];
        }
        out.push((w > 0 && t + 1 >= w).then(|| sum / w as f64));
    }
    out
}
