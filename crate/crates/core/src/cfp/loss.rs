use std::sync::Arc;

use super::Triplet;
use crate::autodiff::{bce_with_logits, RowGroups, Tape, Var};
use crate::error::{Error, Result};

/// `max(y_i, y_j) - y_k`. Positive when `k` is scored for later
/// elimination than at least one endpoint.
pub fn end_max_margin(y: &[f64], t: &Triplet) -> f64 {
    y[t.i].max(y[t.j]) - y[t.k]
}

/// Mean of `bce_with_logits` over the margins of `triplets`.
pub fn end_max_chain_loss(y: &[f64], triplets: &[Triplet]) -> Result<f64> {
    if triplets.is_empty() {
        return Err(Error::invalid("chain loss needs at least one triplet"));
    }
    let total: f64 = triplets.iter().map(|t| bce_with_logits(end_max_margin(y, t))).sum();
    Ok(total / triplets.len() as f64)
}

/// Taped chain loss on an `n x 1` score column.
pub fn chain_loss_on_tape(tape: &mut Tape, scores: Var, triplets: &[Triplet]) -> Result<Var> {
    if triplets.is_empty() {
        return Err(Error::invalid("chain loss needs at least one triplet"));
    }
    let n = tape.value(scores).rows();
    let pick = |tape: &mut Tape, rows: Vec<usize>| -> Result<Var> {
        tape.mean_rows(scores, Arc::new(RowGroups::gather(&rows, n)?))
    };
    let yi = pick(tape, triplets.iter().map(|t| t.i).collect())?;
    let yj = pick(tape, triplets.iter().map(|t| t.j).collect())?;
    let yk = pick(tape, triplets.iter().map(|t| t.k).collect())?;
    let top = tape.max(yi, yj)?;
    let margin = tape.sub(top, yk)?;
    let bce = tape.bce_with_logits(margin);
    Ok(tape.mean_all(bce))
}
