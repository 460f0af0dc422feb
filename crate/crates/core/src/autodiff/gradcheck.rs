//! Central finite-difference checks for taped gradients.

use super::Matrix;
use crate::error::Result;

/// Step used by default for central differences.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Relative errors are measured against `max(|analytic|, |numeric|, FLOOR)`.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    /// `(parameter, flat entry)` of the worst entry.
    pub worst: (usize, usize),
    pub entries: usize,
}

/// Compares `analytic` with central differences of `f` around `params`,
/// entry by entry.
pub fn gradient_check<F>(mut f: F, params: &[Matrix], analytic: &[Matrix], step: f64) -> Result<GradCheck>
where
    F: FnMut(&[Matrix]) -> Result<f64>,
{
    let mut work = params.to_vec();
    let mut out = GradCheck { max_relative_error: 0.0, worst: (0, 0), entries: 0 };
    for p in 0..params.len() {
        for e in 0..params[p].data().len() {
            let x = params[p].data()[e];
            work[p].data_mut()[e] = x + step;
            let up = f(&work)?;
            work[p].data_mut()[e] = x - step;
            let down = f(&work)?;
            work[p].data_mut()[e] = x;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[p].data()[e];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
            if rel > out.max_relative_error || !rel.is_finite() {
                out.max_relative_error = if rel.is_finite() { rel } else { f64::INFINITY };
                out.worst = (p, e);
            }
            out.entries += 1;
        }
    }
    Ok(out)
}
