//! Fill-reducing orderings: bandwidth (Cuthill–McKee), degree (minimum
//! degree), separator (nested dissection) and spectral (Fiedler) families,
//! plus the conversion from learned vertex scores to an ordering.

mod cuthill_mckee;
mod min_degree;
mod nested_dissection;
pub mod spectral;

pub use cuthill_mckee::{cuthill_mckee, reverse_cuthill_mckee};
pub use min_degree::minimum_degree;
pub use nested_dissection::nested_dissection;
pub use spectral::{fiedler_ordering, fiedler_vector, FiedlerVector};

use crate::error::{Error, Result};
use crate::graph::Ordering;

/// Per-vertex elimination priority: a higher score is eliminated earlier.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some((v, s)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
            return Err(Error::NonFinite(format!("score of vertex {v} ({s})")));
        }
        Ok(Self(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sorts vertices by descending score, smaller id first on ties.
pub fn ordering_from_scores(scores: &ScoreVector) -> Ordering {
    let s = &scores.0;
    let mut seq: Vec<usize> = (0..s.len()).collect();
    seq.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    Ordering::from_elim_seq(seq).expect("sorted indices form a permutation")
}
