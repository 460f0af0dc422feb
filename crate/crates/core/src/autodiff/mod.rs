//! A small reverse-mode differentiation kernel: dense matrices, a tape with
//! exactly the primitives the ordering networks need, GraphSAGE layers,
//! Gram–Schmidt orthonormalization and Adam.

mod adam;
pub mod gradcheck;
mod matrix;
pub mod nn;
mod tape;

pub use adam::{AdamState, DEFAULT_LEARNING_RATE};
pub use gradcheck::{gradient_check, GradCheck};
pub use matrix::Matrix;
pub use nn::{glorot, linear, neighbor_groups, orthonormalize, sage_layer, Activation};
pub use tape::{bce_with_logits, Gradients, RowGroups, Tape, Var};
