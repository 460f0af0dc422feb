//! Fill-reducing orderings for sparse symmetric matrices.

pub mod autodiff;
pub mod bench;
pub mod cfp;
pub mod error;
pub mod generate;
pub mod graph;
pub mod matrix_io;
pub mod multigrid;
pub mod ordering;
pub mod symbolic;

pub use error::{Error, Result};
pub use graph::{AdjacencyGraph, Ordering};
pub use matrix_io::SparseSymmetricPattern;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matrices-and-graphs.md")]
    mod matrices_and_graphs {}
    #[doc = include_str!("../../../book/src/fill-in.md")]
    mod fill_in {}
    #[doc = include_str!("../../../book/src/classical-orderings.md")]
    mod classical_orderings {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/coarsening.md")]
    mod coarsening {}
    #[doc = include_str!("../../../book/src/autodiff.md")]
    mod autodiff {}
    #[doc = include_str!("../../../book/src/learned-ordering.md")]
    mod learned_ordering {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
}
