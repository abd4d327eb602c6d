//! Spectral surrogate explanations for black boxes on `{-1,+1}^n`.
//!
//! A point of the cube is a retain/remove pattern over `n` features of one
//! input. An explanation is a sparse Fourier polynomial
//! `g(x) = Σ_S α_S χ_S(x)` fitted to oracle queries.

pub mod baselines;
pub mod cube;
pub mod error;
pub mod experiment;
pub mod explain;
pub mod metrics;
mod external;
pub mod oracle;
pub mod reference;
pub mod solver;
pub mod synthetic;

pub use cube::{
    eval_basis, eval_spectrum, fourier_transform_exact, inner_product_exact, subsets_up_to, BasisFamily,
    BooleanFunction, SignedPoint, SparseSpectrum, Subset, TruthTable,
};
pub use error::{Error, Result};
pub use oracle::{NeighborhoodSpec, Oracle, SampleBatch};
