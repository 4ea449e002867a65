//! Finite-dimensional relaxed commutant lifting.
//!
//! Interpolation problems `ω: F -> Y ⊕ U`, their Schur-class solution
//! parameterizations, the reduction of relaxed commutant lifting data to
//! such problems, and contractive multipliers on model spaces of inner
//! functions. Truncations keep Taylor coefficients `0..=N`.

// links the system LAPACK used by `linalg::svd`
use openblas_src as _;

pub mod cli;
pub mod error;
pub mod hardy;
pub mod json;
pub mod lifting;
pub mod linalg;
pub mod modelspace;
pub mod random;
pub mod rcl;
pub mod realization;
pub mod schur;
pub mod series;

pub use error::{Error, Result};
pub use hardy::{Grid, PolyOpFn};
pub use lifting::InterpolationProblem;
pub use linalg::{CMatrix, Subspace, C64};
pub use realization::StateSpace;
pub use schur::SchurRealization;
