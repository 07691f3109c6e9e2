//! Grids, sampled fields, differential operators, norms and the Leray
//! projection.
//!
//! Periodic directions are differentiated spectrally; the wall-bounded
//! vertical direction of a box uses second-order finite differences with
//! nodes on both walls.

mod field;
mod grid;
pub mod linalg;
mod ops;
pub mod poisson;
mod random;
mod resample;
pub mod spectral;

pub use field::{NormReport, ScalarField, VectorField};
pub use grid::{Grid, GridKind, MIN_POINTS};
pub use ops::*;
pub use poisson::{BoxPoisson, PoissonSolution};
pub use random::{random_band_limited, random_solenoidal};
pub use resample::upsample;
pub use spectral::Spectral;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grid needs at least {min} points per direction, got {n}")]
    GridTooSmall { n: usize, min: usize },
    #[error("point count {n} must be even")]
    OddPoints { n: usize },
    #[error("domain extents must be positive and finite")]
    BadExtent,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("operation requires a {expected} grid")]
    KindMismatch { expected: &'static str },
    #[error("non-finite value in field")]
    NonFinite,
    #[error("singular vertical operator")]
    Singular,
}
