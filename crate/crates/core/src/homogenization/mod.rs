//! Two-scale pairings of oscillating test functions against ε-trajectories
//! and against cell-problem families, and the ε-sweep error report.

mod family;
mod pairing;
mod testfn;

use thiserror::Error;

pub use family::{lattice_samples, standard_phi_suite, two_scale_from_family};
pub use pairing::{
    average_pairing, cell_average, least_squares_order, limit_pairing, matched_resolution, pairing, pairing_with,
    two_scale_error_sweep, weak_pairing, ScalarTrajectory, TwoScaleField, TwoScaleReport, XLattice,
};
pub use testfn::{parse_phi_file, Envelope, EnvelopeKind, Target, TestFunction, YProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomogenizationError {
    #[error("trajectory is tagged ε = {tagged}, pairing requested at ε = {requested}")]
    EpsMismatch { tagged: f64, requested: f64 },
    #[error("time windows differ between trajectories")]
    WindowMismatch,
    #[error("empty trajectory")]
    Empty,
    #[error("sample count mismatch: expected {expected}, got {got}")]
    SampleMismatch { expected: usize, got: usize },
    #[error("eps values must be strictly decreasing")]
    EpsOrder,
    #[error("cannot refine {have} points per cell period to {want}")]
    Resolution { have: f64, want: usize },
    #[error(transparent)]
    Field(#[from] crate::fields::FieldError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
