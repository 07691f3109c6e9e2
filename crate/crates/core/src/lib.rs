//! Numerical laboratory for Rayleigh-Bénard convection in the Boussinesq
//! approximation, its ε-scaled version and the two-scale homogenized limit.
//!
//! All numerical types are generic over [`Real`]; the `*64` aliases below
//! are what the binaries and acceptance tests use.

pub mod bounds;
pub mod cell;
pub mod fields;
pub mod homogenization;
pub mod meanfield;
pub mod scalar;
pub mod snapshot;
pub mod solver;

pub use scalar::Real;

pub type Grid64 = fields::Grid<f64>;
pub type ScalarField64 = fields::ScalarField<f64>;
pub type VectorField64 = fields::VectorField<f64>;
pub type PhysicalParams64 = solver::PhysicalParams<f64>;
pub type SolverState64 = solver::SolverState<f64>;
pub type BoxSolver64 = solver::BoxSolver<f64>;
pub type CellState64 = cell::CellState<f64>;
pub type CellSolver64 = cell::CellSolver<f64>;
pub type TestFunction64 = homogenization::TestFunction<f64>;
pub type BarrierSpec64 = bounds::BarrierSpec<f64>;
