use crate::cell::{CellSample, CellTrajectory};
use crate::Real;

use super::{Envelope, HomogenizationError, Target, TestFunction, TwoScaleField, XLattice, YProfile};

/// One cell sample per lattice point, tagged `(i, j)`.
pub fn lattice_samples<T: Real>(lattice: &XLattice<T>) -> Vec<CellSample<T>> {
    (0..lattice.len())
        .map(|s| CellSample {
            tag: lattice.index(s),
            x: lattice.point(s),
        })
        .collect()
}

/// Collects one component of a cell family into a two-scale field.
pub fn two_scale_from_family<T: Real>(
    lattice: &XLattice<T>,
    family: &[CellTrajectory<T>],
    target: Target,
) -> Result<TwoScaleField<T>, HomogenizationError> {
    let first = family.first().ok_or(HomogenizationError::Empty)?;
    let frames = family
        .iter()
        .map(|tr| match target {
            Target::U1 => tr.u0.iter().map(|u| u.u1().clone()).collect(),
            Target::U2 => tr.u0.iter().map(|u| u.u2().clone()).collect(),
            Target::Theta => tr.theta0.clone(),
        })
        .collect();
    TwoScaleField::new(*lattice, first.taus.clone(), frames)
}

/// Test functions used by the two-scale experiments: smooth and
/// piecewise-linear cell profiles and a τ-weighted one, all localized by
/// `chi`. Every member depends on y.
pub fn standard_phi_suite<T: Real>(chi: Envelope<T>) -> Vec<TestFunction<T>> {
    vec![
        TestFunction::new(Target::U2, chi, YProfile::Sin(1, 0)),
        TestFunction::new(Target::U2, chi, YProfile::Cos(1, 0)),
        TestFunction::new(Target::U2, chi, YProfile::Sin(1, 0)).with_tau_pow(1),
        TestFunction::new(Target::Theta, chi, YProfile::Cos(1, 0)),
        TestFunction::new(Target::Theta, chi, YProfile::Tri(1, 0)),
    ]
}
