use crate::fields::{upsample, ScalarField};
use crate::solver::SweepMember;
use crate::Real;

use super::{HomogenizationError, Target, TestFunction};

/// Trapezoid weights over the τ samples; a single sample gets weight 1.
fn tau_weights<T: Real>(taus: &[T]) -> Vec<T> {
    let n = taus.len();
    if n == 1 {
        return vec![T::one()];
    }
    let half = T::lit(0.5);
    (0..n)
        .map(|k| {
            let left = if k > 0 { taus[k] - taus[k - 1] } else { T::zero() };
            let right = if k + 1 < n { taus[k + 1] - taus[k] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

/// Samples of one scalar on the box at fast times `taus`.
#[derive(Debug, Clone)]
pub struct ScalarTrajectory<T: Real> {
    pub eps: T,
    pub taus: Vec<T>,
    pub frames: Vec<ScalarField<T>>,
}

impl<T: Real> ScalarTrajectory<T> {
    pub fn new(eps: T, taus: Vec<T>, frames: Vec<ScalarField<T>>) -> Result<Self, HomogenizationError> {
        if frames.is_empty() {
            return Err(HomogenizationError::Empty);
        }
        if taus.len() != frames.len() {
            return Err(HomogenizationError::SampleMismatch {
                expected: frames.len(),
                got: taus.len(),
            });
        }
        Ok(ScalarTrajectory { eps, taus, frames })
    }

    /// `ε^{−1/2}u_ε` component or `θ_ε` from a sweep member.
    pub fn from_sweep(member: &SweepMember<T>, target: Target) -> Self {
        let s = T::one() / member.eps.sqrt();
        let frames = match target {
            Target::U1 => member.u.iter().map(|u| u.u1().scaled(s)).collect(),
            Target::U2 => member.u.iter().map(|u| u.u2().scaled(s)).collect(),
            Target::Theta => member.theta.clone(),
        };
        ScalarTrajectory {
            eps: member.eps,
            taus: member.taus.clone(),
            frames,
        }
    }

    /// Trigonometric refinement of every frame by `r` along x.
    pub fn refined_x(&self, r: usize) -> Result<Self, HomogenizationError> {
        let frames: Result<Vec<_>, _> = self.frames.iter().map(|f| upsample(f, r, 1)).collect();
        Ok(ScalarTrajectory {
            eps: self.eps,
            taus: self.taus.clone(),
            frames: frames?,
        })
    }
}

/// `∫∫ u(x, τ) f(x, y = x/ε, τ) dx dτ` with the grid quadrature in x and the
/// trapezoid rule in τ.
pub fn pairing_with<T: Real>(traj: &ScalarTrajectory<T>, eps: T, f: impl Fn(T, T, T, T, T) -> T) -> T {
    let w = tau_weights(&traj.taus);
    let mut acc = T::zero();
    for ((frame, &tau), &wt) in traj.frames.iter().zip(&traj.taus).zip(&w) {
        let g = frame.grid();
        let mut s = T::zero();
        for (i, k, x, z) in g.nodes() {
            s += frame.at(i, k) * f(x, z, x / eps, z / eps, tau) * g.z_weight(k);
        }
        acc += wt * s * g.dx();
    }
    acc
}

/// Left side of the two-scale pairing, `∫∫ u_ε φ(x, x/ε, τ) dx dτ`.
pub fn pairing<T: Real>(traj: &ScalarTrajectory<T>, phi: &TestFunction<T>, eps: T) -> Result<T, HomogenizationError> {
    if (traj.eps - eps).magnitude() > T::lit(1e-12) * eps {
        return Err(HomogenizationError::EpsMismatch {
            tagged: traj.eps.as_f64(),
            requested: eps.as_f64(),
        });
    }
    Ok(pairing_with(traj, eps, |x, z, y1, y2, tau| phi.eval(x, z, y1, y2, tau)))
}

/// Ordinary weak pairing with the cell mean of `φ`.
pub fn weak_pairing<T: Real>(traj: &ScalarTrajectory<T>, phi: &TestFunction<T>) -> T {
    pairing_with(traj, traj.eps, |x, z, _, _, tau| phi.eval_cell_mean(x, z, tau))
}

/// Midpoint lattice of `n1 × n2` global sample points over `[0,lx]×[0,lz]`.
/// Sample `(i, j)` has index `j·n1 + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XLattice<T> {
    pub n1: usize,
    pub n2: usize,
    pub lx: T,
    pub lz: T,
}

impl<T: Real> XLattice<T> {
    pub fn new(n1: usize, n2: usize, lx: T, lz: T) -> Self {
        XLattice { n1, n2, lx, lz }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, s: usize) -> (T, T) {
        let (i, j) = (s % self.n1, s / self.n1);
        let half = T::lit(0.5);
        (
            (T::from_usize_lossy(i) + half) * self.lx / T::from_usize_lossy(self.n1),
            (T::from_usize_lossy(j) + half) * self.lz / T::from_usize_lossy(self.n2),
        )
    }

    pub fn index(&self, s: usize) -> (usize, usize) {
        (s % self.n1, s / self.n1)
    }

    pub fn weight(&self) -> T {
        self.lx * self.lz / T::from_usize_lossy(self.len())
    }

    pub fn points(&self) -> Vec<(T, T)> {
        (0..self.len()).map(|s| self.point(s)).collect()
    }
}

/// A two-scale field `u₀(x, y, τ)`: one torus field per x-sample and τ.
#[derive(Debug, Clone)]
pub struct TwoScaleField<T: Real> {
    pub lattice: XLattice<T>,
    pub taus: Vec<T>,
    /// Indexed `[sample][tau]`.
    pub frames: Vec<Vec<ScalarField<T>>>,
}

impl<T: Real> TwoScaleField<T> {
    pub fn new(
        lattice: XLattice<T>,
        taus: Vec<T>,
        frames: Vec<Vec<ScalarField<T>>>,
    ) -> Result<Self, HomogenizationError> {
        if frames.len() != lattice.len() {
            return Err(HomogenizationError::SampleMismatch {
                expected: lattice.len(),
                got: frames.len(),
            });
        }
        if taus.is_empty() {
            return Err(HomogenizationError::Empty);
        }
        for f in &frames {
            if f.len() != taus.len() {
                return Err(HomogenizationError::WindowMismatch);
            }
        }
        Ok(TwoScaleField { lattice, taus, frames })
    }

    /// Trigonometric refinement of every cell frame by `r` in both
    /// directions.
    pub fn refined(&self, r: usize) -> Result<Self, HomogenizationError> {
        let mut frames = Vec::with_capacity(self.frames.len());
        for series in &self.frames {
            let s: Result<Vec<_>, _> = series.iter().map(|f| upsample(f, r, r)).collect();
            frames.push(s?);
        }
        Ok(TwoScaleField {
            lattice: self.lattice,
            taus: self.taus.clone(),
            frames,
        })
    }
}

fn refinement(have: f64, want: usize) -> Result<usize, HomogenizationError> {
    let r = want as f64 / have;
    let ri = r.round();
    if ri < 1.0 || (r - ri).abs() > 1e-9 {
        return Err(HomogenizationError::Resolution { have, want });
    }
    Ok(ri as usize)
}

/// Refines the trajectories along x and the cell fields in y so that every
/// pairing samples the cell period at the same `points_per_period` points.
/// Matching the samples makes the quadrature error of non-smooth cell
/// profiles identical on both sides of the comparison.
pub fn matched_resolution<T: Real>(
    trajectories: &[ScalarTrajectory<T>],
    u0: &TwoScaleField<T>,
    points_per_period: usize,
) -> Result<(Vec<ScalarTrajectory<T>>, TwoScaleField<T>), HomogenizationError> {
    let mut out = Vec::with_capacity(trajectories.len());
    for t in trajectories {
        let g = t.frames[0].grid();
        let have = (t.eps / g.dx()).as_f64();
        out.push(t.refined_x(refinement(have, points_per_period)?)?);
    }
    let cell = u0
        .frames
        .first()
        .and_then(|s| s.first())
        .ok_or(HomogenizationError::Empty)?
        .grid();
    if cell.nx() != cell.nz() {
        return Err(HomogenizationError::Resolution {
            have: cell.nz() as f64,
            want: cell.nx(),
        });
    }
    let u0 = u0.refined(refinement(cell.nx() as f64, points_per_period)?)?;
    Ok((out, u0))
}

/// `∫∫∫ u₀ φ dy dx dτ`: midpoint rule over the x-lattice, grid quadrature on
/// the cell, trapezoid in τ.
pub fn limit_pairing<T: Real>(u0: &TwoScaleField<T>, phi: &TestFunction<T>) -> T {
    let wt = tau_weights(&u0.taus);
    let wx = u0.lattice.weight();
    let mut profile: Option<(crate::fields::Grid<T>, Vec<T>)> = None;
    let mut acc = T::zero();
    for (s, series) in u0.frames.iter().enumerate() {
        let (x, z) = u0.lattice.point(s);
        let c = phi.chi.value(x, z);
        if c == T::zero() {
            continue;
        }
        for ((frame, &tau), &w) in series.iter().zip(&u0.taus).zip(&wt) {
            let g = *frame.grid();
            if profile.as_ref().map_or(true, |p| p.0 != g) {
                profile = Some((g, g.nodes().map(|(_, _, y1, y2)| phi.y.value(y1, y2)).collect()));
            }
            let yv = &profile.as_ref().expect("set above").1;
            let sum = frame.values().iter().zip(yv).fold(T::zero(), |a, (&f, &y)| a + f * y);
            acc += w * wx * c * phi.tau_factor(tau) * sum * g.dx() * g.dz();
        }
    }
    acc
}

/// Cell averages `∫_{T²} u₀ dy`, indexed `[sample][tau]`.
pub fn cell_average<T: Real>(u0: &TwoScaleField<T>) -> Vec<Vec<T>> {
    u0.frames
        .iter()
        .map(|s| s.iter().map(|f| f.integral() / f.grid().measure()).collect())
        .collect()
}

/// `∫∫ ū₀ φ dx dτ` over the lattice with the cell mean of `φ`.
pub fn average_pairing<T: Real>(avg: &[Vec<T>], lattice: &XLattice<T>, taus: &[T], phi: &TestFunction<T>) -> T {
    let wt = tau_weights(taus);
    let wx = lattice.weight();
    let mut acc = T::zero();
    for (s, series) in avg.iter().enumerate() {
        let (x, z) = lattice.point(s);
        for ((&v, &tau), &w) in series.iter().zip(taus).zip(&wt) {
            acc += w * wx * v * phi.eval_cell_mean(x, z, tau);
        }
    }
    acc
}

/// Least-squares slope of `ln error` against `ln ε`; needs at least three
/// strictly positive errors.
pub fn least_squares_order<T: Real>(eps: &[T], errors: &[T]) -> Option<T> {
    if eps.len() < 3 || eps.len() != errors.len() || errors.iter().any(|&e| !(e > T::zero())) {
        return None;
    }
    let n = T::from_usize_lossy(eps.len());
    let xs: Vec<T> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<T> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let sxy = xs
        .iter()
        .zip(&ys)
        .fold(T::zero(), |a, (&x, &y)| a + (x - mx) * (y - my));
    let sxx = xs.iter().fold(T::zero(), |a, &x| a + (x - mx) * (x - mx));
    if sxx == T::zero() {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Per-ε pairings of one test function against the two-scale limit.
#[derive(Debug, Clone)]
pub struct TwoScaleReport<T> {
    pub phi: String,
    pub eps_values: Vec<T>,
    pub pairings: Vec<T>,
    pub limit_pairing: T,
    pub errors: Vec<T>,
    pub estimated_order: Option<T>,
    /// Errors strictly decrease with ε.
    pub monotone: bool,
}

pub fn two_scale_error_sweep<T: Real>(
    trajectories: &[ScalarTrajectory<T>],
    u0: &TwoScaleField<T>,
    phi: &TestFunction<T>,
) -> Result<TwoScaleReport<T>, HomogenizationError> {
    if trajectories.is_empty() {
        return Err(HomogenizationError::Empty);
    }
    if !trajectories.windows(2).all(|w| w[0].eps > w[1].eps) {
        return Err(HomogenizationError::EpsOrder);
    }
    let tol = T::lit(1e-9);
    for t in trajectories {
        let same = t.taus.len() == u0.taus.len()
            && t.taus
                .iter()
                .zip(&u0.taus)
                .all(|(&a, &b)| (a - b).magnitude() <= tol * (T::one() + b.magnitude()));
        if !same {
            return Err(HomogenizationError::WindowMismatch);
        }
    }
    let limit = limit_pairing(u0, phi);
    let mut pairings = Vec::new();
    for t in trajectories {
        pairings.push(pairing(t, phi, t.eps)?);
    }
    let errors: Vec<T> = pairings.iter().map(|&p| (p - limit).magnitude()).collect();
    let eps_values: Vec<T> = trajectories.iter().map(|t| t.eps).collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    Ok(TwoScaleReport {
        phi: phi.to_string(),
        estimated_order: least_squares_order(&eps_values, &errors),
        eps_values,
        pairings,
        limit_pairing: limit,
        errors,
        monotone,
    })
}
