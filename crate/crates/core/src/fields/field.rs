use std::ops::{Index, IndexMut};

use crate::Real;

use super::{FieldError, Grid};

/// Real samples of a scalar quantity on every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_vec(grid: Grid<T>, values: Vec<T>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, z)` at every node.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let values = grid.nodes().map(|(_, _, x, z)| f(x, z)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, k: usize) -> T {
        self.values[self.grid.idx(i, k)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<(), FieldError> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(FieldError::NonFinite)
        }
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<(), FieldError> {
        if self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(FieldError::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise map with access to the node coordinates `(x, z)`.
    pub fn map_nodes(&self, f: impl Fn(T, T, T) -> T) -> Self {
        let values = self.grid.nodes().map(|(i, k, x, z)| f(x, z, self.at(i, k))).collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert!(self.grid.same_shape(&other.grid));
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: T, other: &Self) {
        debug_assert!(self.grid.same_shape(&other.grid));
        for (v, &o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// Quadrature `∫ f dx` with the grid's weights.
    pub fn integral(&self) -> T {
        let g = &self.grid;
        let dx = g.dx();
        let mut acc = T::zero();
        for k in 0..g.nz() {
            let row: T = self.values[k * g.nx()..(k + 1) * g.nx()]
                .iter()
                .fold(T::zero(), |a, &b| a + b);
            acc += row * g.z_weight(k);
        }
        acc * dx
    }

    /// `(1/m(Ω)) ∫ f dx`
    pub fn mean(&self) -> T {
        self.integral() / self.grid.measure()
    }

    pub fn remove_mean(&mut self) -> T {
        let m = self.mean();
        for v in &mut self.values {
            *v -= m;
        }
        m
    }

    /// L² inner product with the grid quadrature.
    pub fn inner(&self, other: &Self) -> T {
        self.mul(other).integral()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &b| a.max(b.magnitude()))
    }

    /// Largest absolute value on the two wall rows (zero on a torus).
    pub fn wall_max_abs(&self) -> T {
        let g = &self.grid;
        if !g.is_box() {
            return T::zero();
        }
        let top = g.nz() - 1;
        (0..g.nx()).fold(T::zero(), |a, i| {
            a.max(self.at(i, 0).magnitude()).max(self.at(i, top).magnitude())
        })
    }

    /// Copy with the wall rows set to zero.
    pub fn zero_walls(&mut self) {
        let g = self.grid;
        if g.is_box() {
            let top = g.nz() - 1;
            for i in 0..g.nx() {
                self.values[g.idx(i, 0)] = T::zero();
                self.values[g.idx(i, top)] = T::zero();
            }
        }
    }

    pub fn cast<U: Real>(&self) -> ScalarField<U> {
        let g = &self.grid;
        let grid = Grid::new(
            g.kind(),
            g.nx(),
            g.nz(),
            U::lit(g.lx().as_f64()),
            U::lit(g.lz().as_f64()),
        )
        .expect("valid grid stays valid");
        ScalarField {
            grid,
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

impl<T: Real> Index<(usize, usize)> for ScalarField<T> {
    type Output = T;
    fn index(&self, (i, k): (usize, usize)) -> &T {
        &self.values[self.grid.idx(i, k)]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ScalarField<T> {
    fn index_mut(&mut self, (i, k): (usize, usize)) -> &mut T {
        let n = self.grid.idx(i, k);
        &mut self.values[n]
    }
}

/// Two-component vector field; both components live on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    components: [ScalarField<T>; 2],
}

impl<T: Real> VectorField<T> {
    pub fn new(u1: ScalarField<T>, u2: ScalarField<T>) -> Result<Self, FieldError> {
        u1.check_same_grid(&u2)?;
        Ok(Self { components: [u1, u2] })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            components: [ScalarField::zeros(grid), ScalarField::zeros(grid)],
        }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T, T) -> [T; 2]) -> Self {
        let u1 = ScalarField::from_fn(grid, |x, z| f(x, z)[0]);
        let u2 = ScalarField::from_fn(grid, |x, z| f(x, z)[1]);
        Self { components: [u1, u2] }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.components[0].grid()
    }
    pub fn u1(&self) -> &ScalarField<T> {
        &self.components[0]
    }
    pub fn u2(&self) -> &ScalarField<T> {
        &self.components[1]
    }
    pub fn component(&self, c: usize) -> &ScalarField<T> {
        &self.components[c]
    }
    pub fn component_mut(&mut self, c: usize) -> &mut ScalarField<T> {
        &mut self.components[c]
    }
    pub fn components(&self) -> &[ScalarField<T>; 2] {
        &self.components
    }
    pub fn into_components(self) -> [ScalarField<T>; 2] {
        self.components
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<(), FieldError> {
        self.components[0].check_same_grid(&other.components[0])
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            components: [self.u1().add(o.u1()), self.u2().add(o.u2())],
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            components: [self.u1().sub(o.u1()), self.u2().sub(o.u2())],
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            components: [self.u1().scaled(s), self.u2().scaled(s)],
        }
    }

    pub fn axpy(&mut self, a: T, o: &Self) {
        self.components[0].axpy(a, o.u1());
        self.components[1].axpy(a, o.u2());
    }

    pub fn inner(&self, o: &Self) -> T {
        self.u1().inner(o.u1()) + self.u2().inner(o.u2())
    }

    /// Component-wise domain means.
    pub fn mean(&self) -> [T; 2] {
        [self.u1().mean(), self.u2().mean()]
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_magnitude(&self) -> T {
        self.u1()
            .values()
            .iter()
            .zip(self.u2().values())
            .fold(T::zero(), |a, (&p, &q)| a.max((p * p + q * q).sqrt()))
    }

    pub fn wall_max_abs(&self) -> T {
        self.u1().wall_max_abs().max(self.u2().wall_max_abs())
    }

    pub fn zero_walls(&mut self) {
        for c in &mut self.components {
            c.zero_walls();
        }
    }
}

/// Norms of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport<T> {
    /// `‖f‖_{L²}`
    pub l2: T,
    /// `‖f‖_{H¹} = (‖f‖² + ‖∇f‖²)^{1/2}`
    pub h1: T,
    pub linf: T,
    /// `‖∇f‖_{L²}`
    pub grad_l2: T,
}

impl<T: Real> NormReport<T> {
    pub fn zero() -> Self {
        Self {
            l2: T::zero(),
            h1: T::zero(),
            linf: T::zero(),
            grad_l2: T::zero(),
        }
    }
}
