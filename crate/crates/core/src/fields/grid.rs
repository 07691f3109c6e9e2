use crate::Real;

use super::FieldError;

/// Topology of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    /// Periodic in x, wall-bounded in z with nodes on both walls.
    Box,
    /// Periodic in both directions.
    Torus,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Box => "box",
            GridKind::Torus => "torus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "box" => Some(GridKind::Box),
            "torus" => Some(GridKind::Torus),
            _ => None,
        }
    }
}

/// Uniform tensor grid. Node `(i, k)` sits at `(i*dx, k*dz)`; storage is
/// row-major with x fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    kind: GridKind,
    nx: usize,
    nz: usize,
    lx: T,
    lz: T,
}

pub const MIN_POINTS: usize = 8;

impl<T: Real> Grid<T> {
    pub fn new(kind: GridKind, nx: usize, nz: usize, lx: T, lz: T) -> Result<Self, FieldError> {
        for n in [nx, nz] {
            if n < MIN_POINTS {
                return Err(FieldError::GridTooSmall { n, min: MIN_POINTS });
            }
            if n % 2 != 0 {
                return Err(FieldError::OddPoints { n });
            }
        }
        if !(lx > T::zero() && lz > T::zero() && lx.is_finite() && lz.is_finite()) {
            return Err(FieldError::BadExtent);
        }
        Ok(Self { kind, nx, nz, lx, lz })
    }

    /// Periodic-in-x, wall-bounded box of height `h`.
    pub fn new_box(nx: usize, nz: usize, lx: T, h: T) -> Result<Self, FieldError> {
        Self::new(GridKind::Box, nx, nz, lx, h)
    }

    pub fn new_torus(nx: usize, nz: usize, lx: T, lz: T) -> Result<Self, FieldError> {
        Self::new(GridKind::Torus, nx, nz, lx, lz)
    }

    /// The unit torus `[0,1)²` with `n × n` points.
    pub fn unit_torus(n: usize) -> Result<Self, FieldError> {
        Self::new_torus(n, n, T::one(), T::one())
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn lx(&self) -> T {
        self.lx
    }
    pub fn lz(&self) -> T {
        self.lz
    }
    pub fn len(&self) -> usize {
        self.nx * self.nz
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn is_box(&self) -> bool {
        self.kind == GridKind::Box
    }

    pub fn dx(&self) -> T {
        self.lx / T::from_usize_lossy(self.nx)
    }

    pub fn dz(&self) -> T {
        match self.kind {
            GridKind::Torus => self.lz / T::from_usize_lossy(self.nz),
            GridKind::Box => self.lz / T::from_usize_lossy(self.nz - 1),
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, k: usize) -> usize {
        k * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.dx()
    }

    #[inline]
    pub fn z(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.dz()
    }

    /// Vertical quadrature weight: trapezoid on the box, uniform on the torus.
    #[inline]
    pub fn z_weight(&self, k: usize) -> T {
        let dz = self.dz();
        if self.kind == GridKind::Box && (k == 0 || k + 1 == self.nz) {
            dz * T::lit(0.5)
        } else {
            dz
        }
    }

    /// Domain measure `m(Ω)`.
    pub fn measure(&self) -> T {
        self.lx * self.lz
    }

    /// True for rows that carry boundary conditions instead of equations.
    #[inline]
    pub fn is_wall_row(&self, k: usize) -> bool {
        self.kind == GridKind::Box && (k == 0 || k + 1 == self.nz)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self == other
    }

    /// Iterator over `(i, k, x, z)` for every node.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, T, T)> + '_ {
        (0..self.nz).flat_map(move |k| (0..self.nx).map(move |i| (i, k, self.x(i), self.z(k))))
    }

    /// Same domain with both point counts doubled.
    pub fn refined(&self) -> Result<Self, FieldError> {
        Self::new(self.kind, 2 * self.nx, 2 * self.nz, self.lx, self.lz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_follows_kind() {
        let b = Grid::<f64>::new_box(16, 9 + 1, 2.0, 1.0).unwrap();
        assert!((b.dz() - 1.0 / 9.0).abs() < 1e-15);
        assert!((b.dx() - 0.125).abs() < 1e-15);
        let t = Grid::<f64>::unit_torus(16).unwrap();
        assert!((t.dz() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_and_odd() {
        assert!(matches!(
            Grid::<f64>::new_box(4, 16, 1.0, 1.0),
            Err(FieldError::GridTooSmall { n: 4, .. })
        ));
        assert!(matches!(
            Grid::<f64>::unit_torus(9),
            Err(FieldError::OddPoints { n: 9 })
        ));
        assert!(Grid::<f64>::new_torus(8, 8, -1.0, 1.0).is_err());
    }

    #[test]
    fn trapezoid_weights_sum_to_height() {
        let g = Grid::<f64>::new_box(8, 12, 1.0, 3.0).unwrap();
        let s: f64 = (0..g.nz()).map(|k| g.z_weight(k)).sum();
        assert!((s - 3.0).abs() < 1e-14);
    }
}
