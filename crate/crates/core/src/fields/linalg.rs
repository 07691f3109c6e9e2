//! Small dense and banded solvers for the per-wavenumber vertical problems.

use num_complex::Complex;

use crate::Real;

use super::FieldError;

/// LU factorization with partial pivoting of a square row-major matrix.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self, FieldError> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.magnitude()));
        let tiny = scale * T::epsilon() * T::from_usize_lossy(n);
        for col in 0..n {
            let (piv, pval) = (col..n)
                .map(|r| (r, a[r * n + col].magnitude()))
                .fold((col, T::zero()), |best, c| if c.1 > best.1 { c } else { best });
            if pval <= tiny {
                return Err(FieldError::Singular);
            }
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                perm.swap(piv, col);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                a[r * n + col] = f;
                if f != T::zero() {
                    for j in col + 1..n {
                        let v = a[col * n + j];
                        a[r * n + j] -= f * v;
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for j in 0..r {
                s -= self.lu[r * n + j] * x[j];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for j in r + 1..n {
                s -= self.lu[r * n + j] * x[j];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }

    /// Solves with a complex right side (the matrix is real).
    pub fn solve_complex(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let re: Vec<T> = b.iter().map(|c| c.re).collect();
        let im: Vec<T> = b.iter().map(|c| c.im).collect();
        let xr = self.solve(&re);
        let xi = self.solve(&im);
        xr.into_iter().zip(xi).map(|(r, i)| Complex::new(r, i)).collect()
    }
}

/// Thomas algorithm for a real tridiagonal matrix and complex right side.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &mut [Complex<T>]) {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut beta = diag[0];
    c[0] = if n > 1 { upper[0] / beta } else { T::zero() };
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / beta;
        }
        rhs[i] = (rhs[i] - rhs[i - 1] * lower[i]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - rhs[i + 1] * c[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_pivoting_system() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let lu = DenseLu::factor(3, a.clone()).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|r| (0..3).map(|j| a[r * 3 + j] * x_true[j]).sum()).collect();
        let x = lu.solve(&b);
        for (p, q) in x.iter().zip(x_true) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_flags_singular() {
        assert!(matches!(
            DenseLu::factor(2, vec![1.0, 2.0, 2.0, 4.0]),
            Err(FieldError::Singular)
        ));
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 6;
        let lower = vec![0.0, -1.0, -1.0, -1.0, -1.0, -1.0];
        let diag = vec![4.0; n];
        let upper = vec![-1.0, -1.0, -1.0, -1.0, -1.0, 0.0];
        let x_true: Vec<Complex<f64>> = (0..n).map(|i| Complex::new(i as f64, 1.0 - i as f64)).collect();
        let mut rhs: Vec<Complex<f64>> = (0..n)
            .map(|i| {
                let mut s = x_true[i] * diag[i];
                if i > 0 {
                    s = s + x_true[i - 1] * lower[i];
                }
                if i + 1 < n {
                    s = s + x_true[i + 1] * upper[i];
                }
                s
            })
            .collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        for (a, b) in rhs.iter().zip(&x_true) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
