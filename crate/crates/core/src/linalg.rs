//! Dense kernels for the small (m ≲ 10) symmetric positive-definite matrices
//! met in design problems. Matrices are row-major `Vec<f64>` of length `n * n`.

use crate::error::{DesignError, Result};

/// Relative pivot threshold below which a matrix is declared singular.
pub const PIVOT_RTOL: f64 = 1e-14;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes a symmetric matrix, reading only its lower triangle.
    ///
    /// Fails with [`DesignError::SingularDesign`] as soon as a pivot drops
    /// below `PIVOT_RTOL` times the largest diagonal entry of `a`.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
        let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0_f64, f64::max);
        let threshold = PIVOT_RTOL * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut pivot = a[j * n + j];
            for k in 0..j {
                pivot -= l[j * n + k] * l[j * n + k];
            }
            if !(pivot > threshold) || !pivot.is_finite() {
                return Err(DesignError::SingularDesign { pivot, threshold });
            }
            let ljj = pivot.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum::<f64>()
    }

    /// Solves `L y = b` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn forward_solve(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn backward_solve(&self, y: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
    }

    /// Full symmetric inverse `A⁻¹ = L⁻ᵀ L⁻¹`.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[j] = 1.0;
            self.forward_solve(&mut col);
            self.backward_solve(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        // symmetrize away the last-bit asymmetry of the two triangular solves
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (inv[i * n + j] + inv[j * n + i]);
                inv[i * n + j] = v;
                inv[j * n + i] = v;
            }
        }
        inv
    }
}

/// Quadratic form `xᵀ A x` for a symmetric `A`.
#[inline]
pub fn quad_form(a: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let mut s = 0.0;
        for j in 0..n {
            s += row[j] * x[j];
        }
        acc += x[i] * s;
    }
    acc
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factor_and_invert_3x3() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let ch = Cholesky::factor(&a, 3).unwrap();
        let inv = ch.inverse();
        let prod = mat_mul(&a, &inv, 3);
        for (p, e) in prod.iter().zip(identity(3)) {
            assert!((p - e).abs() < 1e-12);
        }
        // det by cofactor expansion
        let det = 4.0 * (15.0 - 1.0) - 2.0 * (6.0 - 0.6) + 0.6 * (2.0 - 3.0);
        assert_relative_eq!(ch.log_det(), f64::ln(det), max_relative = 1e-12);
    }

    #[test]
    fn rank_deficient_is_singular() {
        let a = [1.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            Cholesky::factor(&a, 2),
            Err(DesignError::SingularDesign { .. })
        ));
        // rank one, off-diagonal
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(Cholesky::factor(&a, 2).is_err());
    }

    #[test]
    fn relative_pivot_threshold() {
        let tiny = [1.0, 0.0, 0.0, 1e-15];
        assert!(Cholesky::factor(&tiny, 2).is_err());
        let small = [1.0, 0.0, 0.0, 1e-13];
        assert!(Cholesky::factor(&small, 2).is_ok());
    }

    #[test]
    fn eigenvalues_sorted() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let ev = symmetric_eigenvalues(&a, 2);
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 3.0, epsilon = 1e-12);
    }
}
