//! Tridiagonal linear solvers.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `A x = b` for a real tridiagonal `A` with sub-diagonal `lower`
/// (length n-1), diagonal `diag` (n) and super-diagonal `upper` (n-1), using
/// Gaussian elimination with partial pivoting.
pub fn solve_real(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::Numerical("tridiagonal system has inconsistent sizes".into()));
    }
    let mut dl = lower.to_vec();
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return Err(Error::Numerical(format!("singular tridiagonal system at row {i}")));
            }
            let m = dl[i] / d[i];
            d[i + 1] -= m * du[i];
            b[i + 1] -= m * b[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            // swap rows i and i+1
            let m = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - m * tmp;
            du[i] = tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -m;
            }
            b.swap(i, i + 1);
            b[i + 1] -= m * b[i];
        }
        dl[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        return Err(Error::Numerical("singular tridiagonal system at last row".into()));
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("tridiagonal solve produced non-finite values".into()));
    }
    Ok(x)
}

/// LU factorisation (no pivoting) of a complex symmetric tridiagonal matrix
/// whose Hermitian part is positive definite, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct ComplexTridiagonalLu {
    off: Vec<Complex64>,
    /// Multipliers `l_i`.
    l: Vec<Complex64>,
    /// Pivots `u_i`.
    u: Vec<Complex64>,
}

impl ComplexTridiagonalLu {
    pub fn new(diag: &[Complex64], off: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        if off.len() + 1 != n {
            return Err(Error::Numerical("tridiagonal system has inconsistent sizes".into()));
        }
        let mut u = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        u.push(diag[0]);
        for i in 1..n {
            if u[i - 1].norm() == 0.0 {
                return Err(Error::Numerical(format!("zero pivot at row {}", i - 1)));
            }
            let li = off[i - 1] / u[i - 1];
            l.push(li);
            u.push(diag[i] - li * off[i - 1]);
        }
        if u[n - 1].norm() == 0.0 {
            return Err(Error::Numerical("zero pivot at last row".into()));
        }
        Ok(ComplexTridiagonalLu { off: off.to_vec(), l, u })
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.u.len();
        for i in 1..n {
            let prev = b[i - 1];
            b[i] -= self.l[i - 1] * prev;
        }
        b[n - 1] /= self.u[n - 1];
        for i in (0..n - 1).rev() {
            let next = b[i + 1];
            b[i] = (b[i] - self.off[i] * next) / self.u[i];
        }
    }
}
