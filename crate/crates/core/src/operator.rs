//! The discrete linear operator `-Delta - c |x|^{-2}` on a radial grid.
//!
//! Fields are treated as piecewise linear on `[r_min, r_max]`, vanishing at
//! `r_max`, and extended below `r_min` by the Frobenius branch
//! `v(r_min) (r / r_min)^{-sigma}`. The extension's exact contributions to
//! every functional are lumped into the first node, which acts as a Robin
//! condition `r v' = -sigma v` at `r_min`.

use crate::grid::{sphere_surface, RadialGrid};
use crate::params::Params;

/// Contributions of the ball `|x| < r_min` under the Frobenius extension,
/// per `v0^2` (or `|v0|^{alpha+2}` for `lp`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreMoments {
    /// to `||grad v||^2`
    pub grad: f64,
    /// to `|| v / |x| ||^2`
    pub inv_sq: f64,
    /// to `||v||^2`
    pub mass: f64,
    /// to `||v||^{alpha+2}_{L^{alpha+2}}`
    pub lp: f64,
}

pub fn core_moments(grid: &RadialGrid, params: &Params) -> CoreMoments {
    let d = params.dim();
    let nu = params.nu_sq().sqrt();
    let sigma = params.sigma();
    let s = sphere_surface(grid.d());
    let r0 = grid.r_min();
    let base = s * r0.powf(d - 2.0) / (2.0 * nu);
    let vol = s * r0.powf(d);
    CoreMoments {
        grad: sigma * sigma * base,
        inv_sq: base,
        mass: vol / (d - 2.0 * sigma),
        lp: vol / (d - (params.alpha + 2.0) * sigma),
    }
}

/// Quadrature weights for `||v||^2` and `||v||^{alpha+2}`, including the core.
pub fn node_weights(grid: &RadialGrid, params: &Params) -> (Vec<f64>, Vec<f64>) {
    let core = core_moments(grid, params);
    let mut mass = grid.weights().to_vec();
    let mut lp = mass.clone();
    mass[0] += core.mass;
    lp[0] += core.lp;
    (mass, lp)
}

/// Symmetric tridiagonal matrix `A` with `v^T A v = hardy_sq(v)`; the last
/// node is pinned to zero.
#[derive(Debug, Clone)]
pub struct HardyOperator {
    /// Diagonal, length n.
    pub diag: Vec<f64>,
    /// Off-diagonal, length n - 1.
    pub off: Vec<f64>,
    /// Mass weights, see [`node_weights`].
    pub mass: Vec<f64>,
    /// `L^{alpha+2}` weights.
    pub lp: Vec<f64>,
}

impl HardyOperator {
    pub fn new(grid: &RadialGrid, params: &Params) -> Self {
        let n = grid.len();
        let k = grid.stiffness();
        let m = grid.weights_inv_sq();
        let core = core_moments(grid, params);
        let mut diag: Vec<f64> = (0..n).map(|i| -params.c * m[i]).collect();
        for (i, ki) in k.iter().enumerate() {
            diag[i] += ki;
            diag[i + 1] += ki;
        }
        diag[0] += core.grad - params.c * core.inv_sq;
        let off = k.iter().map(|x| -x).collect();
        let (mass, lp) = node_weights(grid, params);
        HardyOperator { diag, off, mass, lp }
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }
}
