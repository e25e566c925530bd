//! Scalar functionals of radial fields: mass, energy, the Hardy functional,
//! the action `S_omega`, the Nehari functional `K_omega` and the virial
//! functional `Q`, plus the closed-form Nehari and `Q` projections.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexRadialField, RealRadialField};
use crate::operator::{core_moments, node_weights};
use crate::params::Params;

/// All scalar functionals of one field, computed in a single pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    /// `||v||_{L^2}^2`
    pub mass: f64,
    /// `E(v) = hardy_sq / 2 - lp_alpha2 / (alpha + 2)`
    pub energy: f64,
    /// `||grad v||_{L^2}^2`
    pub grad_sq: f64,
    /// `|| |x|^{-1} v ||_{L^2}^2`
    pub inv_sq: f64,
    /// Hardy functional `grad_sq - c inv_sq`
    pub hardy_sq: f64,
    /// `H_omega = hardy_sq + omega mass`
    pub h_omega: f64,
    /// `S_omega = E + omega mass / 2`
    pub s_omega: f64,
    /// `K_omega = h_omega - lp_alpha2`
    pub k_omega: f64,
    /// `Q = hardy_sq - d alpha / (2 (alpha + 2)) lp_alpha2`
    pub q: f64,
    /// `||v||_{L^{alpha+2}}^{alpha+2}`
    pub lp_alpha2: f64,
}

impl FunctionalReport {
    /// Assembles the report from the four primitive integrals.
    pub fn from_parts(params: &Params, grad_sq: f64, inv_sq: f64, mass: f64, lp_alpha2: f64) -> Self {
        let a = params.alpha;
        let hardy_sq = grad_sq - params.c * inv_sq;
        let energy = 0.5 * hardy_sq - lp_alpha2 / (a + 2.0);
        let h_omega = hardy_sq + params.omega * mass;
        FunctionalReport {
            mass,
            energy,
            grad_sq,
            inv_sq,
            hardy_sq,
            h_omega,
            s_omega: energy + 0.5 * params.omega * mass,
            k_omega: h_omega - lp_alpha2,
            q: hardy_sq - params.q_coeff() * lp_alpha2,
            lp_alpha2,
        }
    }

    /// `||v||_{H^1}^2 = grad_sq + mass`.
    pub fn h1_sq(&self) -> f64 {
        self.grad_sq + self.mass
    }

    /// `S_omega` via `K_omega / 2 + alpha / (2 (alpha + 2)) lp_alpha2`.
    pub fn s_omega_via_lp(&self, params: &Params) -> f64 {
        let a = params.alpha;
        0.5 * self.k_omega + a / (2.0 * (a + 2.0)) * self.lp_alpha2
    }

    /// `S_omega` via `K_omega / (alpha + 2) + alpha / (2 (alpha + 2)) H_omega`.
    pub fn s_omega_via_h(&self, params: &Params) -> f64 {
        let a = params.alpha;
        self.k_omega / (a + 2.0) + a / (2.0 * (a + 2.0)) * self.h_omega
    }

    /// Closed form of `S_omega(v^lambda)` along the dilation fibre.
    pub fn action_along_dilation(&self, params: &Params, lambda: f64) -> f64 {
        let a = params.alpha;
        0.5 * lambda * lambda * self.hardy_sq + 0.5 * params.omega * self.mass
            - lambda.powf(params.dim() * a / 2.0) / (a + 2.0) * self.lp_alpha2
    }
}

/// `|x|^{alpha+2}` evaluated as `exp((alpha + 2) ln |x|)`, zero at `x = 0`.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let m = x.abs();
    if m == 0.0 {
        0.0
    } else {
        (p * m.ln()).exp()
    }
}

/// `||v||^2_{H^1_c} = ||grad v||^2 - c || v / |x| ||^2`.
///
/// Includes the contribution of the Frobenius extension below `r_min`.
pub fn hardy_sq(v: &RealRadialField, params: &Params) -> f64 {
    let g = v.grid();
    let sq: Vec<f64> = v.values().iter().map(|x| x * x).collect();
    let core = core_moments(g, params);
    let v0 = sq[0];
    g.gradient_energy(v.values()) + core.grad * v0 - params.c * (g.integrate(&sq, -2) + core.inv_sq * v0)
}

pub fn functional_report(v: &RealRadialField, params: &Params) -> FunctionalReport {
    let g = v.grid();
    let p = params.alpha + 2.0;
    let (wm, wl) = node_weights(g, params);
    let wi = g.weights_inv_sq();
    let mut mass = 0.0;
    let mut inv_sq = 0.0;
    let mut lp = 0.0;
    for (i, &x) in v.values().iter().enumerate() {
        let x2 = x * x;
        mass += wm[i] * x2;
        inv_sq += wi[i] * x2;
        lp += wl[i] * abs_pow(x, p);
    }
    let core = core_moments(g, params);
    let v0 = v.values()[0] * v.values()[0];
    let grad_sq = g.gradient_energy(v.values()) + core.grad * v0;
    FunctionalReport::from_parts(params, grad_sq, inv_sq + core.inv_sq * v0, mass, lp)
}

pub fn complex_report(u: &ComplexRadialField, params: &Params) -> FunctionalReport {
    let g = u.grid();
    let p = params.alpha + 2.0;
    let (wm, wl) = node_weights(g, params);
    let wi = g.weights_inv_sq();
    let mut mass = 0.0;
    let mut inv_sq = 0.0;
    let mut lp = 0.0;
    for (i, z) in u.values().iter().enumerate() {
        let m2 = z.norm_sqr();
        mass += wm[i] * m2;
        inv_sq += wi[i] * m2;
        lp += wl[i] * abs_pow(m2.sqrt(), p);
    }
    let core = core_moments(g, params);
    let v0 = u.values()[0].norm_sqr();
    let grad_sq = g.gradient_energy_by(u.values(), |a: &Complex64, b: &Complex64| (b - a).norm_sqr()) + core.grad * v0;
    FunctionalReport::from_parts(params, grad_sq, inv_sq + core.inv_sq * v0, mass, lp)
}

/// Rescales `v` onto the Nehari manifold `{K_omega = 0}`.
///
/// Returns `mu0 = (H_omega(v) / ||v||^{alpha+2}_{L^{alpha+2}})^{1/alpha}` and
/// `mu0 v`.
pub fn nehari_project(v: &RealRadialField, params: &Params) -> Result<(f64, RealRadialField)> {
    let rep = functional_report(v, params);
    let mu0 = nehari_factor(&rep, params)?;
    Ok((mu0, v.scaled(mu0)))
}

pub fn nehari_factor(rep: &FunctionalReport, params: &Params) -> Result<f64> {
    if !(rep.lp_alpha2 > 0.0) {
        return Err(Error::Degenerate("Nehari projection of the zero field".into()));
    }
    if !(rep.h_omega > 0.0) {
        return Err(Error::Degenerate("H_omega must be positive for the Nehari projection".into()));
    }
    Ok((rep.h_omega / rep.lp_alpha2).powf(1.0 / params.alpha))
}

/// The unique `lambda_1 > 0` with `Q(v^{lambda_1}) = 0`:
/// `(hardy_sq / (d alpha / (2 (alpha + 2)) lp_alpha2))^{2 / (d alpha - 4)}`.
pub fn q_scaling_root(v: &RealRadialField, params: &Params) -> Result<f64> {
    let rep = functional_report(v, params);
    q_root_from_report(&rep, params)
}

pub fn q_root_from_report(rep: &FunctionalReport, params: &Params) -> Result<f64> {
    if !(rep.lp_alpha2 > 0.0) {
        return Err(Error::Degenerate("Q scaling root undefined for lp_alpha2 = 0".into()));
    }
    if !(rep.hardy_sq > 0.0) {
        return Err(Error::Degenerate("Q scaling root needs a positive Hardy functional".into()));
    }
    let da = params.dim() * params.alpha;
    Ok((rep.hardy_sq / (params.q_coeff() * rep.lp_alpha2)).powf(2.0 / (da - 4.0)))
}

/// Constants `0 < c1 <= c2` with `c1 ||v||_{H^1}^2 <= H_omega(v) <= c2 ||v||_{H^1}^2`,
/// from the sharp Hardy inequality.
pub fn equivalent_norm_constants(params: &Params) -> (f64, f64) {
    let lambda = params.lambda_d();
    let (grad_lo, grad_hi) =
        if params.c >= 0.0 { (1.0 - params.c / lambda, 1.0) } else { (1.0, 1.0 - params.c / lambda) };
    (grad_lo.min(params.omega), grad_hi.max(params.omega))
}
