//! Localized virial machinery: the cutoff profile, the virial potential
//! `V_R(t) = int phi_R |u|^2 dx` with `phi_R = R^2 theta(r / R)`, the three
//! equivalent forms of its leading second derivative, and Glassey's concavity
//! bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexRadialField;
use crate::functionals::complex_report;
use crate::params::Params;

fn check_r(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("cutoff profile needs r >= 0 (got {r})")))
    }
}

fn theta_unchecked(r: f64) -> f64 {
    if r <= 1.0 {
        r * r
    } else if r <= 2.0 {
        4.0 * r - r * r - 2.0
    } else {
        2.0
    }
}

/// `theta(r) = r^2` on `[0, 1]`, `4r - r^2 - 2` on `[1, 2]`, `2` beyond.
pub fn theta(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(theta_unchecked(r))
}

pub fn theta_prime(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(if r <= 1.0 {
        2.0 * r
    } else if r <= 2.0 {
        2.0 * (2.0 - r)
    } else {
        0.0
    })
}

/// Second derivative, taking the left limit at the kinks `r = 1, 2`.
pub fn theta_second(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(if r <= 1.0 {
        2.0
    } else if r <= 2.0 {
        -2.0
    } else {
        0.0
    })
}

/// `phi_R(r) = R^2 theta(r / R)`.
pub fn phi_r(radius: f64, r: f64) -> f64 {
    radius * radius * theta_unchecked(r / radius)
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 1.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("virial radius must exceed 1 (got {radius})")))
    }
}

pub fn virial_potential(u: &ComplexRadialField, radius: f64) -> Result<f64> {
    check_radius(radius)?;
    let g = u.grid();
    Ok(g.weights().iter().zip(g.r()).zip(u.values()).map(|((w, &r), z)| w * phi_r(radius, r) * z.norm_sqr()).sum())
}

/// The three algebraically equal forms of the leading term of `V_R''`, and
/// the size `R^-2 + R^{-(d-1) alpha / 2} hardy_sq^{alpha / 4}` of the
/// localization error (without its unknown constant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialRhs {
    pub rhs1: f64,
    pub rhs2: f64,
    pub rhs3: f64,
    pub err_scale: f64,
}

pub fn virial_rhs(u: &ComplexRadialField, params: &Params, radius: f64) -> Result<VirialRhs> {
    check_radius(radius)?;
    let rep = complex_report(u, params);
    let (d, a) = (params.dim(), params.alpha);
    Ok(VirialRhs {
        rhs1: 8.0 * rep.hardy_sq - 4.0 * d * a / (a + 2.0) * rep.lp_alpha2,
        rhs2: 8.0 * rep.q,
        rhs3: 4.0 * d * a * rep.energy - 2.0 * (d * a - 4.0) * rep.hardy_sq,
        err_scale: err_scale(params, radius, rep.hardy_sq),
    })
}

/// `R^-2 + R^{-(d-1) alpha / 2} hardy_sq^{alpha / 4}`.
pub fn err_scale(params: &Params, radius: f64, hardy_sq: f64) -> f64 {
    let (d, a) = (params.dim(), params.alpha);
    radius.powi(-2) + radius.powf(-(d - 1.0) * a / 2.0) * hardy_sq.max(0.0).powf(a / 4.0)
}

/// Sampled `V_R(t)` and `Q(u(t))` with the finite-difference `V_R''`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialSeries {
    pub radius: f64,
    pub times: Vec<f64>,
    pub v_values: Vec<f64>,
    pub q_values: Vec<f64>,
    /// `V_R''` at `times[1..len-1]`.
    pub vpp: Vec<f64>,
}

impl VirialSeries {
    pub fn new(radius: f64, times: Vec<f64>, v_values: Vec<f64>, q_values: Vec<f64>) -> Result<Self> {
        if times.len() != v_values.len() || times.len() != q_values.len() {
            return Err(Error::Parameter("virial series arrays differ in length".into()));
        }
        let vpp = second_differences(&times, &v_values)?;
        Ok(VirialSeries { radius, times, v_values, q_values, vpp })
    }

    /// `|V_R'' - 8 Q|` at the interior samples.
    pub fn localization_error(&self) -> Vec<f64> {
        self.vpp.iter().zip(&self.q_values[1..]).map(|(v, q)| (v - 8.0 * q).abs()).collect()
    }
}

/// Relative tolerance on the ratio of neighbouring sample spacings.
const UNIFORMITY_TOL: f64 = 0.01;

fn second_differences(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if times.len() < 3 {
        return Err(Error::Stencil(format!("need at least 3 samples (got {})", times.len())));
    }
    let mut out = Vec::with_capacity(times.len() - 2);
    for i in 1..times.len() - 1 {
        let h1 = times[i] - times[i - 1];
        let h2 = times[i + 1] - times[i];
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(Error::Stencil(format!("sample times not increasing at index {i}")));
        }
        if (h2 - h1).abs() > UNIFORMITY_TOL * h1.min(h2) {
            return Err(Error::Stencil(format!("sample spacing not locally uniform at index {i} ({h1:e} vs {h2:e})")));
        }
        let s = 2.0 * ((values[i + 1] - values[i]) / h2 - (values[i] - values[i - 1]) / h1) / (h1 + h2);
        out.push(s);
    }
    Ok(out)
}

/// Centered second differences of `series.v_values`.
pub fn second_derivative_series(series: &VirialSeries) -> Result<Vec<f64>> {
    second_differences(&series.times, &series.v_values)
}

/// Second-order one-sided estimate of `V_R'(t_0)`.
pub fn initial_slope(series: &VirialSeries) -> Result<f64> {
    let (t, v) = (&series.times, &series.v_values);
    if t.len() < 3 {
        return Err(Error::Stencil("need at least 3 samples".into()));
    }
    let h = t[1] - t[0];
    Ok((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h))
}

/// Vanishing time of `v0 + v0' t - b t^2 / 2`.
pub fn glassey_bound(v0: f64, v0_prime: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Parameter(format!("Glassey bound needs b > 0 (got {b})")));
    }
    if !(v0 > 0.0) {
        return Err(Error::Parameter(format!("Glassey bound needs V(0) > 0 (got {v0})")));
    }
    Ok((v0_prime + (v0_prime * v0_prime + 2.0 * b * v0).sqrt()) / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BEstimate {
    /// `-max V_R''` over the samples considered.
    pub b_hat: f64,
    /// Whether `b_hat > 0`.
    pub concave: bool,
}

/// `b_hat = -max V_R''` over the interior samples from index `skip` on.
pub fn estimate_b(series: &VirialSeries, skip: usize) -> Result<BEstimate> {
    let vpp = second_derivative_series(series)?;
    let tail = vpp.get(skip..).filter(|s| !s.is_empty()).unwrap_or(&vpp[..]);
    let b_hat = -tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(BEstimate { b_hat, concave: b_hat > 0.0 })
}

/// `a = 2 (d(rad, omega) - S_omega(u_0))`, the uniform bound `Q(u(t)) <= -a`.
pub fn step1_constant(d_rad_omega: f64, s_omega_u0: f64) -> f64 {
    2.0 * (d_rad_omega - s_omega_u0)
}

/// Case-split threshold `mu = (4 d alpha |E(u_0)| + 2) / (d alpha - 4)`.
pub fn mu_threshold(params: &Params, energy: f64) -> f64 {
    let da = params.dim() * params.alpha;
    (4.0 * da * energy.abs() + 2.0) / (da - 4.0)
}
