use serde::{Deserialize, Serialize};

use super::GroundState;
use crate::error::{Error, Result};
use crate::field::RealRadialField;
use crate::functionals::{functional_report, FunctionalReport};

/// Relative residuals of the Pohozaev-type identities satisfied by a ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    /// `|K_omega| / H_omega`
    pub res_nehari: f64,
    /// `(1 - d/2) H_c - (d omega / 2) M + d / (alpha + 2) P`, relative to the
    /// sum of the magnitudes of its terms.
    pub res_pohozaev: f64,
    /// `omega M = (4 - (d-2) alpha) / (2 (alpha + 2)) P`, relative to `omega M`.
    pub res_ratio_mass: f64,
    /// `omega M = (4 - (d-2) alpha) / (d alpha) H_c`, relative to `omega M`.
    pub res_ratio_hardy: f64,
}

impl PohozaevReport {
    pub fn max(&self) -> f64 {
        self.res_nehari.max(self.res_pohozaev).max(self.res_ratio_mass).max(self.res_ratio_hardy)
    }
}

pub fn pohozaev_report(gs: &GroundState) -> PohozaevReport {
    let p = &gs.params;
    let r = &gs.report;
    let (d, a, w) = (p.dim(), p.alpha, p.omega);
    let poho_terms = [(1.0 - d / 2.0) * r.hardy_sq, -d * w / 2.0 * r.mass, d / (a + 2.0) * r.lp_alpha2];
    let poho_scale: f64 = poho_terms.iter().map(|x| x.abs()).sum();
    let wm = w * r.mass;
    let top = 4.0 - (d - 2.0) * a;
    PohozaevReport {
        res_nehari: r.k_omega.abs() / r.h_omega,
        res_pohozaev: poho_terms.iter().sum::<f64>().abs() / poho_scale,
        res_ratio_mass: (wm - top / (2.0 * (a + 2.0)) * r.lp_alpha2).abs() / wm,
        res_ratio_hardy: (wm - top / (d * a) * r.hardy_sq).abs() / wm,
    }
}

/// `S_omega`, `Q` and `K_omega` along the dilation fibre `lambda -> phi^lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub lambdas: Vec<f64>,
    pub s_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub k_values: Vec<f64>,
}

impl ScalingCurve {
    /// Index of the largest action value.
    pub fn argmax_s(&self) -> usize {
        self.s_values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
            .0
    }
}

pub fn scaling_curve(gs: &GroundState, lambdas: &[f64]) -> Result<ScalingCurve> {
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Parameter("scaling factors must be positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("scaling factors must be strictly increasing".into()));
    }
    let mut curve = ScalingCurve {
        lambdas: lambdas.to_vec(),
        s_values: Vec::with_capacity(lambdas.len()),
        q_values: Vec::with_capacity(lambdas.len()),
        k_values: Vec::with_capacity(lambdas.len()),
    };
    for &l in lambdas {
        let rep = functional_report(&gs.profile.scale(l)?, &gs.params);
        curve.s_values.push(rep.s_omega);
        curve.q_values.push(rep.q);
        curve.k_values.push(rep.k_omega);
    }
    Ok(curve)
}

/// Membership of a field (given by its functionals) in
/// `{S_omega < d(rad, omega), Q < 0}`, with a margin of `1e-10` of the
/// ground-state scale on both inequalities.
pub fn report_in_blowup_set(rep: &FunctionalReport, gs: &GroundState) -> bool {
    let s_margin = 1e-10 * gs.d_rad_omega.abs();
    let q_margin = 1e-10 * gs.report.hardy_sq.abs();
    rep.lp_alpha2 > 0.0 && rep.s_omega < gs.d_rad_omega - s_margin && rep.q < -q_margin
}

pub fn in_blowup_set(v: &RealRadialField, gs: &GroundState) -> bool {
    report_in_blowup_set(&functional_report(v, &gs.params), gs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimate {
    /// `Q(v)`
    pub lhs: f64,
    /// `2 (S_omega(v) - d(rad, omega))`
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `Q(v) <= 2 (S_omega(v) - S_omega(phi))` for `v` in the blow-up set.
pub fn key_estimate_check(v: &RealRadialField, gs: &GroundState) -> Result<KeyEstimate> {
    let rep = functional_report(v, &gs.params);
    key_estimate_from_report(&rep, gs)
}

pub fn key_estimate_from_report(rep: &FunctionalReport, gs: &GroundState) -> Result<KeyEstimate> {
    if !report_in_blowup_set(rep, gs) {
        return Err(Error::Precondition("key estimate requires S_omega(v) < d(rad, omega) and Q(v) < 0".into()));
    }
    let lhs = rep.q;
    let rhs = 2.0 * (rep.s_omega - gs.d_rad_omega);
    Ok(KeyEstimate { lhs, rhs, holds: lhs <= rhs + 1e-8 * rhs.abs() })
}
