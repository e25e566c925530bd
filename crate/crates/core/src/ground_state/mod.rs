//! Radial ground states: the Nehari-projected descent solver, the shooting
//! oracle, and the variational diagnostics built on top of a ground state.

mod diagnostics;
mod ode;
mod shooting;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use diagnostics::{
    in_blowup_set, key_estimate_check, key_estimate_from_report, pohozaev_report, report_in_blowup_set, scaling_curve,
    KeyEstimate, PohozaevReport, ScalingCurve,
};
pub use ode::{integrate_dopri, OdeOptions};
pub use shooting::{shoot_ground_state, ShootingOptions};

use crate::error::{Error, Result};
use crate::field::RealRadialField;
use crate::functionals::{abs_pow, functional_report, nehari_project, FunctionalReport};
use crate::grid::RadialGrid;
use crate::operator::{node_weights, HardyOperator};
use crate::params::Params;
use crate::tridiag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ProjectedGradient,
    Shooting,
}

/// A converged radial ground state with its scalar diagnostics.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub profile: RealRadialField,
    pub params: Params,
    pub report: FunctionalReport,
    /// Minimal action `d(rad, omega) = S_omega(profile)`.
    pub d_rad_omega: f64,
    /// Normalised L^2 norm of the elliptic residual.
    pub residual: f64,
    /// Origin exponent of the profile.
    pub sigma: f64,
    pub method: Method,
    pub iterations: usize,
}

impl GroundState {
    fn from_profile(profile: RealRadialField, params: Params, method: Method, iterations: usize) -> Self {
        let report = functional_report(&profile, &params);
        let residual = residual_norm(&profile, &params);
        GroundState {
            sigma: params.sigma(),
            profile,
            params,
            d_rad_omega: report.s_omega,
            report,
            residual,
            method,
            iterations,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profile.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Target normalised residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial descent step; `None` starts from the full preconditioned step.
    pub step: Option<f64>,
    /// Residual below which Newton iterations replace the descent; zero
    /// disables the Newton stage.
    pub newton_switch: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-6, max_iter: 50_000, step: None, newton_switch: 1e-4 }
    }
}

/// Pointwise residual `-Delta v + omega v - c |x|^{-2} v - |v|^alpha v` of the
/// discrete elliptic equation. The discrete Laplacian is the one induced by
/// the Hardy functional, so the residual is the L^2 gradient of `S_omega`.
pub fn elliptic_residual(v: &RealRadialField, params: &Params) -> RealRadialField {
    let op = HardyOperator::new(v.grid(), params);
    v.with_values(residual_values(&op, v, params))
}

fn residual_values(op: &HardyOperator, v: &RealRadialField, params: &Params) -> Vec<f64> {
    let (wm, wl) = (&op.mass, &op.lp);
    let av = op.apply(v.values());
    let n = av.len();
    let mut g: Vec<f64> = (0..n)
        .map(|i| {
            let x = v.values()[i];
            (av[i] - wl[i] * abs_pow(x, params.alpha) * x) / wm[i] + params.omega * x
        })
        .collect();
    // pinned node
    g[n - 1] = 0.0;
    g
}

/// `||elliptic_residual(v)||_{L^2} / ||v||_{H^1}`.
pub fn residual_norm(v: &RealRadialField, params: &Params) -> f64 {
    let g = elliptic_residual(v, params);
    let rep = functional_report(v, params);
    let (wm, _) = node_weights(v.grid(), params);
    let num: f64 = g.values().iter().zip(&wm).map(|(g, w)| w * g * g).sum();
    if rep.h1_sq() == 0.0 {
        return 0.0;
    }
    (num / rep.h1_sq()).sqrt()
}

/// Deterministic starting profile `exp(-r^2/2) (r^2 + r_s^2)^{-sigma^+/2}`.
fn initial_guess(grid: &Arc<RadialGrid>, params: &Params) -> RealRadialField {
    let sigma = params.sigma().max(0.0);
    let rs = 10.0 * grid.r_min();
    let mut values: Vec<f64> =
        grid.r().iter().map(|&r| (-params.omega * r * r / 2.0).exp() * (r * r + rs * rs).powf(-sigma / 2.0)).collect();
    let n = values.len();
    values[n - 1] = 0.0;
    RealRadialField::new(grid.clone(), values).expect("initial guess is finite").with_origin_exponent(params.sigma())
}

fn weighted_residual(op: &HardyOperator, v: &RealRadialField, params: &Params) -> (Vec<f64>, f64) {
    let g = residual_values(op, v, params);
    let h1 = functional_report(v, params).h1_sq();
    let num: f64 = g.iter().zip(&op.mass).map(|(g, w)| w * g * g).sum();
    (g, (num / h1).sqrt())
}

/// Newton iterations on the discrete elliptic equation from a descent
/// iterate. Stops once the residual is below `tol` and no longer drops by a
/// factor of ten; gives up (returning `None`) if a step fails to reduce the
/// residual before `tol` is met or breaks positivity.
fn newton_polish(
    op: &HardyOperator,
    v: &RealRadialField,
    params: &Params,
    tol: f64,
) -> Option<(RealRadialField, usize)> {
    let n = v.values().len();
    let m = n - 1;
    let mut v = v.clone();
    let (mut g, mut res) = weighted_residual(op, &v, params);
    for k in 0..30 {
        let jd: Vec<f64> = (0..m)
            .map(|i| {
                let x = v.values()[i];
                op.diag[i] + params.omega * op.mass[i] - (params.alpha + 1.0) * op.lp[i] * abs_pow(x, params.alpha)
            })
            .collect();
        let rhs: Vec<f64> = (0..m).map(|i| op.mass[i] * g[i]).collect();
        let delta = tridiag::solve_real(&op.off[..m - 1], &jd, &op.off[..m - 1], &rhs).ok()?;
        let mut next = v.values().to_vec();
        for (x, d) in next[..m].iter_mut().zip(&delta) {
            *x -= d;
        }
        if next[..m].iter().any(|x| !(*x > 0.0)) {
            return if res <= tol { Some((v, k)) } else { None };
        }
        let next = v.with_values(next);
        let (ng, nres) = weighted_residual(op, &next, params);
        if !(nres < res) {
            return if res <= tol { Some((v, k)) } else { None };
        }
        let stalled = nres > 0.1 * res;
        v = next;
        g = ng;
        res = nres;
        if res <= tol && stalled {
            return Some((v, k + 1));
        }
    }
    if res <= tol {
        Some((v, 30))
    } else {
        None
    }
}

/// Minimises `S_omega` on the Nehari manifold by projected, preconditioned
/// gradient descent.
///
/// Each iteration takes the gradient `g` of `S_omega`, preconditions it with
/// the operator of `H_omega` (a tridiagonal solve), steps `v - tau p` with a
/// backtracking line search on `S_omega` after Nehari projection, and clamps
/// negative values to zero before re-projecting.
pub fn solve_ground_state(params: &Params, grid: &Arc<RadialGrid>, options: &SolveOptions) -> Result<GroundState> {
    params.validate()?;
    if !(options.tol > 0.0) || options.max_iter == 0 {
        return Err(Error::Parameter("solver needs tol > 0 and max_iter > 0".into()));
    }
    let n = grid.len();
    let op = HardyOperator::new(grid, params);
    let w = &op.mass;
    // preconditioner L = A + omega W on the free nodes 0..n-1
    let m = n - 1;
    let pre_diag: Vec<f64> = (0..m).map(|i| op.diag[i] + params.omega * w[i]).collect();
    let pre_off = &op.off[..m - 1];

    let (_, mut v) = nehari_project(&initial_guess(grid, params), params)?;
    let mut rep = functional_report(&v, params);
    let mut tau = options.step.unwrap_or(1.0).min(1.0);
    let mut history = Vec::new();

    for iter in 0..options.max_iter {
        let g = residual_values(&op, &v, params);
        let res = (g.iter().zip(w).map(|(g, w)| w * g * g).sum::<f64>() / rep.h1_sq()).sqrt();
        history.push(res);
        if !res.is_finite() {
            return Err(Error::Numerical(format!("residual became non-finite at iteration {iter}")));
        }
        if res <= options.tol.max(options.newton_switch) {
            if let Some((nv, steps)) = newton_polish(&op, &v, params, options.tol) {
                let (_, nv) = nehari_project(&nv, params)?;
                return Ok(GroundState::from_profile(nv, *params, Method::ProjectedGradient, iter + steps));
            }
            if res <= options.tol {
                return Ok(GroundState::from_profile(v, *params, Method::ProjectedGradient, iter));
            }
        }
        let rhs: Vec<f64> = g[..m].iter().zip(w).map(|(g, w)| g * w).collect();
        let p = tridiag::solve_real(pre_off, &pre_diag, pre_off, &rhs)?;

        let mut accepted = None;
        let mut t = (2.0 * tau).min(1.0);
        for _ in 0..40 {
            let mut trial: Vec<f64> = v.values().to_vec();
            for (x, d) in trial[..m].iter_mut().zip(&p) {
                *x = (*x - t * d).max(0.0);
            }
            let trial = v.with_values(trial);
            if trial.is_zero() {
                t *= 0.5;
                continue;
            }
            let (_, proj) = match nehari_project(&trial, params) {
                Ok(x) => x,
                Err(_) => {
                    t *= 0.5;
                    continue;
                }
            };
            let trep = functional_report(&proj, params);
            // round-off slack: near convergence S changes below machine precision
            if trep.s_omega <= rep.s_omega * (1.0 + 1e-14) {
                accepted = Some((proj, trep));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((nv, nrep)) => {
                v = nv;
                rep = nrep;
                tau = t;
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    residual: res,
                    history,
                    last_iterate: v.into_values(),
                })
            }
        }
        if rep.lp_alpha2 <= f64::MIN_POSITIVE {
            return Err(Error::Degenerate("descent collapsed to the zero field".into()));
        }
    }
    let res = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NonConvergence { iterations: options.max_iter, residual: res, history, last_iterate: v.into_values() })
}
