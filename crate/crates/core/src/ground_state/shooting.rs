//! Shooting oracle: integrates the radial ODE
//! `phi'' + (d-1)/r phi' - omega phi + c phi / r^2 + |phi|^alpha phi = 0`
//! outward from the Frobenius series at `r_min` and bisects on the amplitude.
//!
//! The ODE is integrated in `s = ln r`, where the regular branch
//! `A r^{-sigma}` is smooth.

use std::sync::Arc;

use super::ode::{integrate_dopri, OdeOptions};
use super::{GroundState, Method};
use crate::error::{Error, Result};
use crate::field::RealRadialField;
use crate::functionals::{abs_pow, nehari_project};
use crate::grid::RadialGrid;
use crate::params::Params;

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// First amplitude tried; the bracket is found by doubling/halving from it.
    pub a_init: f64,
    pub max_bracket_steps: usize,
    pub max_bisections: usize,
    pub ode: OdeOptions,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { a_init: 1.0, max_bracket_steps: 200, max_bisections: 200, ode: OdeOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    /// Crossed zero: amplitude too large.
    Over,
    /// Turned upward or never decayed: amplitude too small.
    Under,
}

struct Shot {
    outcome: Outcome,
    values: Vec<f64>,
}

/// Indicial polynomial `p(mu) = mu^2 + (d-2) mu + c` of the linear operator.
fn indicial(params: &Params, mu: f64) -> f64 {
    mu * mu + (params.dim() - 2.0) * mu + params.c
}

/// Two-term Frobenius data `(phi, r phi')` at `r`.
fn series(params: &Params, amp: f64, r: f64) -> [f64; 2] {
    let sigma = params.sigma();
    let lin = 2.0 - sigma;
    let nonlin = 2.0 - sigma * (params.alpha + 1.0);
    let b = params.omega * amp / indicial(params, lin);
    let c = -amp.powf(params.alpha + 1.0) / indicial(params, nonlin);
    let t0 = amp * r.powf(-sigma);
    let t1 = b * r.powf(lin);
    let t2 = c * r.powf(nonlin);
    [t0 + t1 + t2, -sigma * t0 + lin * t1 + nonlin * t2]
}

fn shoot(params: &Params, grid: &RadialGrid, amp: f64, opts: &OdeOptions) -> Result<Shot> {
    let d = params.dim();
    let (c, omega, alpha) = (params.c, params.omega, params.alpha);
    let rhs = move |s: f64, y: &[f64; 2]| {
        let r2 = (2.0 * s).exp();
        [y[1], -(d - 2.0) * y[1] - c * y[0] + r2 * (omega * y[0] - abs_pow(y[0], alpha) * y[0])]
    };
    let r = grid.r();
    let mut y = series(params, amp, r[0]);
    let mut values = Vec::with_capacity(r.len());
    values.push(y[0]);
    let mut h = 0.0;
    let mut descended = y[1] < 0.0;
    let peak = y[0];
    for i in 1..r.len() {
        y = integrate_dopri(&rhs, r[i - 1].ln(), y, r[i].ln(), &mut h, opts)?;
        if y[0] <= 0.0 {
            return Ok(Shot { outcome: Outcome::Over, values });
        }
        values.push(y[0]);
        if y[1] < 0.0 {
            descended = true;
        } else if descended && y[1] > 0.0 {
            return Ok(Shot { outcome: Outcome::Under, values });
        }
        if !descended && y[0] > 1e8 * peak.max(amp) {
            return Ok(Shot { outcome: Outcome::Under, values });
        }
    }
    Ok(Shot { outcome: Outcome::Under, values })
}

/// Ground state by shooting on the amplitude `A` of `phi ~ A r^{-sigma}`.
pub fn shoot_ground_state(params: &Params, grid: &Arc<RadialGrid>, options: &ShootingOptions) -> Result<GroundState> {
    params.validate()?;
    let ode = &options.ode;
    let mut lo;
    let mut hi;
    let first = shoot(params, grid, options.a_init, ode)?.outcome;
    let mut a = options.a_init;
    let mut steps = 0;
    match first {
        Outcome::Under => {
            lo = a;
            loop {
                a *= 2.0;
                steps += 1;
                if shoot(params, grid, a, ode)?.outcome == Outcome::Over {
                    hi = a;
                    break;
                }
                lo = a;
                if steps >= options.max_bracket_steps {
                    return Err(Error::Bracket(format!("no overshoot up to A = {a:e}")));
                }
            }
        }
        Outcome::Over => {
            hi = a;
            loop {
                a *= 0.5;
                steps += 1;
                if shoot(params, grid, a, ode)?.outcome == Outcome::Under {
                    lo = a;
                    break;
                }
                hi = a;
                if steps >= options.max_bracket_steps {
                    return Err(Error::Bracket(format!("no undershoot down to A = {a:e}")));
                }
            }
        }
    }
    let mut iterations = 0;
    for _ in 0..options.max_bisections {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(params, grid, mid, ode)?.outcome {
            Outcome::Under => lo = mid,
            Outcome::Over => hi = mid,
        }
        iterations += 1;
    }

    let under = shoot(params, grid, lo, ode)?.values;
    let over = shoot(params, grid, hi, ode)?.values;
    let top = under.iter().cloned().fold(0.0, f64::max);
    // the two bracketing shots agree up to the separation point
    let mut cut = under.len().min(over.len());
    for i in 0..cut {
        if (under[i] - over[i]).abs() > 1e-8 * top {
            cut = i;
            break;
        }
    }
    if cut < 4 {
        return Err(Error::Bracket("bracketing shots separate immediately".into()));
    }
    let r = grid.r();
    let n = r.len();
    let mut values = vec![0.0; n];
    values[..cut].copy_from_slice(&under[..cut]);
    // exponential tail r^{-(d-1)/2} exp(-sqrt(omega) r) matched at the cut
    let rc = r[cut - 1];
    let vc = values[cut - 1];
    let k = params.omega.sqrt();
    let decay = |x: f64| x.powf(-(params.dim() - 1.0) / 2.0) * (-k * x).exp();
    for i in cut..n {
        values[i] = vc * decay(r[i]) / decay(rc);
    }
    values[n - 1] = 0.0;
    let profile = RealRadialField::new(grid.clone(), values)?.with_origin_exponent(params.sigma());
    let (_, profile) = nehari_project(&profile, params)?;
    Ok(GroundState::from_profile(profile, *params, Method::Shooting, iterations))
}
