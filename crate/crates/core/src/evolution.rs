//! Time evolution of radial solutions with adaptive step control and
//! blow-up detection.
//!
//! The default integrator is a conservative Crank–Nicolson scheme for
//! `i W u_t = A u - L |u|^alpha u`, where `A` is the matrix of the Hardy
//! functional, `W` the diagonal quadrature mass and `L` the `L^{alpha+2}`
//! weights. It conserves the discrete mass and energy exactly, up to the
//! fixed-point tolerance. A Strang splitting (exact nonlinear phase around a
//! linear Crank–Nicolson step) is kept as a cheaper alternative; near the
//! singular origin it has a first-order energy error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexRadialField;
use crate::functionals::{abs_pow, complex_report, FunctionalReport};
use crate::ground_state::GroundState;
use crate::operator::HardyOperator;
use crate::params::Params;
use crate::tridiag::ComplexTridiagonalLu;
use crate::virial::{glassey_bound, initial_slope, virial_potential, VirialSeries};

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub u: ComplexRadialField,
    pub t: f64,
    pub dt: f64,
}

/// `u_0 = phi^{lambda0}` as a complex field.
pub fn make_initial_data(gs: &GroundState, lambda0: f64) -> Result<ComplexRadialField> {
    let mut u = gs.profile.scale(lambda0)?.to_complex();
    let n = u.values().len();
    u.values_mut()[n - 1] = Complex64::new(0.0, 0.0);
    Ok(u)
}

/// `u <- u exp(i tau (k |u|^alpha - v))`: the exact flow of
/// `i u_t = -(k |u|^alpha - v) u`, which leaves `|u|` unchanged pointwise.
/// `k` is the ratio of `L^{alpha+2}` to mass weights (1 except at the core).
fn nonlinear_phase(u: &mut [Complex64], k: &[f64], v: &[f64], alpha: f64, tau: f64) {
    for ((z, k), v) in u.iter_mut().zip(k).zip(v) {
        let m = z.norm();
        if m > 0.0 {
            *z *= Complex64::from_polar(1.0, tau * (k * abs_pow(m, alpha) - v));
        }
    }
}

/// Crank–Nicolson propagator for `i W u_t = (A - W V) u` with a frozen
/// potential `V`.
struct LinearStep {
    op: HardyOperator,
    weights: Vec<f64>,
    /// `lp / mass` weight ratio per node
    ratio: Vec<f64>,
    potential: Vec<f64>,
    dt: f64,
    lu: ComplexTridiagonalLu,
}

impl LinearStep {
    fn new(op: HardyOperator) -> Self {
        let n = op.mass.len();
        let weights = op.mass.clone();
        let ratio = op.lp.iter().zip(&op.mass).map(|(l, m)| l / m).collect();
        let lu = ComplexTridiagonalLu::new(&[Complex64::new(1.0, 0.0)], &[]).expect("1x1 identity");
        LinearStep { op, weights, ratio, potential: vec![0.0; n], dt: 0.0, lu }
    }

    /// Freezes `V = k |u|^alpha` and factors the implicit half of the step.
    fn prepare(&mut self, u: &[Complex64], alpha: f64, dt: f64) -> Result<()> {
        for ((v, z), k) in self.potential.iter_mut().zip(u).zip(&self.ratio) {
            *v = k * abs_pow(z.norm(), alpha);
        }
        self.factor(dt)
    }

    fn factor(&mut self, dt: f64) -> Result<()> {
        let (op, w, pot) = (&self.op, &self.weights, &self.potential);
        // the outermost node is pinned to zero
        let m = w.len() - 1;
        let h = Complex64::new(0.0, 0.5 * dt);
        let diag: Vec<Complex64> = (0..m).map(|i| w[i] + h * (op.diag[i] - w[i] * pot[i])).collect();
        let off: Vec<Complex64> = op.off[..m - 1].iter().map(|a| h * a).collect();
        self.lu = ComplexTridiagonalLu::new(&diag, &off)?;
        self.dt = dt;
        Ok(())
    }

    /// `dst = (W + i dt/2 (A - W V))^{-1} (W - i dt/2 (A - W V)) src`.
    fn propagate(&self, src: &[Complex64], dst: &mut [Complex64]) {
        let m = self.weights.len() - 1;
        let h = Complex64::new(0.0, 0.5 * self.dt);
        let (d, o, w, pot) = (&self.op.diag, &self.op.off, &self.weights, &self.potential);
        for i in 0..m {
            let mut au = (d[i] - w[i] * pot[i]) * src[i];
            if i > 0 {
                au += o[i - 1] * src[i - 1];
            }
            if i + 1 < m {
                au += o[i] * src[i + 1];
            }
            dst[i] = w[i] * src[i] - h * au;
        }
        self.lu.solve_in_place(&mut dst[..m]);
        dst[m] = Complex64::new(0.0, 0.0);
    }

    /// Strang step for the splitting `(A - W V) + (-W (k |u|^alpha - V))`
    /// with `V = k |u|^alpha` frozen at the start of the step.
    fn strang(&mut self, u: &mut [Complex64], alpha: f64, dt: f64) -> Result<()> {
        self.prepare(u, alpha, dt)?;
        let pot = std::mem::take(&mut self.potential);
        nonlinear_phase(u, &self.ratio, &pot, alpha, 0.5 * dt);
        self.potential = pot;
        let src = u.to_vec();
        self.propagate(&src, u);
        nonlinear_phase(u, &self.ratio, &self.potential, alpha, 0.5 * dt);
        Ok(())
    }

    /// Conservative Crank–Nicolson step: `V` is the secant slope of the
    /// nonlinear energy density between `u` and the new state, found by
    /// fixed-point iteration. Mass and discrete energy are conserved up to
    /// the iteration tolerance. Returns the number of iterations used.
    fn conservative(&mut self, u: &mut [Complex64], alpha: f64, dt: f64) -> Result<usize> {
        let src = u.to_vec();
        self.prepare(&src, alpha, dt)?;
        self.propagate(&src, u);
        let p = 0.5 * alpha + 1.0;
        let scale = src.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut prev = u.to_vec();
        let mut last_change = f64::INFINITY;
        for iter in 1..=MAX_FIXED_POINT {
            for (i, v) in self.potential.iter_mut().enumerate() {
                let (s0, s1) = (src[i].norm_sqr(), u[i].norm_sqr());
                let ds = s1 - s0;
                *v = self.ratio[i]
                    * if ds.abs() > 1e-8 * (s0 + s1) {
                        (s1.powf(p) - s0.powf(p)) / (p * ds)
                    } else {
                        (0.5 * (s0 + s1)).powf(0.5 * alpha)
                    };
            }
            self.factor(dt)?;
            prev.copy_from_slice(u);
            self.propagate(&src, u);
            let change = u.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if !change.is_finite() {
                break;
            }
            // a stalled iteration at roundoff level is as good as converged
            if change <= FIXED_POINT_TOL * scale || (change <= STALL_TOL * scale && change > 0.5 * last_change) {
                return Ok(iter);
            }
            last_change = change;
        }
        Err(Error::NonConvergence {
            iterations: MAX_FIXED_POINT,
            residual: f64::NAN,
            history: Vec::new(),
            last_iterate: Vec::new(),
        })
    }
}

const MAX_FIXED_POINT: usize = 60;
const FIXED_POINT_TOL: f64 = 1e-13;
const STALL_TOL: f64 = 1e-10;

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("time step must be positive (got {dt})")))
    }
}

/// One conservative Crank–Nicolson step.
pub fn step_crank_nicolson(state: &EvolutionState, params: &Params) -> Result<EvolutionState> {
    check_dt(state.dt)?;
    let grid = state.u.grid();
    let mut lin = LinearStep::new(HardyOperator::new(grid, params));
    let mut u = state.u.clone();
    lin.conservative(u.values_mut(), params.alpha, state.dt)?;
    if !u.is_finite() {
        return Err(Error::Numerical(format!("non-finite field after step at t = {}", state.t)));
    }
    Ok(EvolutionState { u, t: state.t + state.dt, dt: state.dt })
}

/// One Strang step: half nonlinear phase, Crank–Nicolson, half nonlinear phase.
pub fn step_strang(state: &EvolutionState, params: &Params) -> Result<EvolutionState> {
    check_dt(state.dt)?;
    let grid = state.u.grid();
    let mut lin = LinearStep::new(HardyOperator::new(grid, params));
    let mut u = state.u.clone();
    lin.strang(u.values_mut(), params.alpha, state.dt)?;
    if !u.is_finite() {
        return Err(Error::Numerical(format!("non-finite field after step at t = {}", state.t)));
    }
    Ok(EvolutionState { u, t: state.t + state.dt, dt: state.dt })
}

/// Time integrator used by [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Conservative Crank–Nicolson, see [`step_crank_nicolson`].
    #[default]
    CrankNicolson,
    /// Strang splitting, see [`step_strang`].
    Strang,
}

/// Step-size, sampling and detection controls for [`simulate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionControls {
    pub scheme: Scheme,
    pub t_max: f64,
    /// Initial and largest step.
    pub dt0: f64,
    /// Time between recorded samples.
    pub sample_every: f64,
    /// Blow-up is declared once `||grad u||` exceeds this multiple of its
    /// initial value.
    pub grad_threshold: f64,
    pub dt_min: f64,
    /// A step is retried at half size when the energy changes by more than
    /// this fraction of the energy scale `max(|E|, hardy_sq / 2)`.
    pub energy_drift_tol: f64,
    /// ... or when `||grad u||` grows by more than this fraction.
    pub grad_growth_tol: f64,
    /// Accepted steps without a retry before the step is doubled again.
    pub grow_after: usize,
    /// Radii of the virial potentials recorded at each sample.
    pub virial_radii: Vec<f64>,
    /// Radius whose series feeds the Glassey bound in the verdict.
    pub glassey_radius: Option<f64>,
    pub max_steps: usize,
}

impl Default for EvolutionControls {
    fn default() -> Self {
        EvolutionControls {
            scheme: Scheme::CrankNicolson,
            t_max: 1.0,
            dt0: 1e-3,
            sample_every: 1e-2,
            grad_threshold: 1e3,
            dt_min: 1e-16,
            energy_drift_tol: 1e-7,
            grad_growth_tol: 0.2,
            grow_after: 50,
            virial_radii: Vec::new(),
            glassey_radius: None,
            max_steps: 50_000_000,
        }
    }
}

impl EvolutionControls {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_max", self.t_max),
            ("dt0", self.dt0),
            ("sample_every", self.sample_every),
            ("dt_min", self.dt_min),
            ("energy_drift_tol", self.energy_drift_tol),
            ("grad_growth_tol", self.grad_growth_tol),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive (got {x})")));
            }
        }
        if !(self.grad_threshold > 1.0) {
            return Err(Error::Parameter("grad_threshold must exceed 1".into()));
        }
        if self.dt_min >= self.dt0 {
            return Err(Error::Parameter("dt_min must be below dt0".into()));
        }
        if let Some(r) = self.virial_radii.iter().find(|r| !(**r > 1.0)) {
            return Err(Error::Parameter(format!("virial radius must exceed 1 (got {r})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub report: FunctionalReport,
}

impl Sample {
    pub fn grad_norm(&self) -> f64 {
        self.report.grad_sq.sqrt()
    }
}

/// Virial potentials at one scheduled sample, ordered as the configured radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialRecord {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupReason {
    GradientThreshold,
    DtUnderflow,
    HorizonReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupVerdict {
    pub blew_up: bool,
    pub t_detect: Option<f64>,
    pub reason: BlowupReason,
    pub glassey_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: Params,
    /// Scheduled samples every `sample_every`, plus the final state.
    pub samples: Vec<Sample>,
    pub virial_radii: Vec<f64>,
    /// One record per scheduled sample.
    pub virial: Vec<VirialRecord>,
    pub verdict: BlowupVerdict,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Step size in use when the run stopped.
    pub final_dt: f64,
    /// Whether the run stopped because `dt` fell below `dt_min`.
    pub dt_underflow: bool,
    /// Field values at the last sample.
    #[serde(skip)]
    pub final_values: Vec<Complex64>,
}

impl Trajectory {
    pub fn virial_series(&self, radius: f64) -> Result<VirialSeries> {
        let k = self
            .virial_radii
            .iter()
            .position(|r| *r == radius)
            .ok_or_else(|| Error::Parameter(format!("radius {radius} was not recorded")))?;
        let times: Vec<f64> = self.virial.iter().map(|v| v.t).collect();
        let v: Vec<f64> = self.virial.iter().map(|v| v.values[k]).collect();
        // scheduled samples come first and share their times with the virial records
        let q: Vec<f64> = self.samples[..times.len()].iter().map(|s| s.report.q).collect();
        VirialSeries::new(radius, times, v, q)
    }

    pub fn initial(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// Largest relative mass change from the initial sample.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.initial().report.mass;
        self.samples.iter().map(|s| ((s.report.mass - m0) / m0).abs()).fold(0.0, f64::max)
    }

    /// Largest energy change from the initial sample relative to `|E(u_0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.initial().report.energy;
        self.samples.iter().map(|s| ((s.report.energy - e0) / e0).abs()).fold(0.0, f64::max)
    }
}

/// Number of trailing samples over which `||grad u||` must increase before a
/// step-size underflow counts as blow-up.
const MONOTONE_WINDOW: usize = 10;

/// Classifies the end of a run.
///
/// Blow-up is declared when `||grad u||` exceeded `grad_threshold` times its
/// initial value, or when the step size underflowed while `||grad u||` was
/// increasing over the last ten samples.
pub fn detect_blowup(traj: &Trajectory, controls: &EvolutionControls) -> BlowupVerdict {
    let horizon =
        BlowupVerdict { blew_up: false, t_detect: None, reason: BlowupReason::HorizonReached, glassey_bound: None };
    let Some(first) = traj.samples.first() else {
        return horizon;
    };
    let limit = controls.grad_threshold * first.grad_norm();
    if let Some(s) = traj.samples.iter().find(|s| s.grad_norm() > limit) {
        return BlowupVerdict {
            blew_up: true,
            t_detect: Some(s.t),
            reason: BlowupReason::GradientThreshold,
            glassey_bound: None,
        };
    }
    if traj.dt_underflow {
        let k = traj.samples.len();
        let tail = &traj.samples[k.saturating_sub(MONOTONE_WINDOW)..];
        let monotone = tail.len() >= MONOTONE_WINDOW && tail.windows(2).all(|w| w[1].grad_norm() > w[0].grad_norm());
        if monotone {
            return BlowupVerdict {
                blew_up: true,
                t_detect: Some(traj.last().t),
                reason: BlowupReason::DtUnderflow,
                glassey_bound: None,
            };
        }
    }
    horizon
}

fn virial_record(u: &ComplexRadialField, t: f64, radii: &[f64]) -> Result<VirialRecord> {
    let values = radii.iter().map(|&r| virial_potential(u, r)).collect::<Result<_>>()?;
    Ok(VirialRecord { t, values })
}

/// Integrates from `u0` until `t_max`, the gradient threshold, or step-size
/// underflow.
///
/// A step is retried at half size when it changes the energy by more than
/// `energy_drift_tol` of the energy scale or grows `||grad u||` by more than
/// `grad_growth_tol`; after `grow_after` clean steps the size is doubled, up
/// to `dt0`. Steps are shortened to land exactly on the sample schedule.
pub fn simulate(u0: &ComplexRadialField, params: &Params, controls: &EvolutionControls) -> Result<Trajectory> {
    params.validate()?;
    controls.validate()?;
    if !u0.is_finite() {
        return Err(Error::Parameter("initial data must be finite".into()));
    }
    let grid = u0.grid().clone();
    let mut lin = LinearStep::new(HardyOperator::new(&grid, params));
    let mut u = u0.clone();
    let n = u.values().len();
    u.values_mut()[n - 1] = Complex64::new(0.0, 0.0);

    let mut rep = complex_report(&u, params);
    let mut samples = vec![Sample { t: 0.0, report: rep }];
    let mut virial = vec![virial_record(&u, 0.0, &controls.virial_radii)?];
    let grad_limit = controls.grad_threshold * rep.grad_sq.sqrt();

    let mut t = 0.0;
    let mut dt = controls.dt0;
    let mut clean = 0usize;
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut next_sample = 1usize;
    let mut underflow = false;
    let mut scratch = u.values().to_vec();

    while t < controls.t_max * (1.0 - 1e-12) && steps < controls.max_steps {
        let t_next = (next_sample as f64 * controls.sample_every).min(controls.t_max);
        let remaining = t_next - t;
        let mut h = dt.min(remaining);
        // avoid a sliver step just before the sample time
        if remaining - h < 1e-3 * h {
            h = remaining;
        }
        scratch.copy_from_slice(u.values());
        let stepped = match controls.scheme {
            Scheme::CrankNicolson => lin.conservative(&mut scratch, params.alpha, h).map(|_| ()),
            Scheme::Strang => lin.strang(&mut scratch, params.alpha, h),
        };
        if let Err(e) = stepped {
            if !matches!(e, Error::NonConvergence { .. }) {
                return Err(e);
            }
            // the fixed point failed to converge: retry at half size
            rejected += 1;
            clean = 0;
            dt = 0.5 * h;
            if dt < controls.dt_min {
                underflow = true;
                samples.push(Sample { t, report: rep });
                break;
            }
            continue;
        }
        if scratch.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numerical(format!("non-finite field at t = {t:e} with dt = {h:e} after {steps} steps")));
        }
        let trial = ComplexRadialField::new(grid.clone(), scratch.clone())?;
        let trep = complex_report(&trial, params);
        let scale = rep.energy.abs().max(0.5 * rep.hardy_sq);
        let drift = (trep.energy - rep.energy).abs() / scale;
        let growth = trep.grad_sq.sqrt() / rep.grad_sq.sqrt() - 1.0;
        if drift > controls.energy_drift_tol || growth > controls.grad_growth_tol {
            rejected += 1;
            clean = 0;
            dt = 0.5 * h;
            if dt < controls.dt_min {
                underflow = true;
                samples.push(Sample { t, report: rep });
                break;
            }
            continue;
        }
        u = trial;
        rep = trep;
        t += h;
        steps += 1;
        clean += 1;
        if clean >= controls.grow_after && dt < controls.dt0 {
            dt = (2.0 * dt).min(controls.dt0);
            clean = 0;
        }
        let on_schedule = h == remaining;
        if on_schedule {
            t = t_next;
            samples.push(Sample { t, report: rep });
            virial.push(virial_record(&u, t, &controls.virial_radii)?);
            next_sample += 1;
        }
        if rep.grad_sq.sqrt() > grad_limit {
            if !on_schedule {
                samples.push(Sample { t, report: rep });
            }
            break;
        }
    }

    let mut traj = Trajectory {
        params: *params,
        samples,
        virial_radii: controls.virial_radii.clone(),
        virial,
        verdict: BlowupVerdict {
            blew_up: false,
            t_detect: None,
            reason: BlowupReason::HorizonReached,
            glassey_bound: None,
        },
        steps,
        rejected_steps: rejected,
        final_dt: dt,
        dt_underflow: underflow,
        final_values: u.into_values(),
    };
    let mut verdict = detect_blowup(&traj, controls);
    if let Some(r) = controls.glassey_radius {
        verdict.glassey_bound = glassey_from(&traj, r);
    }
    traj.verdict = verdict;
    Ok(traj)
}

/// Glassey bound from the recorded virial series at radius `r`, when the
/// series is uniformly concave after its first two samples.
fn glassey_from(traj: &Trajectory, r: f64) -> Option<f64> {
    let series = traj.virial_series(r).ok()?;
    let b = crate::virial::estimate_b(&series, 2).ok()?;
    if !b.concave {
        return None;
    }
    glassey_bound(series.v_values[0], initial_slope(&series).ok()?, b.b_hat).ok()
}
