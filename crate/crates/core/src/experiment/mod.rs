//! Experiment orchestration: ground state, scaling curve, evolution and the
//! full instability certificate, each writing a JSON summary and CSV data
//! into the configured output directory.

mod config;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use config::{parse_config, parse_config_with_overrides, Config, EvolveConfig, ScalingConfig, SolverConfig};
pub use output::{fmt17, to_json, write_csv, write_json};

use crate::error::{Error, Result};
use crate::evolution::{make_initial_data, simulate, BlowupVerdict, Trajectory};
use crate::field::ComplexRadialField;
use crate::functionals::FunctionalReport;
use crate::grid::{GridSpec, RadialGrid};
use crate::ground_state::{
    in_blowup_set, pohozaev_report, scaling_curve, shoot_ground_state, solve_ground_state, GroundState, Method,
    PohozaevReport, ShootingOptions,
};
use crate::params::Params;
use crate::virial::{err_scale, estimate_b, mu_threshold, step1_constant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Groundstate,
    Scaling,
    Evolve,
    Instability,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Groundstate => "groundstate",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Instability => "instability",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub method: Method,
    pub iterations: usize,
    pub residual: f64,
    pub d_rad_omega: f64,
    pub sigma: f64,
    pub report: FunctionalReport,
}

impl GroundStateSummary {
    fn new(gs: &GroundState) -> Self {
        GroundStateSummary {
            method: gs.method,
            iterations: gs.iterations,
            residual: gs.residual,
            d_rad_omega: gs.d_rad_omega,
            sigma: gs.sigma,
            report: gs.report,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub argmax_lambda: f64,
    /// Number of sign changes of `Q` along the curve.
    pub q_sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub lambda0: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub samples: usize,
    pub t_final: f64,
    pub final_dt: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    /// `max | |u(t_final)| - |u_0| |` over the nodes.
    pub modulus_deviation: f64,
    pub verdict: BlowupVerdict,
}

/// `|FD V_R'' - 8 Q|` at a few sample times for each virial radius, against
/// the error scale of the localized virial estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationCheck {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    /// `errors[i][j]` at `times[i]` and `radii[j]`.
    pub errors: Vec<Vec<f64>>,
    pub err_scales: Vec<Vec<f64>>,
    /// Smallest `C` with `errors <= C err_scales` everywhere.
    pub fitted_constant: f64,
    /// Whether the error strictly decreases with `R` at every time.
    pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub in_blowup_set: bool,
    /// `a = 2 (d(rad, omega) - S_omega(u_0))`.
    pub a: f64,
    pub mu: f64,
    /// `max_t S_omega(u(t)) - d(rad, omega)`; negative along the whole run.
    pub max_action_excess: f64,
    /// `max_t Q(u(t)) + a`; at most `1e-6 |a|`.
    pub max_q_plus_a: f64,
    pub b_radius: f64,
    pub b_hat: f64,
    pub concave: bool,
    pub localization: Option<LocalizationCheck>,
    /// All of: in the blow-up set, action below `d`, `Q <= -a`, `b_hat > 0`,
    /// blow-up detected.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub params: Params,
    pub grid: GridSpec,
    pub ground_state: Option<GroundStateSummary>,
    pub pohozaev: Option<PohozaevReport>,
    pub scaling: Option<ScalingSummary>,
    pub evolution: Option<EvolutionSummary>,
    pub certification: Option<Certification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub summary: Summary,
    /// Files written, all inside the output directory.
    pub artifacts: Vec<PathBuf>,
}

/// A failed run: the stage that failed, its error, and the files written
/// before the failure.
#[derive(Debug)]
pub struct ExperimentFailure {
    pub kind: ExperimentKind,
    pub stage: &'static str,
    pub error: Error,
    pub artifacts: Vec<PathBuf>,
}

impl fmt::Display for ExperimentFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} experiment failed at stage `{}`: {}", self.kind, self.stage, self.error)
    }
}

impl std::error::Error for ExperimentFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

struct Run<'a> {
    config: &'a Config,
    kind: ExperimentKind,
    artifacts: Vec<PathBuf>,
    summary: Summary,
}

type Staged<T> = std::result::Result<T, ExperimentFailure>;

impl<'a> Run<'a> {
    fn stage<T>(&mut self, stage: &'static str, r: Result<T>) -> Staged<T> {
        r.map_err(|error| ExperimentFailure { kind: self.kind, stage, error, artifacts: self.artifacts.clone() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<Option<f64>>]) -> Staged<()> {
        let p = self.path(name);
        self.stage("output", write_csv(&p, header, rows))?;
        self.artifacts.push(p);
        Ok(())
    }

    fn finish(mut self) -> Staged<ExperimentResult> {
        let p = self.path("summary.json");
        let r = write_json(&p, &self.summary);
        self.stage("output", r)?;
        self.artifacts.push(p);
        Ok(ExperimentResult { kind: self.kind, summary: self.summary, artifacts: self.artifacts })
    }

    fn ground_state(&mut self) -> Staged<GroundState> {
        let c = self.config;
        let grid = self.stage("grid", RadialGrid::from_spec(c.params.d, &c.grid).map(Arc::new))?;
        let gs = match c.solver.method {
            Method::ProjectedGradient => solve_ground_state(&c.params, &grid, &c.solver.options()),
            Method::Shooting => shoot_ground_state(&c.params, &grid, &ShootingOptions::default()),
        };
        let gs = self.stage("ground_state", gs)?;
        self.summary.ground_state = Some(GroundStateSummary::new(&gs));
        Ok(gs)
    }
}

/// Validates `config` and runs one experiment, writing its files into
/// `config.output_dir`.
pub fn run_experiment(config: &Config, kind: ExperimentKind) -> Staged<ExperimentResult> {
    let mut run = Run {
        config,
        kind,
        artifacts: Vec::new(),
        summary: Summary {
            kind,
            params: config.params,
            grid: config.grid,
            ground_state: None,
            pohozaev: None,
            scaling: None,
            evolution: None,
            certification: None,
        },
    };
    run.stage("config", config.validate())?;
    let dir = config.output_dir.clone();
    run.stage("output", std::fs::create_dir_all(&dir).map_err(Error::from))?;

    let gs = run.ground_state()?;
    match kind {
        ExperimentKind::Groundstate => {
            run.summary.pohozaev = Some(pohozaev_report(&gs));
            let rows: Vec<_> =
                gs.grid().r().iter().zip(gs.profile.values()).map(|(r, v)| vec![Some(*r), Some(*v)]).collect();
            run.csv("profile.csv", &["r".into(), "phi".into()], &rows)?;
        }
        ExperimentKind::Scaling => {
            run.summary.pohozaev = Some(pohozaev_report(&gs));
            let curve = run.stage("scaling", scaling_curve(&gs, &config.scaling.lambdas))?;
            let q_sign_changes = curve.q_values.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
            run.summary.scaling =
                Some(ScalingSummary { argmax_lambda: curve.lambdas[curve.argmax_s()], q_sign_changes });
            let rows: Vec<_> = (0..curve.lambdas.len())
                .map(|i| {
                    vec![
                        Some(curve.lambdas[i]),
                        Some(curve.s_values[i]),
                        Some(curve.q_values[i]),
                        Some(curve.k_values[i]),
                    ]
                })
                .collect();
            let header = ["lambda", "s_omega", "q", "k_omega"].map(String::from);
            run.csv("scaling.csv", &header, &rows)?;
        }
        ExperimentKind::Evolve | ExperimentKind::Instability => {
            let lambda0 = config.evolve.lambda0;
            let scaled = run.stage("initial_data", gs.profile.scale(lambda0))?;
            let certify = kind == ExperimentKind::Instability;
            let inside = in_blowup_set(&scaled, &gs);
            if certify && !inside {
                let e = Error::Precondition(format!("phi^{lambda0} is not in the blow-up set"));
                run.stage::<()>("blowup_set", Err(e))?;
            }
            let u0 = run.stage("initial_data", make_initial_data(&gs, lambda0))?;
            let traj = run.stage("simulate", simulate(&u0, &config.params, &config.evolve.controls()))?;
            run.summary.evolution = Some(evolution_summary(&traj, &u0, lambda0));
            let (header, rows) = trajectory_table(&traj);
            run.csv("trajectory.csv", &header, &rows)?;
            if certify {
                let cert = run.stage("virial", certification(&traj, &gs, &config.evolve, inside))?;
                run.summary.certification = Some(cert);
            }
        }
    }
    run.finish()
}

fn evolution_summary(traj: &Trajectory, u0: &ComplexRadialField, lambda0: f64) -> EvolutionSummary {
    let modulus_deviation =
        traj.final_values.iter().zip(u0.values()).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
    EvolutionSummary {
        lambda0,
        steps: traj.steps,
        rejected_steps: traj.rejected_steps,
        samples: traj.samples.len(),
        t_final: traj.last().t,
        final_dt: traj.final_dt,
        mass_drift: traj.mass_drift(),
        energy_drift: traj.energy_drift(),
        modulus_deviation,
        verdict: traj.verdict,
    }
}

/// Columns `t, mass, energy, hardy_sq, lp_alpha2, q, grad_norm, V_<R>...`.
pub fn trajectory_table(traj: &Trajectory) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut header: Vec<String> =
        ["t", "mass", "energy", "hardy_sq", "lp_alpha2", "q", "grad_norm"].map(String::from).to_vec();
    header.extend(traj.virial_radii.iter().map(|r| format!("V_{r}")));
    let rows = traj
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = &s.report;
            let mut row = vec![
                Some(s.t),
                Some(r.mass),
                Some(r.energy),
                Some(r.hardy_sq),
                Some(r.lp_alpha2),
                Some(r.q),
                Some(s.grad_norm()),
            ];
            match traj.virial.get(i) {
                Some(v) => row.extend(v.values.iter().map(|x| Some(*x))),
                None => row.extend(traj.virial_radii.iter().map(|_| None)),
            }
            row
        })
        .collect();
    (header, rows)
}

/// Localization check at the interior virial samples closest to 1/4, 1/2
/// and 3/4 of the recorded series.
pub fn localization_check(traj: &Trajectory) -> Result<LocalizationCheck> {
    let radii = traj.virial_radii.clone();
    if radii.is_empty() {
        return Err(Error::Parameter("no virial radii were recorded".into()));
    }
    let series = radii.iter().map(|r| traj.virial_series(*r)).collect::<Result<Vec<_>>>()?;
    let n = series[0].vpp.len();
    // vpp[k] sits at sample k + 1
    let picks = [n / 4, n / 2, 3 * n / 4];
    let mut times = Vec::new();
    let mut errors = Vec::new();
    let mut err_scales = Vec::new();
    for &k in &picks {
        let sample = &traj.samples[k + 1];
        times.push(sample.t);
        errors.push(series.iter().map(|s| s.localization_error()[k]).collect::<Vec<_>>());
        err_scales.push(radii.iter().map(|r| err_scale(&traj.params, *r, sample.report.hardy_sq)).collect::<Vec<_>>());
    }
    let fitted_constant =
        errors.iter().flatten().zip(err_scales.iter().flatten()).map(|(e, s)| e / s).fold(0.0, f64::max);
    let decreasing = errors.iter().all(|row| row.windows(2).all(|w| w[1] < w[0]));
    Ok(LocalizationCheck { radii, times, errors, err_scales, fitted_constant, decreasing })
}

fn certification(traj: &Trajectory, gs: &GroundState, evolve: &EvolveConfig, inside: bool) -> Result<Certification> {
    let s0 = traj.initial().report.s_omega;
    let a = step1_constant(gs.d_rad_omega, s0);
    let max_action_excess =
        traj.samples.iter().map(|s| s.report.s_omega - gs.d_rad_omega).fold(f64::NEG_INFINITY, f64::max);
    let max_q_plus_a = traj.samples.iter().map(|s| s.report.q + a).fold(f64::NEG_INFINITY, f64::max);
    if evolve.virial_radii.is_empty() {
        return Err(Error::Config("instability runs need at least one virial radius".into()));
    }
    let b_radius = evolve.glassey_radius;
    let b = estimate_b(&traj.virial_series(b_radius)?, 2)?;
    let localization = localization_check(traj).ok();
    let certified = inside
        && a > 0.0
        && max_action_excess < 0.0
        && max_q_plus_a <= 1e-6 * a.abs()
        && b.concave
        && traj.verdict.blew_up;
    Ok(Certification {
        in_blowup_set: inside,
        a,
        mu: mu_threshold(&traj.params, traj.initial().report.energy),
        max_action_excess,
        max_q_plus_a,
        b_radius,
        b_hat: b.b_hat,
        concave: b.concave,
        localization,
        certified,
    })
}

/// Reads a `summary.json` written by [`run_experiment`].
pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))
}
