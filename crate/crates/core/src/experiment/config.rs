//! Experiment configuration: a TOML document with one table per concern,
//! plus dotted-key overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionControls, Scheme};
use crate::grid::{GridSpec, RadialGrid};
use crate::ground_state::{Method, SolveOptions};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub params: Params,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub newton_switch: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        SolverConfig {
            method: Method::ProjectedGradient,
            tol: o.tol,
            max_iter: o.max_iter,
            newton_switch: o.newton_switch,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol, max_iter: self.max_iter, newton_switch: self.newton_switch, step: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub lambdas: Vec<f64>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { lambdas: vec![0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0] }
    }
}

/// Initial data `phi^{lambda0}` and the controls of the time integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub lambda0: f64,
    pub scheme: Scheme,
    pub t_max: f64,
    pub dt0: f64,
    pub dt_min: f64,
    pub sample_every: f64,
    pub grad_threshold: f64,
    pub energy_drift_tol: f64,
    pub grad_growth_tol: f64,
    pub grow_after: usize,
    pub max_steps: usize,
    pub virial_radii: Vec<f64>,
    /// Radius whose virial series feeds `b_hat` and the Glassey bound; must
    /// be one of `virial_radii` when those are given.
    pub glassey_radius: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        let c = EvolutionControls::default();
        EvolveConfig {
            lambda0: 1.1,
            scheme: c.scheme,
            t_max: c.t_max,
            dt0: c.dt0,
            dt_min: c.dt_min,
            sample_every: 2e-3,
            grad_threshold: c.grad_threshold,
            energy_drift_tol: c.energy_drift_tol,
            grad_growth_tol: c.grad_growth_tol,
            grow_after: c.grow_after,
            max_steps: c.max_steps,
            virial_radii: vec![10.0, 20.0, 40.0],
            glassey_radius: 20.0,
        }
    }
}

impl EvolveConfig {
    pub fn controls(&self) -> EvolutionControls {
        EvolutionControls {
            scheme: self.scheme,
            t_max: self.t_max,
            dt0: self.dt0,
            sample_every: self.sample_every,
            grad_threshold: self.grad_threshold,
            dt_min: self.dt_min,
            energy_drift_tol: self.energy_drift_tol,
            grad_growth_tol: self.grad_growth_tol,
            grow_after: self.grow_after,
            virial_radii: self.virial_radii.clone(),
            glassey_radius: self.virial_radii.contains(&self.glassey_radius).then_some(self.glassey_radius),
            max_steps: self.max_steps,
        }
    }
}

impl Config {
    /// Default configuration for the given parameters.
    pub fn new(params: Params) -> Self {
        Config {
            output_dir: default_output_dir(),
            params,
            grid: GridSpec::default(),
            solver: SolverConfig::default(),
            scaling: ScalingConfig::default(),
            evolve: EvolveConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        RadialGrid::from_spec(self.params.d, &self.grid)?;
        let s = &self.solver;
        if !(s.tol > 0.0) || s.max_iter == 0 || !(s.newton_switch >= 0.0) {
            return Err(Error::Config("solver needs tol > 0, max_iter > 0 and newton_switch >= 0".into()));
        }
        let l = &self.scaling.lambdas;
        if l.is_empty() || l.iter().any(|x| !(*x > 0.0)) || l.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("scaling lambdas must be positive and strictly increasing".into()));
        }
        let e = &self.evolve;
        if !(e.lambda0 > 0.0 && e.lambda0.is_finite()) {
            return Err(Error::Config(format!("lambda0 must be > 0 (got {})", e.lambda0)));
        }
        e.controls().validate().map_err(|err| Error::Config(err.to_string()))?;
        let cap = self.grid.r_max / 3.0;
        for &r in &e.virial_radii {
            if !(r > 1.0 && r <= cap) {
                return Err(Error::Config(format!("virial radius {r} violates 1 < R <= r_max / 3 = {cap}")));
            }
        }
        if !e.virial_radii.is_empty() && !e.virial_radii.contains(&e.glassey_radius) {
            return Err(Error::Config(format!("glassey_radius {} is not one of the virial radii", e.glassey_radius)));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    /// Reads, overrides and validates a config file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_config_with_overrides(&text, overrides)
    }
}

pub fn parse_config(text: &str) -> Result<Config> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, applies `KEY=VALUE` overrides with dotted keys
/// (`params.c=0.2`, `evolve.virial_radii=[10, 20]`), and validates.
///
/// Values are read as TOML values; anything that does not parse as one is
/// taken as a string.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<Config> {
    let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(format!("parse error: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let config: Config =
        toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| Error::Config(format!("override `{spec}` is not KEY=VALUE")))?;
    let (key, raw) = (key.trim(), raw.trim());
    let path: Vec<&str> = key.split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` has an empty component")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("split yields at least one component");
    let mut table = doc;
    for p in parents {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table =
            entry.as_table_mut().ok_or_else(|| Error::Config(format!("override key `{key}`: `{p}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[params]\nd = 3\nc = 0.1\nalpha = 2.0\nomega = 1.0\n";

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.params, Params::new(3, 0.1, 2.0, 1.0).unwrap());
        assert_eq!(c.evolve.virial_radii, vec![10.0, 20.0, 40.0]);
        assert_eq!(c.grid.r_max, 120.0);
    }

    #[test]
    fn round_trip() {
        let mut c = Config::new(Params::new(4, 0.5, 1.5, 1.0).unwrap());
        c.evolve.virial_radii = vec![5.0, 20.0];
        c.solver.method = Method::Shooting;
        c.output_dir = PathBuf::from("runs/a b");
        let back = parse_config(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn inadmissible_parameters_quote_the_bound() {
        let e = parse_config(&MINIMAL.replace("c = 0.1", "c = 0.25")).unwrap_err();
        assert!(e.to_string().contains("supercritical potential strength"), "{e}");
        assert!(e.is_validation());
        let e = parse_config(&MINIMAL.replace("alpha = 2.0", "alpha = 1.3333333333333333")).unwrap_err();
        assert!(e.to_string().contains("exponent outside intercritical range"), "{e}");
    }

    #[test]
    fn malformed_document_reports_line() {
        let e = parse_config("[params]\nd = 3\nc = = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(parse_config("[params]\nd = 3\nc = 0.1\nalpha = 2.0\nomega = 1.0\nbogus = 1\n").is_err());
    }

    #[test]
    fn virial_radius_bounded_by_grid() {
        let e = parse_config_with_overrides(MINIMAL, &["grid.r_max=60".into()]).unwrap_err();
        assert!(e.to_string().contains("r_max / 3"), "{e}");
        assert!(parse_config_with_overrides(MINIMAL, &["evolve.virial_radii=[1.0, 20]".into()]).is_err());
        let e = parse_config_with_overrides(MINIMAL, &["evolve.glassey_radius=15".into()]).unwrap_err();
        assert!(e.to_string().contains("glassey_radius"), "{e}");
    }

    #[test]
    fn overrides_apply_dotted_keys() {
        let c = parse_config_with_overrides(
            MINIMAL,
            &[
                "params.c=-1".into(),
                "evolve.virial_radii=[5, 10]".into(),
                "evolve.glassey_radius=10".into(),
                "output_dir=here".into(),
                "solver.method=shooting".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.params.c, -1.0);
        assert_eq!(c.evolve.virial_radii, vec![5.0, 10.0]);
        assert_eq!(c.output_dir, PathBuf::from("here"));
        assert_eq!(c.solver.method, Method::Shooting);
        assert!(parse_config_with_overrides(MINIMAL, &["params".into()]).is_err());
        assert!(parse_config_with_overrides(MINIMAL, &["params.d.x=1".into()]).is_err());
    }
}
