use std::path::Path;

use hardy_nls::experiment::{parse_config_with_overrides, read_summary, run_experiment, Config, ExperimentKind};
use hardy_nls::Params;

fn config(dir: &Path) -> Config {
    let mut c = Config::new(Params::new(3, 0.1, 2.0, 1.0).unwrap());
    c.output_dir = dir.to_path_buf();
    c
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

#[test]
fn groundstate_run_writes_summary_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&config(dir.path()), ExperimentKind::Groundstate).unwrap();
    assert!(r.artifacts.iter().all(|p| p.exists()));
    let s = read_summary(&dir.path().join("summary.json")).unwrap();
    assert_eq!(s, r.summary);
    let gs = s.ground_state.unwrap();
    assert!(gs.d_rad_omega > 0.0);
    assert!(s.pohozaev.unwrap().max() <= 1e-4);
    let (header, rows) = read_csv(&dir.path().join("profile.csv"));
    assert_eq!(header, ["r", "phi"]);
    assert_eq!(rows.len(), 8192);
}

#[test]
fn scaling_run_changes_sign_once_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&config(dir.path()), ExperimentKind::Scaling).unwrap();
    let sc = r.summary.scaling.unwrap();
    assert_eq!(sc.argmax_lambda, 1.0);
    let (header, rows) = read_csv(&dir.path().join("scaling.csv"));
    assert_eq!(header, ["lambda", "s_omega", "q", "k_omega"]);
    let q: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let lam: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    // Q vanishes at lambda = 1 to solver accuracy; off it the sign is strict
    let changes: Vec<usize> = (0..q.len())
        .filter(|&i| (lam[i] - 1.0).abs() > 1e-12)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| (q[w[0]] > 0.0) != (q[w[1]] > 0.0))
        .map(|w| w[0])
        .collect();
    assert_eq!(changes.len(), 1);
    assert!(lam[changes[0]] < 1.0 && lam[changes[0] + 2] > 1.0);
}

#[test]
fn evolve_run_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let c = parse_config_with_overrides(
        &config(dir.path()).to_toml().unwrap(),
        &["evolve.lambda0=1".into(), "evolve.t_max=0.05".into(), "evolve.sample_every=0.01".into()],
    )
    .unwrap();
    let r = run_experiment(&c, ExperimentKind::Evolve).unwrap();
    let e = r.summary.evolution.unwrap();
    assert!(!e.verdict.blew_up);
    assert!(e.mass_drift < 1e-10 && e.modulus_deviation < 1e-4);
    let (header, rows) = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(header, ["t", "mass", "energy", "hardy_sq", "lp_alpha2", "q", "grad_norm", "V_10", "V_20", "V_40"]);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.iter().all(|x| x.is_finite())));
    assert!(r.summary.certification.is_none());
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        run_experiment(&config(d.path()), ExperimentKind::Scaling).unwrap();
    }
    for f in ["summary.json", "scaling.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn failures_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.evolve.lambda0 = 0.9;
    let f = run_experiment(&c, ExperimentKind::Instability).unwrap_err();
    assert_eq!(f.stage, "blowup_set");
    assert!(f.error.is_validation());

    c.solver.max_iter = 1;
    let f = run_experiment(&c, ExperimentKind::Groundstate).unwrap_err();
    assert_eq!(f.stage, "ground_state");
    assert!(!f.error.is_validation());
    assert!(f.to_string().contains("ground_state"));

    c.solver.max_iter = 100;
    c.params.c = 0.3;
    let f = run_experiment(&c, ExperimentKind::Groundstate).unwrap_err();
    assert_eq!(f.stage, "config");
    assert!(f.artifacts.is_empty());
}
