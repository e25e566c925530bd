mod common;

use std::sync::Arc;

use hardy_nls::ground_state::{
    in_blowup_set, key_estimate_check, pohozaev_report, scaling_curve, shoot_ground_state, ShootingOptions,
};
use hardy_nls::{solve_ground_state, GridSpec, Method, Params, RadialGrid, SolveOptions};

use common::{reference_params, rel};

fn grid(d: u32, spec: GridSpec) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::from_spec(d, &spec).unwrap())
}

fn solve(p: &Params) -> hardy_nls::GroundState {
    solve_ground_state(p, &grid(p.d, GridSpec::default()), &SolveOptions::default()).unwrap()
}

/// Regression masses, cross-checked against the shooting solver.
#[test]
fn masses_match_reference_values() {
    let expect = [13.61185, 65.585, 22.276];
    for (p, m) in reference_params().iter().zip(expect) {
        let gs = solve(p);
        assert!(rel(gs.report.mass, m) < 2e-5, "{p:?}: {} vs {m}", gs.report.mass);
        // on the Nehari manifold S = alpha / (2 (alpha + 2)) lp
        assert!(rel(gs.d_rad_omega, gs.report.s_omega) < 1e-15);
    }
}

#[test]
fn cubic_three_dimensional_mass() {
    let p = Params::new(3, 0.0, 2.0, 1.0).unwrap();
    let gs = solve(&p);
    assert!(rel(gs.report.mass, 18.897251) < 1e-5, "{}", gs.report.mass);
    // sigma = 0: the profile is regular, phi(0) = 4.33739
    assert!(gs.sigma.abs() < 1e-15);
    assert!((gs.profile.values()[0] - 4.337388).abs() < 1e-4, "{}", gs.profile.values()[0]);
}

#[test]
fn pohozaev_identities_hold() {
    for p in reference_params() {
        let gs = solve(&p);
        let r = pohozaev_report(&gs);
        assert!(r.max() < 1e-6, "{p:?}: {r:?}");
        assert_eq!(gs.method, Method::ProjectedGradient);
    }
}

#[test]
fn shooting_agrees_with_descent_for_negative_c() {
    let p = Params::new(3, -1.0, 2.0, 1.0).unwrap();
    let g = grid(3, GridSpec { r_max: 30.0, ..GridSpec::default() });
    let a = solve_ground_state(&p, &g, &SolveOptions::default()).unwrap();
    let b = shoot_ground_state(&p, &g, &ShootingOptions::default()).unwrap();
    assert_eq!(b.method, Method::Shooting);
    let peak = a.profile.values().iter().cloned().fold(0.0, f64::max);
    let gap = a.profile.values().iter().zip(b.profile.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap / peak < 1e-4, "{}", gap / peak);
}

#[test]
fn deterministic() {
    let p = Params::new(4, 0.5, 1.5, 1.0).unwrap();
    let a = solve(&p);
    let b = solve(&p);
    assert_eq!(a.profile.values(), b.profile.values());
    assert_eq!(a.iterations, b.iterations);
}

/// Halving `r_min` moves the diagnostics by well under 1%.
#[test]
fn stable_under_origin_truncation() {
    let p = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let a = solve_ground_state(&p, &grid(3, GridSpec { r_min: 1e-6, ..GridSpec::default() }), &SolveOptions::default())
        .unwrap();
    let b = solve_ground_state(&p, &grid(3, GridSpec { r_min: 5e-7, ..GridSpec::default() }), &SolveOptions::default())
        .unwrap();
    for (x, y) in
        [(a.d_rad_omega, b.d_rad_omega), (a.report.mass, b.report.mass), (a.report.hardy_sq, b.report.hardy_sq)]
    {
        assert!(rel(x, y) < 1e-4, "{x} vs {y}");
    }
}

#[test]
fn converges_under_refinement() {
    let p = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let d: Vec<f64> = [2048, 4096, 8192]
        .iter()
        .map(|&n| {
            let g = grid(3, GridSpec { n, r_max: 30.0, ..GridSpec::default() });
            solve_ground_state(&p, &g, &SolveOptions::default()).unwrap().d_rad_omega
        })
        .collect();
    let (e1, e2) = ((d[1] - d[0]).abs(), (d[2] - d[1]).abs());
    assert!(e2 < e1 / 2.0, "{d:?}");
    assert!(e2 < 1e-5 * d[2], "{d:?}");
}

#[test]
fn scaling_curve_shape() {
    let p = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let gs = solve(&p);
    let lambdas: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
    let c = scaling_curve(&gs, &lambdas).unwrap();
    assert!((lambdas[c.argmax_s()] - 1.0).abs() < 1e-12);
    for (l, q) in lambdas.iter().zip(&c.q_values) {
        if *l < 0.999 {
            assert!(*q > 0.0);
        } else if *l > 1.001 {
            assert!(*q < 0.0);
        }
    }
    assert!(scaling_curve(&gs, &[1.0, 0.5]).is_err());
    assert!(scaling_curve(&gs, &[0.0, 0.5]).is_err());
}

#[test]
fn blowup_set_and_key_estimate() {
    let p = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let gs = solve(&p);
    assert!(!in_blowup_set(&gs.profile, &gs));
    for lam in [0.7, 0.95] {
        let v = gs.profile.scale(lam).unwrap();
        assert!(!in_blowup_set(&v, &gs));
        assert!(key_estimate_check(&v, &gs).is_err());
    }
    for lam in [1.05, 1.1, 1.5, 3.0] {
        let v = gs.profile.scale(lam).unwrap();
        assert!(in_blowup_set(&v, &gs), "lambda {lam}");
        let k = key_estimate_check(&v, &gs).unwrap();
        assert!(k.holds && k.lhs < 0.0, "lambda {lam}: {k:?}");
    }
}

#[test]
fn rejects_bad_options() {
    let p = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let g = grid(3, GridSpec::default());
    let bad = SolveOptions { tol: 0.0, ..SolveOptions::default() };
    assert!(solve_ground_state(&p, &g, &bad).unwrap_err().is_validation());
    let starved = SolveOptions { max_iter: 1, ..SolveOptions::default() };
    let e = solve_ground_state(&p, &g, &starved).unwrap_err();
    assert!(matches!(e, hardy_nls::Error::NonConvergence { .. }), "{e}");
}
