mod common;

use std::sync::Arc;

use hardy_nls::virial::{err_scale, virial_potential, virial_rhs};
use hardy_nls::{solve_ground_state, ComplexRadialField, GridSpec, Params, RadialGrid, SolveOptions};
use num_complex::Complex64;

fn gaussian(g: &Arc<RadialGrid>, width: f64) -> ComplexRadialField {
    ComplexRadialField::new(
        g.clone(),
        g.r().iter().map(|r| Complex64::new((-(r / width).powi(2)).exp(), 0.0)).collect(),
    )
    .unwrap()
}

#[test]
fn zero_field_has_zero_potential() {
    let g = common::grid(3);
    assert_eq!(virial_potential(&ComplexRadialField::zeros(g), 5.0).unwrap(), 0.0);
}

#[test]
fn inactive_cutoff_gives_second_moment() {
    let g = common::grid(3);
    let u = gaussian(&g, 1.0);
    let second: f64 = g.weights().iter().zip(g.r()).zip(u.values()).map(|((w, r), z)| w * r * r * z.norm_sqr()).sum();
    // |u|^2 < 1e-300 beyond r = 27, well inside R = 28
    assert!((virial_potential(&u, 28.0).unwrap() - second).abs() <= 1e-14 * second);
}

#[test]
fn potential_grows_and_saturates_in_r() {
    let g = common::grid(3);
    let u = gaussian(&g, 2.0);
    let v: Vec<f64> = [1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 14.0].iter().map(|&r| virial_potential(&u, r).unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-14)), "{v:?}");
    let (a, b) = (v[5], v[6]);
    assert!((b - a) / b < 1e-12, "{v:?}");
    assert!(virial_potential(&u, 1.0).is_err());
}

#[test]
fn ground_state_and_dilations() {
    let p = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let g = Arc::new(RadialGrid::from_spec(3, &GridSpec::default()).unwrap());
    let gs = solve_ground_state(&p, &g, &SolveOptions::default()).unwrap();
    let r = virial_rhs(&gs.profile.to_complex(), &p, 20.0).unwrap();
    for x in [r.rhs1, r.rhs2, r.rhs3] {
        assert!(x.abs() <= 1e-5 * gs.report.hardy_sq, "{r:?}");
    }
    let r = virial_rhs(&gs.profile.scale(1.2).unwrap().to_complex(), &p, 20.0).unwrap();
    assert!(r.rhs1 < 0.0 && r.rhs2 < 0.0 && r.rhs3 < 0.0, "{r:?}");
    assert_eq!(
        r.err_scale,
        err_scale(
            &p,
            20.0,
            hardy_nls::functionals::complex_report(&gs.profile.scale(1.2).unwrap().to_complex(), &p).hardy_sq
        )
    );
}

#[test]
fn err_scale_decreases_in_r() {
    let p = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let s: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&r| err_scale(&p, r, 50.0)).collect();
    assert!(s[0] > s[1] && s[1] > s[2]);
    assert!((err_scale(&p, 10.0, 0.0) - 0.01).abs() < 1e-15);
}
