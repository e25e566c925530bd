#![allow(dead_code)]

use std::sync::Arc;

use hardy_nls::{ComplexRadialField, Params, RadialGrid, RealRadialField};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn grid(d: u32) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(d, 1e-6, 30.0, 2000, 1e5).unwrap())
}

/// Sum of a few Gaussian bumps with random centres, widths and amplitudes,
/// times a smooth cutoff vanishing beyond `r = 20`.
pub fn random_real(g: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> RealRadialField {
    let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..5))
        .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..8.0), rng.gen_range(0.3..3.0)))
        .collect();
    let mut f = RealRadialField::from_fn(g.clone(), |r| {
        let s: f64 = bumps.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum();
        s * cutoff(r)
    })
    .unwrap();
    let n = f.values().len();
    f.values_mut()[n - 1] = 0.0;
    f
}

pub fn random_complex(g: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> ComplexRadialField {
    let re = random_real(g, rng);
    let im = random_real(g, rng);
    let k = rng.gen_range(0.0..3.0);
    let v = re
        .values()
        .iter()
        .zip(im.values())
        .zip(g.r())
        .map(|((a, b), r)| Complex64::new(*a, *b) * Complex64::from_polar(1.0, k * r))
        .collect();
    ComplexRadialField::new(g.clone(), v).unwrap()
}

/// `r^{-beta}` with `beta` just below the Hardy exponent `(d - 2) / 2`, times
/// a Gaussian tail and the cutoff: nearly extremal for the Hardy inequality.
pub fn near_extremal(g: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> RealRadialField {
    let beta = (g.d() as f64 - 2.0) / 2.0 - rng.gen_range(1e-3..0.3);
    let width = rng.gen_range(1.0..6.0);
    let mut f =
        RealRadialField::from_fn(g.clone(), |r| r.powf(-beta) * (-(r / width).powi(2)).exp() * cutoff(r)).unwrap();
    let n = f.values().len();
    f.values_mut()[n - 1] = 0.0;
    f
}

fn cutoff(r: f64) -> f64 {
    if r >= 20.0 {
        0.0
    } else if r <= 15.0 {
        1.0
    } else {
        let x = (r - 15.0) / 5.0;
        (1.0 - x * x).powi(3)
    }
}

/// The three parameter sets of the reference runs.
pub fn reference_params() -> [Params; 3] {
    [
        Params::new(3, 0.1, 2.0, 1.0).unwrap(),
        Params::new(3, -1.0, 2.0, 1.0).unwrap(),
        Params::new(4, 0.5, 1.5, 1.0).unwrap(),
    ]
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
