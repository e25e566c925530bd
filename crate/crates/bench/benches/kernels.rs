use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hardy_nls::evolution::{make_initial_data, step_crank_nicolson, step_strang, EvolutionState};

use hardy_nls::tridiag::{solve_real, ComplexTridiagonalLu};
use hardy_nls::{functional_report, solve_ground_state, Complex64, GridSpec, Params, RadialGrid, SolveOptions};

fn setup() -> (Params, Arc<RadialGrid>) {
    let params = Params::new(3, 0.1, 2.0, 1.0).unwrap();
    let grid = Arc::new(RadialGrid::from_spec(3, &GridSpec::default()).unwrap());
    (params, grid)
}

fn ground_state(c: &mut Criterion) {
    let (params, grid) = setup();
    c.bench_function("solve_ground_state", |b| {
        b.iter(|| solve_ground_state(&params, &grid, &SolveOptions::default()).unwrap())
    });
}

fn kernels(c: &mut Criterion) {
    let (params, grid) = setup();
    let gs = solve_ground_state(&params, &grid, &SolveOptions::default()).unwrap();
    c.bench_function("functional_report", |b| b.iter(|| functional_report(black_box(&gs.profile), &params)));

    let state = EvolutionState { u: make_initial_data(&gs, 1.1).unwrap(), t: 0.0, dt: 1e-3 };
    c.bench_function("step_crank_nicolson", |b| b.iter(|| step_crank_nicolson(black_box(&state), &params).unwrap()));
    c.bench_function("step_strang", |b| b.iter(|| step_strang(black_box(&state), &params).unwrap()));

    let n = grid.len();
    let (lower, upper) = (vec![-1.0; n - 1], vec![-1.0; n - 1]);
    let diag = vec![2.5; n];
    let rhs = vec![1.0; n];
    c.bench_function("tridiag_real", |b| b.iter(|| solve_real(&lower, &diag, &upper, black_box(&rhs)).unwrap()));

    let cdiag = vec![Complex64::new(2.0, 1e-3); n];
    let coff = vec![Complex64::new(-1.0, 0.0); n - 1];
    let lu = ComplexTridiagonalLu::new(&cdiag, &coff).unwrap();
    let mut x = vec![Complex64::new(1.0, 0.0); n];
    c.bench_function("tridiag_complex_solve", |b| b.iter(|| lu.solve_in_place(black_box(&mut x))));
}

criterion_group! {
    name = slow;
    config = Criterion::default().sample_size(10);
    targets = ground_state
}
criterion_group!(fast, kernels);
criterion_main!(fast, slow);
