mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{lattice_beta2, random_field};
use lattice_wave::coefficients::*;
use lattice_wave::lattice_fourier::{GridField, LatticeGrid};
use lattice_wave::wave_solver::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn constant(v: f64) -> CoefficientProfile {
    CoefficientProfile::constant(v, 1.0).unwrap()
}

fn plane_wave(grid: LatticeGrid, m: i64) -> GridField {
    let n = grid.points() as f64;
    GridField::from_fn(grid, |k| Complex64::from_polar(1.0, 2.0 * PI * (m * k[0] as i64) as f64 / n)).unwrap()
}

fn sup_diff(x: &GridField, y: &GridField) -> f64 {
    x.max_abs_diff(y)
}

#[test]
fn spectral_solve_matches_method_of_lines() {
    let grid = LatticeGrid::new(1, 64, 1.0 / 64.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for floor in [1.0, 0.0] {
        let a = make_weierstrass(0.5, 8, floor, 1.0).unwrap();
        let spec = CauchySpec::new(grid, a, constant(0.5), random_field(&mut rng, grid), random_field(&mut rng, grid), 1.0);
        let sol = solve_cauchy(&spec).unwrap();
        let stride = (sol.sample_times.len() / 16).max(1);
        let picks: Vec<usize> = (0..sol.sample_times.len()).step_by(stride).chain([sol.sample_times.len() - 1]).collect();
        let times: Vec<f64> = picks.iter().map(|&i| sol.sample_times[i]).collect();
        let mol = method_of_lines(&spec, &times).unwrap();
        let worst = picks.iter().zip(&mol).map(|(&i, u)| sup_diff(&sol.u[i], u)).fold(0.0, f64::max);
        assert!(worst <= 1e-6, "floor {floor}: {worst:e}");
    }
}

#[test]
fn constant_speed_conserves_lattice_energy() {
    // sum_m beta^2 |v_m|^2 + |v_m'|^2 is invariant when a = 1 and b = 0
    let grid = LatticeGrid::new(2, 8, 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = CauchySpec::new(grid, constant(1.0), constant(0.0), random_field(&mut rng, grid), random_field(&mut rng, grid), 1.0);
    let sol = solve_cauchy(&spec).unwrap();
    let energy = |i: usize| -> f64 {
        sol.modes
            .iter()
            .zip(&sol.beta2)
            .map(|(m, b)| b * m.v[i].norm_sqr() + m.dv[i].norm_sqr())
            .sum()
    };
    let e0 = energy(0);
    for i in 0..sol.sample_times.len() {
        assert!((energy(i) - e0).abs() <= 1e-7 * e0);
    }
}

#[test]
fn plane_wave_oscillates_at_the_lattice_frequency() {
    let grid = LatticeGrid::new(1, 32, 0.1).unwrap();
    let m = 5;
    let spec = CauchySpec::new(grid, constant(2.0), constant(0.0), plane_wave(grid, m), GridField::zeros(grid), 1.0);
    let sol = solve_cauchy(&spec).unwrap();
    let omega = (2.0 * lattice_beta2(&[m], 32, 0.1)).sqrt();
    let wave = plane_wave(grid, m);
    for (t, u) in sol.sample_times.iter().zip(&sol.u).step_by(37) {
        let expected = GridField::new(grid, wave.values().iter().map(|z| z * (omega * t).cos()).collect()).unwrap();
        assert!(sup_diff(u, &expected) < 1e-7, "t = {t}");
    }
}

#[test]
fn separable_forcing_matches_closed_form() {
    // w'' + beta^2 w = 1 with zero data: w = (1 - cos(beta t)) / beta^2
    let grid = LatticeGrid::new(1, 32, 0.1).unwrap();
    let m = 3;
    let mut spec = CauchySpec::new(grid, constant(1.0), constant(0.0), GridField::zeros(grid), GridField::zeros(grid), 1.0);
    spec.forcing = Forcing::Separable { g: constant(1.0), shape: plane_wave(grid, m) };
    let sol = solve_cauchy(&spec).unwrap();
    let beta = lattice_beta2(&[m], 32, 0.1).sqrt();
    let wave = plane_wave(grid, m);
    for (t, u) in sol.sample_times.iter().zip(&sol.u).step_by(29) {
        let w = (1.0 - (beta * t).cos()) / (beta * beta);
        let expected = GridField::new(grid, wave.values().iter().map(|z| z * w).collect()).unwrap();
        assert!(sup_diff(u, &expected) < 1e-9, "t = {t}");
    }
    let reports = verify_solution(&spec, &sol, VerifySettings::default()).unwrap();
    assert!(reports.iter().all(ModeReport::pass));
    assert!(reports.iter().all(|r| r.corollary_ratio.is_some_and(|x| x <= 1.0)));
}

#[test]
fn general_forcing_agrees_with_separable() {
    let grid = LatticeGrid::new(1, 16, 0.125).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let shape = random_field(&mut rng, grid);
    let a = make_weierstrass(0.5, 5, 1.0, 1.0).unwrap();
    let g = make_lipschitz(LipschitzParams::Linear { intercept: 0.5, slope: 2.0 }, 1.0).unwrap();
    let (u0, u1) = (random_field(&mut rng, grid), random_field(&mut rng, grid));
    let mut sep = CauchySpec::new(grid, a, constant(0.0), u0, u1, 1.0);
    let mut general = sep.clone();
    sep.forcing = Forcing::Separable { g: g.clone(), shape: shape.clone() };
    general.forcing = Forcing::General(Arc::new(move |t| {
        GridField::new(grid, shape.values().iter().map(|z| z * g.eval(t)).collect()).unwrap()
    }));
    let (x, y) = (solve_cauchy(&sep).unwrap(), solve_cauchy(&general).unwrap());
    assert!(sup_diff(x.final_u(), y.final_u()) < 1e-9);
    assert!(sup_diff(x.final_du(), y.final_du()) < 1e-9);
}

#[test]
fn worker_count_does_not_change_results() {
    let grid = LatticeGrid::new(1, 64, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let spec = CauchySpec::new(
        grid,
        make_weierstrass(0.5, 8, 0.0, 1.0).unwrap(),
        constant(0.0),
        random_field(&mut rng, grid),
        random_field(&mut rng, grid),
        1.0,
    );
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let sol = solve_cauchy(&spec).unwrap();
            let reports = verify_solution(&spec, &sol, VerifySettings::default()).unwrap();
            (sol.final_u().clone(), reports.iter().map(|r| r.certificate.realized_ratio).collect::<Vec<_>>())
        })
    };
    let (u1, r1) = run(1);
    let (u3, r3) = run(3);
    assert_eq!(u1, u3);
    assert_eq!(r1, r3);
}

#[test]
fn wellposedness_report_is_consistent() {
    let grid = LatticeGrid::new(1, 32, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = CauchySpec::new(grid, constant(1.0), constant(0.0), random_field(&mut rng, grid), random_field(&mut rng, grid), 1.0);
    let sol = solve_cauchy(&spec).unwrap();
    let reports = verify_solution(&spec, &sol, VerifySettings::default()).unwrap();
    let report = wellposedness_report(&spec, &sol, Some(&reports)).unwrap();
    assert!((report.operator_norm - 401.0).abs() < 1e-9);
    assert!(report.all_certificates_pass);
    assert!(report.rows.iter().all(|r| r.ratio <= 1.0));
    let rhs = spec.u0.norm_sqr() + spec.u1.norm_sqr();
    assert!((report.rhs - rhs).abs() <= 1e-12 * rhs);
    // Plancherel: the mode sums reproduce the lattice norms
    let last = report.rows.last().unwrap();
    assert!((last.l2_u - sol.final_u().norm_sqr()).abs() <= 1e-10 * last.l2_u);
}

#[test]
fn invalid_specs_are_rejected() {
    let grid = LatticeGrid::new(1, 8, 0.5).unwrap();
    let other = LatticeGrid::new(1, 16, 0.5).unwrap();
    let spec = CauchySpec::new(grid, constant(1.0), constant(0.0), GridField::zeros(other), GridField::zeros(grid), 1.0);
    assert!(solve_cauchy(&spec).is_err());
    let spec = CauchySpec::new(grid, constant(1.0), constant(-1.0), GridField::zeros(grid), GridField::zeros(grid), 1.0);
    assert!(solve_cauchy(&spec).is_err());
    let spec = CauchySpec::new(grid, constant(1.0), constant(0.0), GridField::zeros(grid), GridField::zeros(grid), 0.0);
    assert!(solve_cauchy(&spec).is_err());
    let spec = CauchySpec::new(grid, constant(1.0), constant(1e30), GridField::zeros(grid), GridField::zeros(grid), 1.0);
    assert!(solve_cauchy(&spec).unwrap_err().is_numerical());
}
