mod common;

use std::f64::consts::PI;

use common::{c, lattice_beta2, loglog_slope};
use lattice_wave::coefficients::*;
use lattice_wave::lattice_fourier::{GridField, LatticeGrid};
use lattice_wave::semiclassical::*;
use lattice_wave::Error;
use proptest::prelude::*;

fn one() -> CoefficientProfile {
    CoefficientProfile::constant(1.0, 1.0).unwrap()
}

fn zero() -> CoefficientProfile {
    CoefficientProfile::constant(0.0, 1.0).unwrap()
}

fn series(terms: &[(i64, f64, f64)]) -> BandLimited {
    BandLimited::new(1, 1.0, terms.iter().map(|&(m, re, im)| ([m, 0, 0], c(re, im))).collect()).unwrap()
}

#[test]
fn eigenmode_defect_matches_closed_form() {
    for (points, m) in [(8usize, 1i64), (16, 3), (64, 5), (128, -7)] {
        let hbar = 1.0 / points as f64;
        let grid = LatticeGrid::new(1, points, hbar).unwrap();
        let v = BandLimited::single_mode(1, 1.0, &[m]).unwrap();
        let beta2 = lattice_beta2(&[m], points, hbar);
        let kappa2 = (2.0 * PI * m as f64).powi(2);
        let oracle = ((1.0 + beta2) * (beta2 - kappa2)).abs();
        let weighted = taylor_defect_series(&v, &grid, LatticeNorm::Weighted).unwrap();
        assert!((weighted - oracle).abs() <= 1e-10 * oracle, "N {points} m {m}: {weighted} vs {oracle}");
        let counting = taylor_defect_series(&v, &grid, LatticeNorm::Counting).unwrap();
        assert!((counting - oracle * (points as f64).sqrt()).abs() <= 1e-10 * counting);
    }
}

#[test]
fn defect_decays_at_second_order() {
    let terms: Vec<(i64, f64, f64)> = (-2..=2).map(|m| (m, (-2.0 * (m * m) as f64).exp(), 0.0)).collect();
    let v = series(&terms);
    let hbars = dyadic_hbars(3, 7);
    let defects: Vec<f64> = hbars
        .iter()
        .map(|&h| {
            let grid = LatticeGrid::new(1, (1.0 / h).round() as usize, h).unwrap();
            taylor_defect_series(&v, &grid, LatticeNorm::Weighted).unwrap()
        })
        .collect();
    let slope = loglog_slope(&hbars, &defects);
    assert!((1.9..=2.1).contains(&slope), "slope {slope}");
}

#[test]
fn defect_rejects_nyquist_content() {
    let grid = LatticeGrid::new(1, 8, 0.125).unwrap();
    let alternating = GridField::from_fn(grid, |k| c(if k[0] % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).unwrap();
    assert!(matches!(taylor_defect(&alternating, LatticeNorm::Weighted), Err(Error::Aliased { .. })));
}

#[test]
fn continuum_symbol_reproduces_the_torus_solution() {
    let u0 = series(&[(1, 1.0, 0.0), (-1, 0.5, 0.25), (2, 0.0, -0.3)]);
    let u1 = series(&[(0, 0.2, 0.0), (1, 0.0, 1.0)]);
    let a = make_weierstrass(0.5, 6, 1.0, 1.0).unwrap();
    let spec = ContinuumSpec::new(a, zero(), u0, u1, 1.0);
    let options = StudyOptions { use_continuum_symbol: true };
    let r = convergence_study(&spec, &dyadic_hbars(3, 5), options).unwrap();
    for (e, d) in r.errors.iter().zip(&r.derrors) {
        assert!(*e < 1e-12 && *d < 1e-12, "{e:e} {d:e}");
    }
}

#[test]
fn zero_data_gives_zero_errors() {
    let z = BandLimited::zero(1, 1.0).unwrap();
    let spec = ContinuumSpec::new(one(), zero(), z.clone(), z, 1.0);
    let r = convergence_study(&spec, &dyadic_hbars(2, 4), StudyOptions::default()).unwrap();
    assert!(r.errors.iter().chain(&r.derrors).all(|e| *e == 0.0));
    assert_eq!(r.fitted_order, f64::INFINITY);
    assert!(r.monotone);
}

#[test]
fn central_difference_bound_holds_for_sines() {
    for k in [1.0f64, 3.0, 10.0] {
        for xi in [0.0, 0.3, 1.7, -2.2] {
            for p in 1..=12 {
                let step = 2f64.powi(-p);
                let r = central_difference_identity_check(
                    |x| (k * x).sin(),
                    |x| -k * k * (k * x).sin(),
                    k.powi(4),
                    xi,
                    step,
                );
                assert!(r.holds(), "k {k} xi {xi} step {step}: {} > {}", r.residual, r.bound);
            }
        }
    }
}

fn regimes() -> Vec<(&'static str, CoefficientProfile)> {
    vec![
        (
            "abs_sin",
            make_lipschitz(LipschitzParams::AbsSin { base: 1.0, amplitude: 0.5, omega: 3.0 }, 1.0).unwrap(),
        ),
        ("weierstrass_floor1", make_weierstrass(0.5, 8, 1.0, 1.0).unwrap()),
        ("degenerate_power1", make_degenerate_smooth(1, 1.0).unwrap()),
        ("weierstrass_floor0", make_weierstrass(0.5, 8, 0.0, 1.0).unwrap()),
    ]
}

#[test]
fn lattice_solutions_converge_at_second_order() {
    // modes up to 1 keep hbar = 1/4 within a quarter period of the cutoff
    let u0 = series(&[(1, 1.0, 0.0), (-1, 0.6, -0.2), (0, 0.3, 0.0)]);
    let u1 = series(&[(1, 0.0, 0.5), (-1, 0.4, 0.0)]);
    let hbars = dyadic_hbars(2, 6);
    for (name, a) in regimes() {
        let spec = ContinuumSpec::new(a, CoefficientProfile::constant(0.25, 1.0).unwrap(), u0.clone(), u1.clone(), 1.0);
        let r = convergence_study(&spec, &hbars, StudyOptions::default()).unwrap();
        assert!(r.monotone, "{name}: {:?}", r.diagnostics);
        for order in [r.order_u, r.order_du] {
            assert!((1.8..=2.2).contains(&order), "{name}: order {order}");
        }
        // the oracle fit agrees with the library fit
        assert!((loglog_slope(&hbars, &r.errors) - r.order_u).abs() < 1e-12);
        assert!((r.counting_fitted_order - (r.fitted_order - 0.5)).abs() < 1e-9, "{name}");
    }
}

#[test]
fn study_rejects_bad_ladders() {
    let u0 = series(&[(2, 1.0, 0.0)]);
    let spec = ContinuumSpec::new(one(), zero(), u0.clone(), u0, 1.0);
    assert!(convergence_study(&spec, &[0.25], StudyOptions::default()).is_err());
    assert!(convergence_study(&spec, &[0.125, 0.25], StudyOptions::default()).is_err());
    let err = convergence_study(&spec, &[0.25, 0.125], StudyOptions::default()).unwrap_err();
    assert!(err.to_string().contains("L/(4 hbar)"));
    let err = convergence_study(&spec, &[0.125, 1.0 / 9.0], StudyOptions::default()).unwrap_err();
    assert!(err.to_string().contains("N=L/hbar not an even integer"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn central_difference_is_exact_for_cubics(
        a0 in -5.0f64..5.0, a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, a3 in -5.0f64..5.0,
        xi in -2.0f64..2.0, step in 1e-3f64..1.0,
    ) {
        let phi = |x: f64| a0 + a1 * x + a2 * x * x + a3 * x * x * x;
        let phi2 = |x: f64| 2.0 * a2 + 6.0 * a3 * x;
        let r = central_difference_identity_check(phi, phi2, 0.0, xi, step);
        prop_assert!(r.residual <= 1e-12 * (1.0 + a0.abs() + a1.abs() + a2.abs() + a3.abs()) * 10.0);
    }

    #[test]
    fn defect_is_nonnegative_and_norms_scale(m in -6i64..=6, k in 4u32..=7) {
        let points = 1usize << k;
        let grid = LatticeGrid::new(1, points, 1.0 / points as f64).unwrap();
        let v = BandLimited::single_mode(1, 1.0, &[m]).unwrap();
        let w = taylor_defect_series(&v, &grid, LatticeNorm::Weighted).unwrap();
        let n = taylor_defect_series(&v, &grid, LatticeNorm::Counting).unwrap();
        prop_assert!(w >= 0.0);
        prop_assert!((n - w * (points as f64).sqrt()).abs() <= 1e-9 * (1.0 + n));
    }
}
