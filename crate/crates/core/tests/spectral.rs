mod common;

use common::{brute_dft, c, lattice_beta2, random_field};
use lattice_wave::lattice_fourier::*;
use lattice_wave::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_strategy() -> impl Strategy<Value = LatticeGrid> {
    (1usize..=2, prop::sample::select(vec![8usize, 16, 32]), 0.05f64..2.0)
        .prop_map(|(dim, points, hbar)| LatticeGrid::new(dim, points, hbar).unwrap())
}

fn field_strategy() -> impl Strategy<Value = GridField> {
    (grid_strategy(), any::<u64>()).prop_map(|(grid, seed)| random_field(&mut ChaCha8Rng::seed_from_u64(seed), grid))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn round_trip_is_identity(u in field_strategy()) {
        let back = inverse_dft(&forward_dft(&u));
        let scale = u.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(back.max_abs_diff(&u) <= 1e-12 * scale);
    }

    #[test]
    fn plancherel_holds(u in field_strategy()) {
        prop_assert!(plancherel_defect(&u) <= 1e-12 * u.norm_sqr());
    }

    #[test]
    fn stencil_matches_symbol(u in field_strategy()) {
        let stencil = apply_lattice_laplacian(&u);
        let spectral = apply_symbol_op(&Symbol::lattice_laplacian(), &u).unwrap();
        let scale = u.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(stencil.max_abs_diff(&spectral) <= 1e-11 * scale);
    }

    #[test]
    fn transform_is_linear(u in field_strategy(), s in -3.0f64..3.0, seed in any::<u64>()) {
        let v = random_field(&mut ChaCha8Rng::seed_from_u64(seed), *u.grid());
        let sum = GridField::new(*u.grid(), u.values().iter().zip(v.values()).map(|(a, b)| a * s + b).collect()).unwrap();
        let lhs = forward_dft(&sum);
        let (fu, fv) = (forward_dft(&u), forward_dft(&v));
        for ((l, a), b) in lhs.coeffs().iter().zip(fu.coeffs()).zip(fv.coeffs()) {
            prop_assert!((l - (a * s + b)).norm() <= 1e-10 * (1.0 + l.norm()));
        }
    }

    #[test]
    fn beta_squared_is_bounded(grid in grid_strategy()) {
        let top = 4.0 * grid.dim() as f64 / (grid.hbar() * grid.hbar());
        for b in grid.beta_squared_table() {
            prop_assert!((0.0..=top * (1.0 + 1e-14)).contains(&b));
        }
    }
}

#[test]
fn fft_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (dim, points) in [(1, 8), (1, 16), (2, 8), (3, 4)] {
        let grid = LatticeGrid::new(dim, points, 0.5).unwrap();
        let u = random_field(&mut rng, grid);
        let fast = forward_dft(&u);
        let slow = brute_dft(&grid, u.values());
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12 * grid.len() as f64);
        }
    }
}

#[test]
fn beta_squared_matches_cosine_form() {
    let grid = LatticeGrid::new(2, 16, 0.3).unwrap();
    let table = grid.beta_squared_table();
    for (k, b) in table.iter().enumerate() {
        let m = grid.signed_mode(k);
        let oracle = lattice_beta2(&m[..2], 16, 0.3);
        assert!((b - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }
}

#[test]
fn small_frequencies_approach_continuum_symbol() {
    // 4 sin^2(pi m / N) / hbar^2 against (2 pi m / L)^2 with L = N hbar
    let grid = LatticeGrid::new(1, 1000, 0.1).unwrap();
    let l = grid.period();
    for m in 1..=20i64 {
        let b = grid.beta_squared_table()[grid.index_of_mode(&[m])];
        let cont = (2.0 * std::f64::consts::PI * m as f64 / l).powi(2);
        assert!((b / cont - 1.0).abs() < 0.01, "m = {m}");
    }
}

#[test]
fn delta_transforms_to_ones() {
    let grid = LatticeGrid::new(2, 8, 1.0).unwrap();
    let delta = GridField::from_fn(grid, |k| if k.iter().all(|&x| x == 0) { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
    assert!(forward_dft(&delta).coeffs().iter().all(|z| *z == c(1.0, 0.0)));
}

#[test]
fn plane_wave_is_a_stencil_eigenfunction() {
    let grid = LatticeGrid::new(1, 32, 0.25).unwrap();
    let m = 5;
    let u = GridField::from_fn(grid, |k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (m * k[0]) as f64 / 32.0)).unwrap();
    let lu = apply_lattice_laplacian(&u);
    let lambda = -grid.hbar().powi(2) * lattice_beta2(&[m as i64], 32, grid.hbar());
    for (a, b) in lu.values().iter().zip(u.values()) {
        assert!((a - b * lambda).norm() < 1e-12);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(LatticeGrid::new(1, 7, 0.1), Err(Error::InvalidGrid(_))));
    assert!(matches!(LatticeGrid::new(4, 8, 0.1), Err(Error::InvalidGrid(_))));
    assert!(LatticeGrid::new(1, 8, 0.0).is_err());
    let grid = LatticeGrid::new(1, 4, 1.0).unwrap();
    assert!(GridField::new(grid, vec![c(f64::NAN, 0.0); 4]).is_err());
    assert!(GridField::new(grid, vec![c(0.0, 0.0); 3]).is_err());
    let u = GridField::zeros(grid);
    let bad = Symbol::new(|_| c(f64::INFINITY, 0.0));
    assert!(matches!(apply_symbol_op(&bad, &u), Err(Error::NonFiniteSymbol { .. })));
}
