//! Closed-form oracles run by `lattice-wave selftest`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::coefficients::CoefficientProfile;
use crate::config::parse_config;
use crate::lattice_fourier::{apply_lattice_laplacian, forward_dft, GridField, LatticeGrid};
use crate::mode_ode::{integrate_mode, ModeProblem};
use crate::semiclassical::{
    central_difference_identity_check, continuum_solve, sobolev_threshold_note, taylor_defect, BandLimited, ContinuumSpec,
    LatticeNorm,
};
use crate::wave_solver::{solve_cauchy, verify_solution, CauchySpec, VerifySettings};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "selftest {}: {verdict} ({})", self.name, self.detail)
    }
}

fn check(name: &'static str, outcome: crate::Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((pass, detail)) => CheckResult { name, pass, detail },
        Err(e) => CheckResult {
            name,
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn constant(v: f64) -> crate::Result<CoefficientProfile> {
    CoefficientProfile::constant(v, 1.0)
}

fn dft_of_constant() -> crate::Result<(bool, String)> {
    let grid = LatticeGrid::new(2, 8, 0.5)?;
    let f = GridField::from_fn(grid, |_| Complex64::new(2.0, 0.0))?;
    let c = forward_dft(&f);
    let off: f64 = c.coeffs()[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dc = (c.coeffs()[0] - Complex64::new(128.0, 0.0)).norm();
    Ok((off < 1e-12 && dc < 1e-12, format!("off-peak {off:e}, peak error {dc:e}")))
}

fn laplacian_kills_constants() -> crate::Result<(bool, String)> {
    let grid = LatticeGrid::new(3, 4, 0.25)?;
    let f = GridField::from_fn(grid, |_| Complex64::new(1.0, -1.0))?;
    let m = apply_lattice_laplacian(&f).values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((m == 0.0, format!("max |L u| = {m:e}")))
}

fn zero_mode_has_zero_beta() -> crate::Result<(bool, String)> {
    let b = LatticeGrid::new(2, 16, 0.1)?.beta_squared_table()[0];
    Ok((b == 0.0, format!("beta^2(0) = {b:e}")))
}

fn cosine_mode() -> crate::Result<(bool, String)> {
    let (a, b) = (constant(1.0)?, constant(0.0)?);
    let p = ModeProblem::homogeneous(9.0, &a, &b, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 1.0);
    let tr = integrate_mode(&p, 1e-10)?;
    let err = tr
        .times
        .iter()
        .zip(&tr.v)
        .map(|(t, v)| (v - Complex64::new((3.0 * t).cos(), 0.0)).norm())
        .fold(0.0, f64::max);
    Ok((err < 1e-8, format!("max error {err:e}")))
}

fn zero_data_stays_zero() -> crate::Result<(bool, String)> {
    let grid = LatticeGrid::new(1, 16, 0.25)?;
    let spec = CauchySpec::new(grid, constant(1.0)?, constant(0.0)?, GridField::zeros(grid), GridField::zeros(grid), 1.0);
    let sol = solve_cauchy(&spec)?;
    let ok = sol.modes.iter().all(|m| m.is_zero());
    Ok((ok, "all mode trajectories identically zero".into()))
}

fn constant_case1_verifies() -> crate::Result<(bool, String)> {
    let grid = LatticeGrid::new(1, 32, 0.125)?;
    let u0 = GridField::from_fn(grid, |k| Complex64::new((k[0] as f64).sin(), 0.5))?;
    let spec = CauchySpec::new(grid, constant(2.0)?, constant(1.0)?, u0.clone(), u0, 1.0);
    let sol = solve_cauchy(&spec)?;
    let reports = verify_solution(&spec, &sol, VerifySettings::default())?;
    let fails = reports.iter().filter(|r| !r.pass()).count();
    Ok((fails == 0, format!("{fails} of {} modes failed", reports.len())))
}

fn defect_of_constant() -> crate::Result<(bool, String)> {
    let grid = LatticeGrid::new(1, 16, 1.0 / 16.0)?;
    let v = GridField::from_fn(grid, |_| Complex64::new(1.0, 0.0))?;
    let d = taylor_defect(&v, LatticeNorm::Counting)?;
    Ok((d == 0.0, format!("defect {d:e}")))
}

fn quartic_difference() -> crate::Result<(bool, String)> {
    let r = central_difference_identity_check(|x| x.powi(4), |x| 12.0 * x * x, 24.0, 0.0, 1.0);
    Ok((r.residual == 2.0 && r.holds(), format!("residual {} bound {}", r.residual, r.bound)))
}

fn quadratic_difference() -> crate::Result<(bool, String)> {
    let r = central_difference_identity_check(|x| 3.0 * x * x - x, |_| 6.0, 0.0, 0.7, 1.0);
    Ok((r.residual < 1e-14, format!("residual {:e}", r.residual)))
}

fn torus_eigenmode() -> crate::Result<(bool, String)> {
    let u0 = BandLimited::single_mode(1, 1.0, &[1])?;
    let spec = ContinuumSpec::new(constant(1.0)?, constant(0.0)?, u0, BandLimited::zero(1, 1.0)?, 1.0);
    let sol = continuum_solve(&spec)?;
    let err = sol.trajectories[0]
        .times
        .iter()
        .zip(&sol.trajectories[0].v)
        .map(|(t, v)| (v - Complex64::new((2.0 * PI * t).cos(), 0.0)).norm())
        .fold(0.0, f64::max);
    Ok((err < 1e-8, format!("max error {err:e}")))
}

fn torus_zero_mode() -> crate::Result<(bool, String)> {
    let u0 = BandLimited::single_mode(1, 1.0, &[0])?.scaled(Complex64::new(0.5, 0.25));
    let spec = ContinuumSpec::new(constant(1.0)?, constant(0.0)?, u0, BandLimited::zero(1, 1.0)?, 1.0);
    let sol = continuum_solve(&spec)?;
    let err = sol.trajectories[0]
        .v
        .iter()
        .map(|v| (v - Complex64::new(0.5, 0.25)).norm())
        .fold(0.0, f64::max);
    Ok((err < 1e-12, format!("max drift {err:e}")))
}

fn sobolev_thresholds() -> crate::Result<(bool, String)> {
    let notes = [sobolev_threshold_note(1), sobolev_threshold_note(3), sobolev_threshold_note(4)];
    let ok = notes[0].index == 5.0 && !notes[0].strict && notes[1].index == 5.0 && notes[2].index == 5.0 && notes[2].strict;
    Ok((ok, notes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("; ")))
}

fn config_contracts() -> crate::Result<(bool, String)> {
    let minimal = "[run]\nmode = solve\nT = 1\n[grid]\nn = 1\nN = 32\nhbar = 0.25\n[a]\nkind = constant\nvalue = 1\n[b]\nkind = constant\nvalue = 0\n[data]\nu0 = single_mode 1\n";
    let floor_zero = minimal.replace(
        "kind = constant\nvalue = 1",
        "kind = weierstrass\nalpha = 0.5\ndepth = 4\nfloor = 0\ncase = HolderStrict",
    );
    let uneven = "[run]\nmode = converge\nT = 1\n[grid]\nn = 1\nL = 1\nhbar = 0.5, 0.3\n[a]\nkind = constant\nvalue = 1\n[data]\nu0 = single_mode 1\n";
    let ok_minimal = parse_config(minimal).is_ok();
    let floor_msg = parse_config(&floor_zero).err().map(|e| e.to_string()).unwrap_or_default();
    let uneven_msg = parse_config(uneven).err().map(|e| e.to_string()).unwrap_or_default();
    let ok = ok_minimal && floor_msg.contains("floor > 0") && uneven_msg.contains("N=L/hbar not an even integer");
    Ok((ok, format!("minimal valid: {ok_minimal}")))
}

/// Runs every oracle; order is fixed.
pub fn run_selftest() -> Vec<CheckResult> {
    vec![
        check("dft_of_constant", dft_of_constant()),
        check("laplacian_kills_constants", laplacian_kills_constants()),
        check("zero_mode_has_zero_beta", zero_mode_has_zero_beta()),
        check("cosine_mode", cosine_mode()),
        check("zero_data_stays_zero", zero_data_stays_zero()),
        check("constant_case1_verifies", constant_case1_verifies()),
        check("defect_of_constant", defect_of_constant()),
        check("quartic_difference", quartic_difference()),
        check("quadratic_difference", quadratic_difference()),
        check("torus_eigenmode", torus_eigenmode()),
        check("torus_zero_mode", torus_zero_mode()),
        check("sobolev_thresholds", sobolev_thresholds()),
        check("config_contracts", config_contracts()),
    ]
}
