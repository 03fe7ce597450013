//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use lattice_wave::lattice_fourier::{GridField, LatticeGrid};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `sum_k u_k exp(-2 pi i k.m / N)` by direct summation.
pub fn brute_dft(grid: &LatticeGrid, values: &[Complex64]) -> Vec<Complex64> {
    let n = grid.points() as f64;
    (0..grid.len())
        .map(|m| {
            let mi = grid.multi_index(m);
            (0..grid.len())
                .map(|k| {
                    let ki = grid.multi_index(k);
                    let phase: f64 = (0..grid.dim()).map(|j| (ki[j] * mi[j]) as f64).sum();
                    values[k] * Complex64::from_polar(1.0, -2.0 * PI * phase / n)
                })
                .sum()
        })
        .collect()
}

/// `4 sum_j sin^2(pi m_j / N) / hbar^2` from the textbook dispersion relation.
pub fn lattice_beta2(mode: &[i64], points: usize, hbar: f64) -> f64 {
    mode.iter()
        .map(|&m| (2.0 - 2.0 * (2.0 * PI * m as f64 / points as f64).cos()) / (hbar * hbar))
        .sum()
}

/// `v'' + omega^2 v = 0`: `(v, v')` at time `t`.
pub fn oscillator(v0: Complex64, v1: Complex64, omega: f64, t: f64) -> (Complex64, Complex64) {
    if omega == 0.0 {
        return (v0 + v1 * t, v1);
    }
    let (s, co) = (omega * t).sin_cos();
    (v0 * co + v1 * s / omega, -v0 * omega * s + v1 * co)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_field(rng: &mut impl Rng, grid: LatticeGrid) -> GridField {
    let values = (0..grid.len()).map(|_| random_complex(rng)).collect();
    GridField::new(grid, values).unwrap()
}

/// Hölder seminorm bound of the Weierstrass partial sum
/// `sum_{j<=depth} 2^{-alpha j} cos(2^j t)` of order `gamma` on `[0, T]`,
/// from `|cos x - cos y| <= min(2, |x - y|)` and a dense logarithmic scan in `h`.
pub fn weierstrass_holder_bound(alpha: f64, depth: u32, gamma: f64, horizon: f64) -> f64 {
    let f = |h: f64| -> f64 {
        (0..=depth)
            .map(|j| {
                let s = 2f64.powi(j as i32);
                s.powf(-alpha) * (s * h).min(2.0)
            })
            .sum::<f64>()
            / h.powf(gamma)
    };
    let mut best: f64 = 0.0;
    let steps = 20_000;
    let lo = (1e-9f64).ln();
    let hi = horizon.ln();
    for i in 0..=steps {
        best = best.max(f((lo + (hi - lo) * i as f64 / steps as f64).exp()));
    }
    for j in 0..=depth {
        let h = 2f64.powi(1 - j as i32);
        if h <= horizon {
            best = best.max(f(h));
        }
    }
    best
}

/// `int_{-1}^{1} |phi'|` for the normalized bump, by Simpson's rule (equals `2 phi(0)`).
pub fn bump_derivative_l1() -> f64 {
    let bump = |x: f64| if x.abs() >= 1.0 { 0.0 } else { (-1.0 / (1.0 - x * x)).exp() };
    let n = 200_000;
    let h = 2.0 / n as f64;
    let mass: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * bump(-1.0 + i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    2.0 * bump(0.0) / mass
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_lattice-wave"))
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the binary with `LATTICE_WAVE_WORKERS` set to `workers` (or unset).
pub fn run_cli(args: &[&str], workers: Option<usize>) -> CliRun {
    let mut cmd = Command::new(binary());
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("LATTICE_WAVE_WORKERS", w.to_string()),
        None => cmd.env_remove("LATTICE_WAVE_WORKERS"),
    };
    let out = cmd.output().expect("binary runs");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Config for a Case-1 verify with `a = 1` and only the zero mode excited.
pub fn zero_mode_verify(k_scale: f64) -> String {
    format!(
        "[run]\nmode = verify\nT = 1\n\n[grid]\nn = 1\nN = 64\nhbar = 0.1\n\n[a]\nkind = constant\nvalue = 1\n\n[data]\nu0 = zero\nu1 = series 0:1:0\n\n[debug]\nk_scale = {k_scale}\n"
    )
}
