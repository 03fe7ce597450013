//! The per-frequency oscillator `v'' + (beta^2 a(t) + b(t)) v = g(t)`.
//!
//! Internally the state is `V = (i v, v')`, which satisfies
//! `V' = i M(t) V + (0, g)` with `M = [[0, 1], [beta^2 a + b, 0]]`.

use num_complex::Complex64;

use crate::coefficients::CoefficientProfile;
use crate::error::{Error, Result};
use crate::rk::{integrate, IntegratorStats, StepControl};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub type ScalarForcing<'a> = &'a (dyn Fn(f64) -> Complex64 + Sync);

pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-3;

/// Largest number of sample intervals a trajectory may request.
pub const MAX_SAMPLES: usize = 1 << 24;

#[derive(Clone, Copy)]
pub struct ModeProblem<'a> {
    pub beta2: f64,
    pub a: &'a CoefficientProfile,
    pub b: &'a CoefficientProfile,
    pub g: Option<ScalarForcing<'a>>,
    pub v0: Complex64,
    pub v1: Complex64,
    pub horizon: f64,
}

impl<'a> ModeProblem<'a> {
    pub fn homogeneous(
        beta2: f64,
        a: &'a CoefficientProfile,
        b: &'a CoefficientProfile,
        v0: Complex64,
        v1: Complex64,
        horizon: f64,
    ) -> Self {
        Self {
            beta2,
            a,
            b,
            g: None,
            v0,
            v1,
            horizon,
        }
    }

    pub fn with_forcing(mut self, g: ScalarForcing<'a>) -> Self {
        self.g = Some(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta2.is_finite() && self.beta2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta^2 must be non-negative, got {}",
                self.beta2
            )));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.v0.norm().is_finite() && self.v1.norm().is_finite()) {
            return Err(Error::InvalidParameter("initial data must be finite".into()));
        }
        Ok(())
    }

    /// `sqrt(beta^2 a1 + b_max)`, the fastest local frequency.
    pub fn frequency_bound(&self) -> f64 {
        (self.beta2 * self.a.a1().max(0.0) + self.b.a1().max(0.0)).sqrt()
    }

    pub fn step_cap(&self) -> f64 {
        0.2 / (1.0 + self.frequency_bound())
    }

    /// Default number of uniform sample intervals.
    pub fn sample_count(&self) -> usize {
        sample_count(self.horizon, self.frequency_bound())
    }

    fn speed(&self, t: f64) -> f64 {
        self.beta2 * self.a.eval(t) + self.b.eval(t)
    }

    fn forcing(&self, t: f64) -> Complex64 {
        self.g.map_or(ZERO, |g| g(t))
    }
}

/// `max(512, 8 ceil(T * omega))` sample intervals.
pub fn sample_count(horizon: f64, omega: f64) -> usize {
    let n = 8.0 * (horizon * omega).ceil();
    if n >= usize::MAX as f64 {
        return usize::MAX;
    }
    512usize.max(n as usize)
}

/// `M + 1` uniform times from 0 to `T`, the last one exactly `T`.
pub fn uniform_times(horizon: f64, intervals: usize) -> Vec<f64> {
    let mut times: Vec<f64> = (0..=intervals)
        .map(|i| horizon * i as f64 / intervals as f64)
        .collect();
    times[intervals] = horizon;
    times
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub times: Vec<f64>,
    pub v: Vec<Complex64>,
    pub dv: Vec<Complex64>,
    pub stats: IntegratorStats,
}

impl ModeTrajectory {
    fn zero(times: Vec<f64>) -> Self {
        let n = times.len();
        Self {
            times,
            v: vec![ZERO; n],
            dv: vec![ZERO; n],
            stats: IntegratorStats::default(),
        }
    }

    /// `|V(t_i)|^2 = |v|^2 + |v'|^2` at every sample.
    pub fn energy(&self) -> Vec<f64> {
        self.v
            .iter()
            .zip(&self.dv)
            .map(|(v, dv)| v.norm_sqr() + dv.norm_sqr())
            .collect()
    }

    pub fn last(&self) -> (Complex64, Complex64) {
        (self.v[self.v.len() - 1], self.dv[self.dv.len() - 1])
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().chain(&self.dv).all(|z| *z == ZERO)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol:e} outside [{MIN_TOL:e}, {MAX_TOL:e}]"
        )));
    }
    Ok(())
}

/// Rejects frequencies the step cap cannot resolve and sample counts above [`MAX_SAMPLES`].
pub fn check_sampling(horizon: f64, omega: f64, intervals: usize) -> Result<()> {
    let cap = 0.2 / (1.0 + omega);
    if !(cap >= 1e-14 * horizon) {
        return Err(Error::Stiffness { t: 0.0, h: cap });
    }
    if intervals > MAX_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "{intervals} sample intervals exceed the limit of {MAX_SAMPLES}"
        )));
    }
    Ok(())
}

pub fn integrate_mode(p: &ModeProblem, tol: f64) -> Result<ModeTrajectory> {
    integrate_mode_sampled(p, tol, p.sample_count())
}

/// Same as [`integrate_mode`] on `intervals` uniform sample intervals.
pub fn integrate_mode_sampled(p: &ModeProblem, tol: f64, intervals: usize) -> Result<ModeTrajectory> {
    p.validate()?;
    check_tol(tol)?;
    check_sampling(p.horizon, p.frequency_bound(), intervals)?;
    let times = uniform_times(p.horizon, intervals.max(1));
    if p.v0 == ZERO && p.v1 == ZERO && p.g.is_none() {
        return Ok(ModeTrajectory::zero(times));
    }
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        dy[0] = I * y[1];
        dy[1] = I * p.speed(t) * y[0] + p.forcing(t);
    };
    let control = StepControl {
        tol,
        h_max: p.step_cap(),
    };
    let (states, stats) = integrate(rhs, &[I * p.v0, p.v1], &times, control)?;
    let mut v: Vec<Complex64> = states.iter().map(|s| -I * s[0]).collect();
    let mut dv: Vec<Complex64> = states.iter().map(|s| s[1]).collect();
    v[0] = p.v0;
    dv[0] = p.v1;
    Ok(ModeTrajectory {
        times,
        v,
        dv,
        stats,
    })
}

/// Homogeneous fundamental matrix plus quadrature of the propagated forcing.
///
/// With `Phi' = i M Phi`, `Phi(0) = I` and `det Phi = 1`, the solution is
/// `V(t) = Phi(t) (V(0) + int_0^t adj(Phi(s)) (0, g(s)) ds)`.
pub fn duhamel_solve(p: &ModeProblem, tol: f64) -> Result<ModeTrajectory> {
    duhamel_solve_sampled(p, tol, p.sample_count())
}

pub fn duhamel_solve_sampled(p: &ModeProblem, tol: f64, intervals: usize) -> Result<ModeTrajectory> {
    if p.g.is_none() {
        return integrate_mode_sampled(p, tol, intervals);
    }
    p.validate()?;
    check_tol(tol)?;
    check_sampling(p.horizon, p.frequency_bound(), intervals)?;
    let times = uniform_times(p.horizon, intervals.max(1));
    // state: phi11, phi12, phi21, phi22, q1, q2
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let c = p.speed(t);
        let g = p.forcing(t);
        dy[0] = I * y[2];
        dy[1] = I * y[3];
        dy[2] = I * c * y[0];
        dy[3] = I * c * y[1];
        dy[4] = -y[1] * g;
        dy[5] = y[0] * g;
    };
    let one = Complex64::new(1.0, 0.0);
    let y0 = [one, ZERO, ZERO, one, ZERO, ZERO];
    let control = StepControl {
        tol,
        h_max: p.step_cap(),
    };
    let (states, stats) = integrate(rhs, &y0, &times, control)?;
    let w0 = [I * p.v0, p.v1];
    let mut v = Vec::with_capacity(states.len());
    let mut dv = Vec::with_capacity(states.len());
    for s in &states {
        let x0 = w0[0] + s[4];
        let x1 = w0[1] + s[5];
        v.push(-I * (s[0] * x0 + s[1] * x1));
        dv.push(s[2] * x0 + s[3] * x1);
    }
    v[0] = p.v0;
    dv[0] = p.v1;
    Ok(ModeTrajectory {
        times,
        v,
        dv,
        stats,
    })
}

/// `exp(i M~)` for `M~ = [[0, tau], [m, 0]]`: `cos(sqrt(tau m)) I + i sinc(sqrt(tau m)) M~`.
pub fn constant_propagator(m: f64, tau: f64) -> [[Complex64; 2]; 2] {
    let x = (tau * m).max(0.0).sqrt();
    let cos = x.cos();
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    [
        [Complex64::new(cos, 0.0), Complex64::new(0.0, sinc * tau)],
        [Complex64::new(0.0, sinc * m), Complex64::new(cos, 0.0)],
    ]
}

/// Spectral norm of a 2x2 complex matrix.
pub fn operator_norm(m: &[[Complex64; 2]; 2]) -> f64 {
    let fro: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
    let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (fro + disc)).sqrt()
}

/// `1 + T (1 + beta^2 |a|_inf + |b|_inf)`, bounding `|exp(i M~)|` over `[0, T]`.
pub fn propagator_norm_bound(beta2: f64, a_sup: f64, b_sup: f64, horizon: f64) -> f64 {
    1.0 + horizon * (1.0 + beta2 * a_sup + b_sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn harmonic_oscillator() {
        let a = CoefficientProfile::constant(1.0, PI).unwrap();
        let b = CoefficientProfile::constant(0.0, PI).unwrap();
        let p = ModeProblem::homogeneous(4.0, &a, &b, c(1.0), c(0.0), PI);
        let tr = integrate_mode(&p, 1e-10).unwrap();
        assert!((tr.last().0 - c(1.0)).norm() < 1e-8);
        assert_eq!(tr.times[tr.times.len() - 1], PI);
    }

    #[test]
    fn free_motion() {
        let z = CoefficientProfile::constant(0.0, 2.0).unwrap();
        let p = ModeProblem::homogeneous(9.0, &z, &z, c(1.0), c(-0.5), 2.0);
        let tr = integrate_mode(&p, 1e-10).unwrap();
        for (t, v) in tr.times.iter().zip(&tr.v) {
            assert!((v - c(1.0 - 0.5 * t)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_data_shortcut() {
        let a = CoefficientProfile::constant(1.0, 1.0).unwrap();
        let p = ModeProblem::homogeneous(1.0, &a, &a, c(0.0), c(0.0), 1.0);
        let tr = integrate_mode(&p, 1e-10).unwrap();
        assert!(tr.is_zero());
        assert_eq!(tr.stats.steps, 0);
    }

    #[test]
    fn propagator_branches() {
        let m = constant_propagator(0.0, 1.0);
        assert_eq!(m, [[c(1.0), Complex64::new(0.0, 1.0)], [c(0.0), c(1.0)]]);
        let tau = PI * PI / 4.0;
        let m = constant_propagator(1.0, tau);
        let k = 2.0 / PI;
        assert!(m[0][0].norm() < 1e-15 && m[1][1].norm() < 1e-15);
        assert!((m[0][1] - Complex64::new(0.0, k * tau)).norm() < 1e-14);
        assert!((m[1][0] - Complex64::new(0.0, k)).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let a = CoefficientProfile::constant(1.0, 1.0).unwrap();
        let p = ModeProblem::homogeneous(1.0, &a, &a, c(1.0), c(0.0), 1.0);
        assert!(integrate_mode(&p, 1e-2).is_err());
        assert!(integrate_mode(&p, 1e-15).is_err());
    }
}
