//! The `hbar -> 0` limit: the period-`L` torus problem as continuum reference,
//! the Taylor defect `(I - hbar^{-2} L_hbar)(hbar^{-2} L_hbar - Laplacian)`
//! and the lattice-to-continuum convergence study.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::{CaseTag, CoefficientProfile};
use crate::error::{Error, Result};
use crate::lattice_fourier::{forward_dft, inverse_dft, GridField, LatticeGrid, SpectralField, MAX_DIM};
use crate::mode_ode::{integrate_mode, ModeProblem, ModeTrajectory};
use crate::wave_solver::{solve_cauchy, CauchySpec, Forcing};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Finite Fourier series `sum_m c_m exp(2 pi i m.x / L)` on the period-`L` torus.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimited {
    dim: usize,
    period: f64,
    terms: Vec<([i64; MAX_DIM], Complex64)>,
}

impl BandLimited {
    pub fn new(dim: usize, period: f64, terms: Vec<([i64; MAX_DIM], Complex64)>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
        }
        let mut merged: Vec<([i64; MAX_DIM], Complex64)> = Vec::new();
        for (mut m, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidParameter("Fourier coefficient is not finite".into()));
            }
            for x in m.iter_mut().skip(dim) {
                *x = 0;
            }
            match merged.iter_mut().find(|(k, _)| *k == m) {
                Some((_, acc)) => *acc += c,
                None => merged.push((m, c)),
            }
        }
        merged.retain(|(_, c)| *c != ZERO);
        merged.sort_by_key(|(m, _)| *m);
        Ok(Self {
            dim,
            period,
            terms: merged,
        })
    }

    pub fn zero(dim: usize, period: f64) -> Result<Self> {
        Self::new(dim, period, Vec::new())
    }

    /// `exp(2 pi i m.x / L)`.
    pub fn single_mode(dim: usize, period: f64, mode: &[i64]) -> Result<Self> {
        let mut m = [0; MAX_DIM];
        m[..mode.len().min(MAX_DIM)].copy_from_slice(&mode[..mode.len().min(MAX_DIM)]);
        Self::new(dim, period, vec![(m, Complex64::new(1.0, 0.0))])
    }

    /// `sum_{|m_j| <= cutoff} exp(-width |m|^2) exp(2 pi i m.x / L)`.
    pub fn gaussian_series(dim: usize, period: f64, cutoff: i64, width: f64) -> Result<Self> {
        let side = (2 * cutoff + 1) as usize;
        let terms = (0..side.pow(dim as u32))
            .map(|mut flat| {
                let mut m = [0; MAX_DIM];
                for axis in (0..dim).rev() {
                    m[axis] = (flat % side) as i64 - cutoff;
                    flat /= side;
                }
                let r2: i64 = m.iter().map(|x| x * x).sum();
                (m, Complex64::new((-width * r2 as f64).exp(), 0.0))
            })
            .collect();
        Self::new(dim, period, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn terms(&self) -> &[([i64; MAX_DIM], Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|m_j|` over all terms and axes.
    pub fn max_mode(&self) -> i64 {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn coefficient(&self, mode: &[i64; MAX_DIM]) -> Complex64 {
        self.terms
            .iter()
            .find(|(m, _)| m == mode)
            .map_or(ZERO, |(_, c)| *c)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            period: self.period,
            terms: self.terms.iter().map(|(m, c)| (*m, c * factor)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let phase: f64 = (0..self.dim).map(|j| m[j] as f64 * x[j]).sum::<f64>();
                c * Complex64::from_polar(1.0, 2.0 * PI * phase / self.period)
            })
            .sum()
    }

    fn check_grid(&self, grid: &LatticeGrid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::InvalidField(format!(
                "series in dimension {} sampled on a {}-dimensional grid",
                self.dim,
                grid.dim()
            )));
        }
        if (grid.period() - self.period).abs() > 1e-12 * self.period {
            return Err(Error::InvalidField(format!(
                "grid period {} differs from series period {}",
                grid.period(),
                self.period
            )));
        }
        let limit = grid.points() as i64 / 2;
        match self.terms.iter().flat_map(|(m, _)| m.iter().copied()).find(|x| x.abs() >= limit) {
            Some(mode) => Err(Error::Aliased {
                mode,
                points: grid.points(),
            }),
            None => Ok(()),
        }
    }

    /// Values at the lattice points `hbar k`; every mode must lie strictly below Nyquist.
    pub fn sample(&self, grid: &LatticeGrid) -> Result<GridField> {
        self.check_grid(grid)?;
        let scale = grid.len() as f64;
        let mut coeffs = vec![ZERO; grid.len()];
        for (m, c) in &self.terms {
            coeffs[grid.index_of_mode(&m[..self.dim])] += c * scale;
        }
        Ok(inverse_dft(&SpectralField::new(*grid, coeffs)?))
    }

    /// Values at the lattice points by direct synthesis, without the transform.
    pub fn sample_direct(&self, grid: &LatticeGrid) -> Result<GridField> {
        self.check_grid(grid)?;
        let h = grid.hbar();
        GridField::from_fn(*grid, |idx| {
            let x: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
            self.eval(&x)
        })
    }
}

/// `4 pi^2 |m|^2 / L^2`, the continuum Laplacian symbol.
pub fn continuum_symbol(mode: &[i64], period: f64) -> f64 {
    let r2: f64 = mode.iter().map(|&m| (m * m) as f64).sum();
    4.0 * PI * PI * r2 / (period * period)
}

#[derive(Debug, Clone, Default)]
pub enum ContinuumForcing {
    #[default]
    Zero,
    /// `f(t, x) = g(t) F(x)` with band-limited `F`.
    Separable { g: CoefficientProfile, shape: BandLimited },
}

#[derive(Debug, Clone)]
pub struct ContinuumSpec {
    pub dim: usize,
    pub period: f64,
    pub a: CoefficientProfile,
    pub b: CoefficientProfile,
    pub forcing: ContinuumForcing,
    pub u0: BandLimited,
    pub u1: BandLimited,
    pub horizon: f64,
    pub case: CaseTag,
    pub ode_tol: f64,
    pub s: Option<f64>,
}

impl ContinuumSpec {
    /// Zero forcing, tolerance `1e-10`, case taken from `a`.
    pub fn new(a: CoefficientProfile, b: CoefficientProfile, u0: BandLimited, u1: BandLimited, horizon: f64) -> Self {
        Self {
            dim: u0.dim(),
            period: u0.period(),
            case: a.case_tag(),
            a,
            b,
            forcing: ContinuumForcing::Zero,
            u0,
            u1,
            horizon,
            ode_tol: 1e-10,
            s: None,
        }
    }

    /// Largest `|m_j|` present in the data or the forcing.
    pub fn cutoff(&self) -> i64 {
        let f = match &self.forcing {
            ContinuumForcing::Zero => 0,
            ContinuumForcing::Separable { shape, .. } => shape.max_mode(),
        };
        self.u0.max_mode().max(self.u1.max_mode()).max(f)
    }

    pub fn validate(&self) -> Result<()> {
        let mut series = vec![&self.u0, &self.u1];
        if let ContinuumForcing::Separable { shape, .. } = &self.forcing {
            series.push(shape);
        }
        for s in series {
            if s.dim() != self.dim || s.period() != self.period {
                return Err(Error::InvalidParameter(
                    "data and forcing must share the dimension and period".into(),
                ));
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {}", self.horizon)));
        }
        self.b.require_nonnegative("b")?;
        if self.a.case_tag() != self.case {
            return Err(Error::WrongCase {
                case: self.case.name(),
                reason: format!("coefficient a is tagged {}", self.a.case_tag()),
            });
        }
        self.a.validate_case()
    }

    /// Points per axis for lattice spacing `hbar`; `L / hbar` must be an even integer.
    pub fn points_for(&self, hbar: f64) -> Result<usize> {
        let ratio = self.period / hbar;
        let n = ratio.round();
        if !(hbar > 0.0) || (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 2.0 || n % 2.0 != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "N=L/hbar not an even integer (L = {}, hbar = {hbar})",
                self.period
            )));
        }
        Ok(n as usize)
    }

    /// The lattice problem on spacing `hbar` with the data sampled at the lattice points.
    pub fn lattice_spec(&self, hbar: f64) -> Result<CauchySpec> {
        let grid = LatticeGrid::new(self.dim, self.points_for(hbar)?, hbar)?;
        let forcing = match &self.forcing {
            ContinuumForcing::Zero => Forcing::Zero,
            ContinuumForcing::Separable { g, shape } => Forcing::Separable {
                g: g.clone(),
                shape: shape.sample(&grid)?,
            },
        };
        Ok(CauchySpec {
            grid,
            a: self.a.clone(),
            b: self.b.clone(),
            forcing,
            u0: self.u0.sample(&grid)?,
            u1: self.u1.sample(&grid)?,
            horizon: self.horizon,
            case: self.case,
            ode_tol: self.ode_tol,
            s: self.s,
        })
    }

    fn mode_set(&self) -> Vec<[i64; MAX_DIM]> {
        let mut modes: Vec<[i64; MAX_DIM]> = self.u0.terms().iter().map(|(m, _)| *m).collect();
        modes.extend(self.u1.terms().iter().map(|(m, _)| *m));
        if let ContinuumForcing::Separable { shape, .. } = &self.forcing {
            modes.extend(shape.terms().iter().map(|(m, _)| *m));
        }
        modes.sort();
        modes.dedup();
        modes
    }
}

/// Per-mode continuum trajectories; only modes present in the data or forcing evolve.
#[derive(Debug, Clone)]
pub struct ContinuumSolution {
    pub dim: usize,
    pub period: f64,
    pub modes: Vec<[i64; MAX_DIM]>,
    pub trajectories: Vec<ModeTrajectory>,
}

impl ContinuumSolution {
    /// `(v(T), v_t(T))` as band-limited series.
    pub fn final_state(&self) -> Result<(BandLimited, BandLimited)> {
        let (v, dv): (Vec<_>, Vec<_>) = self
            .modes
            .iter()
            .zip(&self.trajectories)
            .map(|(m, tr)| {
                let (v, dv) = tr.last();
                ((*m, v), (*m, dv))
            })
            .unzip();
        Ok((
            BandLimited::new(self.dim, self.period, v)?,
            BandLimited::new(self.dim, self.period, dv)?,
        ))
    }
}

fn solve_torus_modes(
    spec: &ContinuumSpec,
    symbol: impl Fn(&[i64; MAX_DIM]) -> f64 + Sync,
) -> Result<Vec<ModeTrajectory>> {
    let modes = spec.mode_set();
    let shape = match &spec.forcing {
        ContinuumForcing::Zero => None,
        ContinuumForcing::Separable { g, shape } => Some((g, shape)),
    };
    modes
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let fc = shape.map_or(ZERO, |(_, s)| s.coefficient(m));
            let g = shape.map(|(g, _)| g.clone());
            let gm = move |t: f64| fc * g.as_ref().map_or(0.0, |g| g.eval(t));
            let mut p = ModeProblem::homogeneous(
                symbol(m),
                &spec.a,
                &spec.b,
                spec.u0.coefficient(m),
                spec.u1.coefficient(m),
                spec.horizon,
            );
            if fc != ZERO {
                p = p.with_forcing(&gm);
            }
            integrate_mode(&p, spec.ode_tol).map_err(|e| Error::Mode {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Solves `v_tt - a(t) Laplacian v + b(t) v = f` on the period-`L` torus, one
/// oscillator per Fourier mode with `beta^2 = 4 pi^2 |m / L|^2`.
pub fn continuum_solve(spec: &ContinuumSpec) -> Result<ContinuumSolution> {
    spec.validate()?;
    let period = spec.period;
    let dim = spec.dim;
    let trajectories = solve_torus_modes(spec, |m| continuum_symbol(&m[..dim], period))?;
    Ok(ContinuumSolution {
        dim,
        period,
        modes: spec.mode_set(),
        trajectories,
    })
}

/// Measure on `hbar Z^n` used for the error and defect norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatticeNorm {
    /// Unweighted sum over lattice points.
    Counting,
    /// Sum weighted by the cell volume `hbar^n`, a Riemann sum for the `L^2` norm.
    #[default]
    Weighted,
}

impl LatticeNorm {
    fn factor(self, grid: &LatticeGrid) -> f64 {
        match self {
            LatticeNorm::Counting => 1.0,
            LatticeNorm::Weighted => grid.hbar().powi(grid.dim() as i32).sqrt(),
        }
    }

    pub fn norm(self, field: &GridField) -> f64 {
        self.factor(field.grid()) * field.norm_sqr().sqrt()
    }
}

/// `||(I - hbar^{-2} L_hbar)(hbar^{-2} L_hbar - Laplacian) v||` for grid values of a
/// function with period `N hbar`, applied mode by mode.
pub fn taylor_defect(v: &GridField, norm: LatticeNorm) -> Result<f64> {
    let grid = *v.grid();
    let spec = forward_dft(v);
    let nyquist = grid.points() as i64 / 2;
    let mass = spec.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut sum = 0.0;
    for (k, (c, beta2)) in spec.coeffs().iter().zip(grid.beta_squared_table()).enumerate() {
        let m = grid.signed_mode(k);
        if let Some(&top) = m[..grid.dim()].iter().find(|x| x.abs() == nyquist) {
            if c.norm() > 1e-12 * mass {
                return Err(Error::Aliased {
                    mode: top,
                    points: grid.points(),
                });
            }
            continue;
        }
        let factor = (1.0 + beta2) * (beta2 - continuum_symbol(&m[..grid.dim()], grid.period()));
        sum += (factor * c).norm_sqr();
    }
    Ok(norm.factor(&grid) * (sum / grid.len() as f64).sqrt())
}

/// [`taylor_defect`] of a band-limited function sampled on `grid`.
pub fn taylor_defect_series(v: &BandLimited, grid: &LatticeGrid, norm: LatticeNorm) -> Result<f64> {
    taylor_defect(&v.sample(grid)?, norm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralDifference {
    /// `|phi(xi + h) - 2 phi(xi) + phi(xi - h) - h^2 phi''(xi)|`.
    pub residual: f64,
    /// `(2 / 4!) h^4 sup |phi''''|`.
    pub bound: f64,
}

impl CentralDifference {
    pub fn holds(&self) -> bool {
        self.residual <= self.bound * (1.0 + 1e-12) + 1e-15
    }
}

/// Second central difference against its Taylor expansion with Lagrange remainder.
pub fn central_difference_identity_check(
    phi: impl Fn(f64) -> f64,
    phi2: impl Fn(f64) -> f64,
    phi4_sup: f64,
    xi: f64,
    step: f64,
) -> CentralDifference {
    let d2 = phi(xi + step) - 2.0 * phi(xi) + phi(xi - step);
    CentralDifference {
        residual: (d2 - step * step * phi2(xi)).abs(),
        bound: 2.0 / 24.0 * step.powi(4) * phi4_sup,
    }
}

/// Sobolev index required of the data for the convergence statement in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevThreshold {
    pub dim: usize,
    pub index: f64,
    /// The requirement is `s > index` rather than `s >= index`.
    pub strict: bool,
}

impl fmt::Display for SobolevThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.strict { ">" } else { ">=" };
        write!(f, "n={}: s {op} {}", self.dim, self.index)
    }
}

pub fn sobolev_threshold_note(n: usize) -> SobolevThreshold {
    if n <= 3 {
        SobolevThreshold {
            dim: n,
            index: 5.0,
            strict: false,
        }
    } else {
        SobolevThreshold {
            dim: n,
            index: 3.0 + n as f64 / 2.0,
            strict: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StudyOptions {
    /// Replace the lattice `beta^2` by the continuum symbol in the lattice solve.
    pub use_continuum_symbol: bool,
}

/// Least-squares line through `(x_i, y_i)`: `(slope, rms residual)`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

/// Order of `errors` against `hbars`: infinite when every error vanishes.
fn fit_order(hbars: &[f64], errors: &[f64]) -> (f64, f64) {
    if errors.iter().all(|e| *e == 0.0) {
        return (f64::INFINITY, 0.0);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = hbars
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .unzip();
    if x.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    least_squares_slope(&x, &y)
}

#[derive(Debug, Clone)]
pub struct ConvergenceResult {
    pub hbars: Vec<f64>,
    /// `hbar^{n/2} ||u_hbar(T) - v(T)||` per `hbar`.
    pub errors: Vec<f64>,
    pub derrors: Vec<f64>,
    /// Same differences in the unweighted lattice norm.
    pub counting_errors: Vec<f64>,
    pub counting_derrors: Vec<f64>,
    /// Fit of the unweighted errors, about `n/2` below the weighted one.
    pub counting_fitted_order: f64,
    pub counting_fit_residual: f64,
    pub order_u: f64,
    pub order_du: f64,
    /// Smaller of the two fitted orders.
    pub fitted_order: f64,
    /// Larger of the two RMS fit residuals in `ln e`.
    pub fit_residual: f64,
    pub monotone: bool,
    pub diagnostics: Vec<String>,
    pub sobolev: SobolevThreshold,
}

impl ConvergenceResult {
    pub fn passes(&self, min_order: f64) -> bool {
        self.monotone && self.fitted_order >= min_order
    }
}

fn monotone_decreasing(values: &[f64]) -> Option<usize> {
    values
        .windows(2)
        .position(|w| !(w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0)))
}

struct LevelErrors {
    weighted: (f64, f64),
    counting: (f64, f64),
}

fn level_errors(cspec: &ContinuumSpec, hbar: f64, reference: &(BandLimited, BandLimited), options: StudyOptions) -> Result<LevelErrors> {
    let lattice = cspec.lattice_spec(hbar)?;
    let grid = lattice.grid;
    let (u, du) = if options.use_continuum_symbol {
        let dim = cspec.dim;
        let period = cspec.period;
        let trajectories = solve_torus_modes(cspec, |m| continuum_symbol(&m[..dim], period))?;
        let scale = grid.len() as f64;
        let mut cu = vec![ZERO; grid.len()];
        let mut cdu = vec![ZERO; grid.len()];
        for (m, tr) in cspec.mode_set().iter().zip(&trajectories) {
            let (v, dv) = tr.last();
            let k = grid.index_of_mode(&m[..dim]);
            cu[k] += v * scale;
            cdu[k] += dv * scale;
        }
        (
            inverse_dft(&SpectralField::new(grid, cu)?),
            inverse_dft(&SpectralField::new(grid, cdu)?),
        )
    } else {
        let sol = solve_cauchy(&lattice)?;
        (sol.final_u().clone(), sol.final_du().clone())
    };
    let v = reference.0.sample_direct(&grid)?;
    let dv = reference.1.sample_direct(&grid)?;
    let diff = |x: &GridField, y: &GridField| {
        GridField::new(grid, x.values().iter().zip(y.values()).map(|(p, q)| p - q).collect())
    };
    let eu = diff(&u, &v)?;
    let edu = diff(&du, &dv)?;
    Ok(LevelErrors {
        weighted: (LatticeNorm::Weighted.norm(&eu), LatticeNorm::Weighted.norm(&edu)),
        counting: (LatticeNorm::Counting.norm(&eu), LatticeNorm::Counting.norm(&edu)),
    })
}

/// Lattice solutions at each `hbar` against the torus solution at time `T`.
pub fn convergence_study(cspec: &ContinuumSpec, hbars: &[f64], options: StudyOptions) -> Result<ConvergenceResult> {
    cspec.validate()?;
    if hbars.len() < 2 {
        return Err(Error::InvalidParameter("at least two values of hbar are required".into()));
    }
    if hbars.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("hbar values must be strictly decreasing".into()));
    }
    for &h in hbars {
        cspec.points_for(h)?;
    }
    let cutoff = cspec.cutoff();
    if cutoff as f64 * hbars[0] > cspec.period / 4.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "data modes up to {cutoff} exceed L/(4 hbar) at hbar = {}",
            hbars[0]
        )));
    }
    let reference = continuum_solve(cspec)?.final_state()?;
    let levels: Vec<LevelErrors> = hbars
        .par_iter()
        .map(|&h| level_errors(cspec, h, &reference, options))
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = levels.iter().map(|l| l.weighted.0).collect();
    let derrors: Vec<f64> = levels.iter().map(|l| l.weighted.1).collect();
    let (order_u, res_u) = fit_order(hbars, &errors);
    let (order_du, res_du) = fit_order(hbars, &derrors);
    let counting_errors: Vec<f64> = levels.iter().map(|l| l.counting.0).collect();
    let counting_derrors: Vec<f64> = levels.iter().map(|l| l.counting.1).collect();
    let (cu, cres_u) = fit_order(hbars, &counting_errors);
    let (cdu, cres_du) = fit_order(hbars, &counting_derrors);
    let mut diagnostics = Vec::new();
    for (name, e) in [("err", &errors), ("derr", &derrors)] {
        if let Some(i) = monotone_decreasing(e) {
            diagnostics.push(format!(
                "{name} increases from {:e} at hbar={} to {:e} at hbar={}",
                e[i],
                hbars[i],
                e[i + 1],
                hbars[i + 1]
            ));
        }
    }
    Ok(ConvergenceResult {
        hbars: hbars.to_vec(),
        counting_errors,
        counting_derrors,
        counting_fitted_order: cu.min(cdu),
        counting_fit_residual: cres_u.max(cres_du),
        errors,
        derrors,
        order_u,
        order_du,
        fitted_order: order_u.min(order_du),
        fit_residual: res_u.max(res_du),
        monotone: diagnostics.is_empty(),
        diagnostics,
        sobolev: sobolev_threshold_note(cspec.dim),
    })
}

/// `hbar = 2^{-k}` for `k` in `from..=to`.
pub fn dyadic_hbars(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}
