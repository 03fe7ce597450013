//! Full lattice Cauchy problem `u_tt - hbar^{-2} a(t) L_hbar u + b(t) u = f`
//! solved mode by mode: DFT of the data, one oscillator per grid frequency,
//! inverse DFT at shared sample times.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::{CaseTag, CoefficientProfile};
use crate::energy_verifier::{
    certify_with_retry, corollary_constant, corollary_ratio, gronwall_audit, quasi_sandwich_holds,
    quasi_symmetriser_energy, symmetriser_energy, symmetriser_sandwich_holds, transform_energy,
    CertificateContext, EnergyCertificate, AUDIT_SLACK,
};
use crate::error::{Error, Result};
use crate::lattice_fourier::{
    apply_lattice_laplacian, forward_dft, inverse_dft, GridField, LatticeGrid, SpectralField,
};
use crate::mode_ode::{check_sampling, integrate_mode_sampled, sample_count, uniform_times, ModeProblem, ModeTrajectory};
use crate::rk::{integrate, StepControl};

pub type FieldForcing = Arc<dyn Fn(f64) -> GridField + Send + Sync>;

#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    Zero,
    /// `f(t, k) = g(t) F(k)`.
    Separable { g: CoefficientProfile, shape: GridField },
    General(FieldForcing),
}

impl Forcing {
    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }

    pub fn at(&self, grid: &LatticeGrid, t: f64) -> GridField {
        match self {
            Forcing::Zero => GridField::zeros(*grid),
            Forcing::Separable { g, shape } => {
                let s = g.eval(t);
                GridField::new(*grid, shape.values().iter().map(|z| z * s).collect())
                    .unwrap_or_else(|_| GridField::zeros(*grid))
            }
            Forcing::General(f) => f(t),
        }
    }
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::Zero => f.write_str("Zero"),
            Forcing::Separable { g, .. } => write!(f, "Separable({})", g.kind().name()),
            Forcing::General(_) => f.write_str("General(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CauchySpec {
    pub grid: LatticeGrid,
    pub a: CoefficientProfile,
    pub b: CoefficientProfile,
    pub forcing: Forcing,
    pub u0: GridField,
    pub u1: GridField,
    pub horizon: f64,
    pub case: CaseTag,
    pub ode_tol: f64,
    /// Gevrey index for the Hölder regimes; the largest admissible value when absent.
    pub s: Option<f64>,
}

impl CauchySpec {
    /// Zero forcing, tolerance `1e-10`, case taken from `a`.
    pub fn new(
        grid: LatticeGrid,
        a: CoefficientProfile,
        b: CoefficientProfile,
        u0: GridField,
        u1: GridField,
        horizon: f64,
    ) -> Self {
        let case = a.case_tag();
        Self {
            grid,
            a,
            b,
            forcing: Forcing::Zero,
            u0,
            u1,
            horizon,
            case,
            ode_tol: 1e-10,
            s: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if *self.u0.grid() != self.grid || *self.u1.grid() != self.grid {
            return Err(Error::InvalidField("initial data live on a different grid".into()));
        }
        if let Forcing::Separable { shape, .. } = &self.forcing {
            if *shape.grid() != self.grid {
                return Err(Error::InvalidField("forcing shape lives on a different grid".into()));
            }
        }
        for (name, p) in [("a", &self.a), ("b", &self.b)] {
            if p.horizon() != self.horizon {
                return Err(Error::InvalidParameter(format!(
                    "{name} is defined on [0, {}] but the horizon is {}",
                    p.horizon(),
                    self.horizon
                )));
            }
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

    /// Certificate context for this problem's regime.
    pub fn certificate_context(&self) -> Result<CertificateContext> {
        CertificateContext::new(self.case, &self.a, &self.b, self.horizon, self.s)
    }
}

#[derive(Debug, Clone)]
pub struct WaveSolution {
    pub grid: LatticeGrid,
    pub sample_times: Vec<f64>,
    pub u: Vec<GridField>,
    pub du: Vec<GridField>,
    pub modes: Vec<ModeTrajectory>,
    pub beta2: Vec<f64>,
    pub u0_hat: Vec<Complex64>,
    pub u1_hat: Vec<Complex64>,
    pub certificates: Option<Vec<EnergyCertificate>>,
}

impl WaveSolution {
    /// `||u(t_i)||^2` from the mode values (Plancherel).
    pub fn l2_u(&self, i: usize) -> f64 {
        self.modes.iter().map(|m| m.v[i].norm_sqr()).sum::<f64>() / self.grid.len() as f64
    }

    pub fn l2_du(&self, i: usize) -> f64 {
        self.modes.iter().map(|m| m.dv[i].norm_sqr()).sum::<f64>() / self.grid.len() as f64
    }

    pub fn final_u(&self) -> &GridField {
        &self.u[self.u.len() - 1]
    }

    pub fn final_du(&self) -> &GridField {
        &self.du[self.du.len() - 1]
    }
}

fn mode_forcing_coefficients(spec: &CauchySpec) -> Option<Vec<Complex64>> {
    match &spec.forcing {
        Forcing::Separable { shape, .. } => Some(forward_dft(shape).into_coeffs()),
        _ => None,
    }
}

/// Number of sample intervals shared by every mode.
pub fn shared_sample_count(spec: &CauchySpec) -> usize {
    sample_count(spec.horizon, shared_frequency(spec))
}

fn shared_frequency(spec: &CauchySpec) -> f64 {
    let beta2_max = spec.grid.beta_squared_table().into_iter().fold(0.0, f64::max);
    (beta2_max * spec.a.a1().max(0.0) + spec.b.a1().max(0.0)).sqrt()
}

/// Per-mode trajectories on `intervals` shared uniform intervals.
pub fn solve_modes(spec: &CauchySpec, intervals: usize, with_forcing: bool) -> Result<Vec<ModeTrajectory>> {
    let grid = spec.grid;
    let u0_hat = forward_dft(&spec.u0).into_coeffs();
    let u1_hat = forward_dft(&spec.u1).into_coeffs();
    let beta2 = grid.beta_squared_table();
    let f_hat = if with_forcing { mode_forcing_coefficients(spec) } else { None };
    let general = match (&spec.forcing, with_forcing) {
        (Forcing::General(f), true) => Some(f.clone()),
        _ => None,
    };
    (0..grid.len())
        .into_par_iter()
        .with_min_len(8)
        .map(|m| {
            let separable = f_hat.as_ref().map(|fh| fh[m]).filter(|c| *c != Complex64::new(0.0, 0.0));
            let g_sep = separable.map(|c| {
                let g = match &spec.forcing {
                    Forcing::Separable { g, .. } => g.clone(),
                    _ => unreachable!(),
                };
                move |t: f64| c * g.eval(t)
            });
            let g_gen = general.as_ref().map(|f| {
                let f = f.clone();
                move |t: f64| forward_dft(&f(t)).coeffs()[m]
            });
            let mut p = ModeProblem::homogeneous(beta2[m], &spec.a, &spec.b, u0_hat[m], u1_hat[m], spec.horizon);
            if let Some(g) = g_sep.as_ref() {
                p = p.with_forcing(g);
            } else if let Some(g) = g_gen.as_ref() {
                p = p.with_forcing(g);
            }
            integrate_mode_sampled(&p, spec.ode_tol, intervals).map_err(|e| Error::Mode {
                index: m,
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn solve_cauchy(spec: &CauchySpec) -> Result<WaveSolution> {
    spec.validate()?;
    let grid = spec.grid;
    let intervals = shared_sample_count(spec);
    check_sampling(spec.horizon, shared_frequency(spec), intervals)?;
    let times = uniform_times(spec.horizon, intervals);
    let modes = solve_modes(spec, intervals, true)?;

    let mut u = Vec::with_capacity(times.len());
    let mut du = Vec::with_capacity(times.len());
    u.push(spec.u0.clone());
    du.push(spec.u1.clone());
    for i in 1..times.len() {
        let v: Vec<Complex64> = modes.iter().map(|m| m.v[i]).collect();
        let dv: Vec<Complex64> = modes.iter().map(|m| m.dv[i]).collect();
        u.push(inverse_dft(&SpectralField::new(grid, v)?));
        du.push(inverse_dft(&SpectralField::new(grid, dv)?));
    }
    Ok(WaveSolution {
        grid,
        sample_times: times,
        u,
        du,
        modes,
        beta2: grid.beta_squared_table(),
        u0_hat: forward_dft(&spec.u0).into_coeffs(),
        u1_hat: forward_dft(&spec.u1).into_coeffs(),
        certificates: None,
    })
}

/// Result of a trajectory audit tied to the regime's energy argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditResult {
    pub name: &'static str,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ModeReport {
    pub index: usize,
    pub beta2: f64,
    pub certificate: EnergyCertificate,
    pub audit: Option<AuditResult>,
    /// Inhomogeneous-estimate ratio, for forced problems.
    pub corollary_ratio: Option<f64>,
}

impl ModeReport {
    pub fn pass(&self) -> bool {
        self.certificate.passes() && self.audit.is_none_or(|a| a.pass) && self.corollary_ratio.is_none_or(|r| r <= 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    /// Multiplier on the exponent constant `K`; values below 1 sabotage the certificate.
    pub k_scale: f64,
    pub audits: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            k_scale: 1.0,
            audits: true,
        }
    }
}

/// Audits one mode trajectory with the regime's own energy.
pub fn audit_mode(ctx: &CertificateContext, a: &CoefficientProfile, cert: &EnergyCertificate, traj: &ModeTrajectory) -> Result<AuditResult> {
    match ctx.case() {
        CaseTag::Lip => {
            let kappa = cert.kappa.expect("Lipschitz certificates carry kappa");
            let g = gronwall_audit(a, traj, kappa);
            let sandwich = symmetriser_sandwich_holds(a, traj, &symmetriser_energy(a, traj));
            Ok(AuditResult {
                name: "gronwall",
                value: g.max_ratio,
                pass: g.pass && sandwich,
            })
        }
        CaseTag::HolderStrict | CaseTag::HolderWeak => {
            let eigs = ctx.eigenvalues(cert.beta2)?.expect("Hölder regimes regularize");
            let s = ctx.s().expect("Hölder regimes carry s");
            let w = transform_energy(traj, &eigs, cert.k, s, cert.beta2)?;
            Ok(AuditResult {
                name: "monotone_w",
                value: w.max_increment,
                pass: w.is_monotone(AUDIT_SLACK),
            })
        }
        CaseTag::SmoothWeak => {
            let eps = cert.eps_used.expect("smooth degenerate regime regularizes");
            let e = quasi_symmetriser_energy(a, traj, eps);
            let ok = quasi_sandwich_holds(a, traj, eps, &e);
            Ok(AuditResult {
                name: "quasi_sandwich",
                value: if ok { 0.0 } else { 1.0 },
                pass: ok,
            })
        }
    }
}

/// Per-mode certificates and audits. Certificates apply to the homogeneous
/// evolution; forced problems are also checked against the inhomogeneous estimate.
pub fn verify_solution(spec: &CauchySpec, sol: &WaveSolution, settings: VerifySettings) -> Result<Vec<ModeReport>> {
    let ctx = spec.certificate_context()?.with_k_scale(settings.k_scale);
    let intervals = sol.sample_times.len() - 1;
    let homogeneous = if spec.forcing.is_zero() {
        None
    } else {
        Some(solve_modes(spec, intervals, false)?)
    };
    let g_l2 = forcing_mode_l2_sqr(spec, &sol.sample_times)?;
    let constant = corollary_constant(spec.a.sup_abs(), spec.b.sup_abs(), spec.horizon);
    (0..sol.modes.len())
        .into_par_iter()
        .with_min_len(4)
        .map(|m| {
            let hom = homogeneous.as_ref().map_or(&sol.modes[m], |h| &h[m]);
            let cert = ctx.certificate(sol.beta2[m]);
            let cert = certify_with_retry(cert, hom, sol.u0_hat[m], sol.u1_hat[m]);
            let audit = if settings.audits {
                Some(audit_mode(&ctx, &spec.a, &cert, hom).map_err(|e| Error::Mode {
                    index: m,
                    source: Box::new(e),
                })?)
            } else {
                None
            };
            let corollary = homogeneous.as_ref().map(|_| {
                corollary_ratio(&sol.modes[m], hom, sol.beta2[m], constant, spec.horizon, g_l2[m])
            });
            Ok(ModeReport {
                index: m,
                beta2: sol.beta2[m],
                certificate: cert,
                audit,
                corollary_ratio: corollary,
            })
        })
        .collect()
}

/// Composite Simpson weights for `n` (even) uniform intervals of width `h`,
/// falling back to the trapezoid rule for odd `n`.
fn quadrature_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n % 2 == 0 {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = h / 3.0
                * if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
        }
    } else {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = if i == 0 || i == n { 0.5 * h } else { h };
        }
    }
    w
}

/// `int_0^T |f_hat(t, theta_m)|^2 dt` for every mode.
fn forcing_mode_l2_sqr(spec: &CauchySpec, times: &[f64]) -> Result<Vec<f64>> {
    let len = spec.grid.len();
    match &spec.forcing {
        Forcing::Zero => Ok(vec![0.0; len]),
        Forcing::Separable { g, shape } => {
            let n = 4096;
            let h = spec.horizon / n as f64;
            let w = quadrature_weights(n, h);
            let g2: f64 = (0..=n).map(|i| w[i] * g.eval(i as f64 * h).powi(2)).sum();
            Ok(forward_dft(shape).coeffs().iter().map(|c| c.norm_sqr() * g2).collect())
        }
        Forcing::General(f) => {
            let n = times.len() - 1;
            let w = quadrature_weights(n, spec.horizon / n as f64);
            let mut acc = vec![0.0; len];
            for (t, wi) in times.iter().zip(&w) {
                for (a, c) in acc.iter_mut().zip(forward_dft(&f(*t)).coeffs()) {
                    *a += wi * c.norm_sqr();
                }
            }
            Ok(acc)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub t: f64,
    pub l2_u: f64,
    pub l2_du: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct WellposednessReport {
    pub rows: Vec<AggregateRow>,
    /// `||u0||^2 + ||u1||^2 + ||f||^2_{L^2 l^2}`.
    pub rhs: f64,
    /// `max_t (||u||^2 + ||u_t||^2) / rhs`.
    pub realized_constant: f64,
    /// `||I - hbar^{-2} L_hbar|| = 1 + 4n / hbar^2`.
    pub operator_norm: f64,
    /// Natural log of the summed certificate bound.
    pub log_bound: f64,
    pub max_certificate_ratio: f64,
    pub all_certificates_pass: bool,
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.filter(|x| *x > f64::NEG_INFINITY).collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top == f64::INFINITY {
        return top;
    }
    top + terms.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

pub fn wellposedness_report(spec: &CauchySpec, sol: &WaveSolution, reports: Option<&[ModeReport]>) -> Result<WellposednessReport> {
    let len = spec.grid.len() as f64;
    let g_l2 = forcing_mode_l2_sqr(spec, &sol.sample_times)?;
    let f_norm: f64 = g_l2.iter().sum::<f64>() / len;
    let rhs = spec.u0.norm_sqr() + spec.u1.norm_sqr() + f_norm;
    let h = spec.grid.hbar();
    let operator_norm = 1.0 + 4.0 * spec.grid.dim() as f64 / (h * h);

    let (log_bound, max_ratio, all_pass) = match reports {
        Some(reports) => {
            let forced = !spec.forcing.is_zero();
            let constant = corollary_constant(spec.a.sup_abs(), spec.b.sup_abs(), spec.horizon);
            let lb = log_sum_exp(reports.iter().map(|r| {
                let m = r.index;
                let data = sol.u0_hat[m].norm_sqr() + sol.u1_hat[m].norm_sqr();
                let hom = if data == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    r.certificate.log_bound_factor() + data.ln()
                };
                if forced {
                    let extra = 2.0 * constant * constant * spec.horizon * (1.0 + r.beta2).powi(2) * g_l2[m];
                    log_sum_exp([2f64.ln() + hom, extra.ln()].into_iter())
                } else {
                    hom
                }
            })) - len.ln();
            let max_ratio = reports
                .iter()
                .filter_map(|r| r.certificate.realized_ratio)
                .fold(0.0, f64::max);
            (lb, max_ratio, reports.iter().all(ModeReport::pass))
        }
        None => (f64::NAN, f64::NAN, false),
    };

    let mut realized: f64 = 0.0;
    let rows = (0..sol.sample_times.len())
        .map(|i| {
            let l2_u = sol.l2_u(i);
            let l2_du = sol.l2_du(i);
            let lhs = l2_u + l2_du;
            if rhs > 0.0 {
                realized = realized.max(lhs / rhs);
            }
            let ratio = if lhs == 0.0 {
                0.0
            } else {
                (lhs.ln() - log_bound).exp()
            };
            AggregateRow {
                t: sol.sample_times[i],
                l2_u,
                l2_du,
                bound: log_bound.exp(),
                ratio,
            }
        })
        .collect();
    Ok(WellposednessReport {
        rows,
        rhs,
        realized_constant: realized,
        operator_norm,
        log_bound,
        max_certificate_ratio: max_ratio,
        all_certificates_pass: all_pass,
    })
}

/// Direct integration of the stencil system `(u, u_t)` in lattice space, without any transform.
pub fn method_of_lines(spec: &CauchySpec, times: &[f64]) -> Result<Vec<GridField>> {
    spec.validate()?;
    let grid = spec.grid;
    let len = grid.len();
    let h2 = grid.hbar() * grid.hbar();
    let beta2_max = 4.0 * grid.dim() as f64 / h2;
    let omega = (beta2_max * spec.a.a1().max(0.0) + spec.b.a1().max(0.0)).sqrt();
    let mut y0 = spec.u0.values().to_vec();
    y0.extend_from_slice(spec.u1.values());
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let u = GridField::new(grid, y[..len].to_vec()).expect("finite state");
        let lap = apply_lattice_laplacian(&u);
        let at = spec.a.eval(t) / h2;
        let bt = spec.b.eval(t);
        let f = if spec.forcing.is_zero() {
            None
        } else {
            Some(spec.forcing.at(&grid, t))
        };
        dy[..len].copy_from_slice(&y[len..]);
        for k in 0..len {
            let mut acc = at * lap.values()[k] - bt * y[k];
            if let Some(f) = &f {
                acc += f.values()[k];
            }
            dy[len + k] = acc;
        }
    };
    let control = StepControl {
        tol: spec.ode_tol,
        h_max: 0.2 / (1.0 + omega),
    };
    let (states, _) = integrate(rhs, &y0, times, control)?;
    states
        .into_iter()
        .map(|s| GridField::new(grid, s[..len].to_vec()))
        .collect()
}
