//! Energy estimates for the mode oscillator in the four coefficient regimes:
//! explicit certificate constants, the energies used to derive them, and
//! audits of computed trajectories against both.
//!
//! Bounds have the form `|v|^2 + |v'|^2 <= C exp(K tau <beta>^p) (|v0|^2 + |v1|^2)`
//! with `<beta> = sqrt(1 + beta^2)`, and `tau = T` except in the smooth
//! degenerate regime where the horizon is already folded into `K`.
//! Everything is evaluated in log space because `K tau <beta>^p` easily
//! exceeds the exponent range of `f64`.

use num_complex::Complex64;

use crate::coefficients::{regularized_eigenvalues, CaseTag, CoefficientProfile, RegularizedEigenvalues};
use crate::error::{Error, Result};
use crate::mode_ode::ModeTrajectory;

/// Absolute constant standing in for the unspecified factor in the Hölder regimes.
pub const DEFAULT_C_PRIME: f64 = 16.0;

/// Factor applied to `C` when a Hölder-regime certificate is retried.
pub const C_PRIME_RETRY: f64 = 4.0;

/// Relative slack for the Gronwall and monotonicity audits.
pub const AUDIT_SLACK: f64 = 1e-6;

pub fn bracket(beta2: f64) -> f64 {
    (1.0 + beta2).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyCertificate {
    pub case: CaseTag,
    pub beta2: f64,
    pub c: f64,
    pub k: f64,
    /// Power of `<beta>` in the exponent.
    pub exponent: f64,
    /// Multiplier of `K <beta>^p` in the exponent: `T`, or 1 for the smooth degenerate regime.
    pub time_scale: f64,
    pub kappa: Option<f64>,
    pub eps_used: Option<f64>,
    /// Gevrey index, where the regime has one.
    pub s: Option<f64>,
    pub certified: bool,
    pub c_prime_inflation: f64,
    pub realized_ratio: Option<f64>,
}

impl EnergyCertificate {
    /// `ln(C) + K tau <beta>^p`.
    pub fn log_bound_factor(&self) -> f64 {
        self.c.ln() + self.k * self.time_scale * bracket(self.beta2).powf(self.exponent)
    }

    /// `C exp(K tau <beta>^p)`; may be `inf`.
    pub fn bound_factor(&self) -> f64 {
        self.log_bound_factor().exp()
    }

    pub fn inflate(&mut self, factor: f64) {
        self.c *= factor;
        self.c_prime_inflation *= factor;
    }

    pub fn passes(&self) -> bool {
        self.realized_ratio.is_some_and(|r| r <= 1.0)
    }
}

/// Norms and empirical constants of `(a, b)` shared by every mode of one run.
#[derive(Debug, Clone)]
pub struct CertificateContext {
    case: CaseTag,
    horizon: f64,
    a: CoefficientProfile,
    b_sup: f64,
    s: Option<f64>,
    // regime-specific ingredients
    lipschitz: f64,
    holder: f64,
    holder_certified: bool,
    cl_norm: f64,
    smoothness: u32,
    c_t: f64,
    c_prime: f64,
    k_scale: f64,
}

impl CertificateContext {
    pub fn new(case: CaseTag, a: &CoefficientProfile, b: &CoefficientProfile, horizon: f64, s: Option<f64>) -> Result<Self> {
        if a.case_tag() != case {
            return Err(Error::WrongCase {
                case: case.name(),
                reason: format!("coefficient is tagged {}", a.case_tag()),
            });
        }
        a.validate_case()?;
        b.require_nonnegative("b")?;
        let mut ctx = Self {
            case,
            horizon,
            a: a.clone(),
            b_sup: b.sup_abs(),
            s: None,
            lipschitz: 0.0,
            holder: 0.0,
            holder_certified: true,
            cl_norm: 0.0,
            smoothness: 0,
            c_t: 0.0,
            c_prime: DEFAULT_C_PRIME,
            k_scale: 1.0,
        };
        match case {
            CaseTag::Lip => {
                ctx.lipschitz = a.lipschitz().ok_or_else(|| Error::WrongCase {
                    case: case.name(),
                    reason: "no analytic derivative bound".into(),
                })?;
            }
            CaseTag::HolderStrict => {
                let alpha = a.alpha().expect("validated");
                let s = s.unwrap_or(0.5);
                if !(s > 0.0 && s <= 0.5) {
                    return Err(Error::InvalidParameter(format!("s must lie in (0, 1/2], got {s}")));
                }
                ctx.s = Some(s);
                let semi = a.seminorm(alpha)?;
                ctx.holder = semi.value;
                ctx.holder_certified = semi.certified;
            }
            CaseTag::SmoothWeak => {
                let l = a.smoothness().unwrap_or(2);
                ctx.smoothness = l;
                ctx.cl_norm = a.cl_norm(l).ok_or_else(|| Error::WrongCase {
                    case: case.name(),
                    reason: format!("no C^{l} norm available"),
                })?;
                ctx.c_t = empirical_c_t(a, l, horizon, ctx.cl_norm)?;
                ctx.holder_certified = false;
            }
            CaseTag::HolderWeak => {
                let alpha = a.alpha().expect("validated");
                let s_max = (alpha + 2.0) / 4.0;
                let s = s.unwrap_or(s_max);
                if !(s > 0.0 && s <= s_max) {
                    return Err(Error::InvalidParameter(format!(
                        "s must lie in (0, {s_max}], got {s}"
                    )));
                }
                ctx.s = Some(s);
                // |sqrt x - sqrt y| <= sqrt|x - y| turns an alpha-seminorm of a into an alpha/2-seminorm of sqrt a
                let (value, certified) = if alpha <= 1.0 {
                    let semi = a.seminorm(alpha)?;
                    (semi.value.sqrt(), semi.certified)
                } else {
                    (sqrt_seminorm_estimate(a, alpha / 2.0)?, false)
                };
                ctx.holder = value;
                ctx.holder_certified = certified;
            }
        }
        Ok(ctx)
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn s(&self) -> Option<f64> {
        self.s
    }

    /// Hölder seminorm used by the certificate: of `a` (strict) or of `sqrt(a)` (weak).
    pub fn holder(&self) -> f64 {
        self.holder
    }

    pub fn c_t(&self) -> f64 {
        self.c_t
    }

    /// Scales every `K` produced afterwards; a debugging aid for negative tests.
    pub fn with_k_scale(mut self, k_scale: f64) -> Self {
        self.k_scale = k_scale;
        self
    }

    pub fn with_c_prime(mut self, c_prime: f64) -> Self {
        self.c_prime = c_prime;
        self
    }

    /// Regularization width chosen for the mode `beta^2`.
    pub fn epsilon(&self, beta2: f64) -> Option<f64> {
        let b = bracket(beta2);
        match self.case {
            CaseTag::Lip => None,
            CaseTag::HolderStrict => Some(b.powi(-2)),
            CaseTag::SmoothWeak => {
                let l = self.smoothness as f64;
                let sigma = 1.0 + l / 2.0;
                Some(b.powf(-l / sigma))
            }
            CaseTag::HolderWeak => {
                let half = self.a.alpha().expect("validated") / 2.0;
                Some(b.powf(-2.0 / (1.0 + half)))
            }
        }
    }

    pub fn certificate(&self, beta2: f64) -> EnergyCertificate {
        let br2 = 1.0 + beta2;
        let a0 = self.a.a0();
        let a1 = self.a.a1();
        let a_sup = self.a.sup_abs();
        let b_sup = self.b_sup;
        let t = self.horizon;
        let eps = self.epsilon(beta2);
        let (c, k, exponent, time_scale, kappa, certified) = match self.case {
            CaseTag::Lip => {
                let c0 = a0.min(1.0);
                let c1 = a1.max(1.0);
                let kappa = (self.lipschitz + br2 * a_sup + b_sup) / c0;
                let c = c1 / c0 * ((self.lipschitz + b_sup) * t / c0).exp();
                (c, a_sup / c0, 2.0, t, Some(kappa), true)
            }
            CaseTag::HolderStrict => {
                let l = self.holder;
                let sqrt_sup = a1.sqrt();
                let kappa = l / a0 + l * sqrt_sup / a0 + (b_sup + sqrt_sup * sqrt_sup) / a0.sqrt();
                let c = self.c_prime * a_sup / a0.sqrt();
                let s = self.s.expect("set");
                (c, kappa / 2.0, 1.0 / s, t, Some(kappa), self.holder_certified)
            }
            CaseTag::SmoothWeak => {
                let l = self.smoothness as f64;
                let sigma = 1.0 + l / 2.0;
                let c1 = a_sup + 1.0;
                let k = 1.0
                    + c1 * (self.c_t * self.cl_norm.powf(1.0 / l) + 1.0 / c1 + a_sup + b_sup + 1.0) * t;
                (c1 * c1, k, 6.0 - 4.0 / sigma, 1.0, None, false)
            }
            CaseTag::HolderWeak => {
                let n = self.holder;
                let kappa = n + (2.0 + n).powi(2) + b_sup;
                let c = self.c_prime * (2.0 + n).powi(2);
                let s = self.s.expect("set");
                (c, kappa / 2.0, 1.0 / s, t, Some(kappa), self.holder_certified)
            }
        };
        EnergyCertificate {
            case: self.case,
            beta2,
            c,
            k: k * self.k_scale,
            exponent,
            time_scale,
            kappa,
            eps_used: eps,
            s: self.s,
            certified,
            c_prime_inflation: 1.0,
            realized_ratio: None,
        }
    }

    /// Eigenvalue family used by the transformed energy (Hölder regimes only).
    pub fn eigenvalues(&self, beta2: f64) -> Result<Option<RegularizedEigenvalues>> {
        let eps = match self.epsilon(beta2) {
            Some(e) => e,
            None => return Ok(None),
        };
        match self.case {
            CaseTag::HolderStrict => regularized_eigenvalues(&self.a, eps, None).map(Some),
            CaseTag::HolderWeak => {
                let half = self.a.alpha().expect("validated") / 2.0;
                regularized_eigenvalues(&self.a, eps, Some(half)).map(Some)
            }
            _ => Ok(None),
        }
    }
}

fn sqrt_seminorm_estimate(a: &CoefficientProfile, gamma: f64) -> Result<f64> {
    let t_end = a.horizon();
    let k = 1usize << 14;
    let dt = t_end / k as f64;
    let values: Vec<f64> = (0..=k).map(|i| a.eval(i as f64 * dt).max(0.0).sqrt()).collect();
    let mut best: f64 = 0.0;
    let mut sep = 1;
    while sep <= k {
        let denom = (sep as f64 * dt).powf(gamma);
        for i in 0..=(k - sep) {
            best = best.max((values[i + sep] - values[i]).abs() / denom);
        }
        sep *= 2;
    }
    Ok(best)
}

/// `sup_eps int |a'| / (a + eps^2)^{1 - 1/l}` over `||a||_{C^l}^{1/l}`; the integral grows as
/// `eps` shrinks, so the supremum is approached at the smallest width.
fn empirical_c_t(a: &CoefficientProfile, l: u32, horizon: f64, cl_norm: f64) -> Result<f64> {
    if cl_norm == 0.0 {
        return Ok(0.0);
    }
    let integral = log_derivative_integral(a, 2f64.powi(-20), l, horizon)?;
    Ok(integral / cl_norm.powf(1.0 / l as f64))
}

pub fn case1_certificate(a: &CoefficientProfile, b: &CoefficientProfile, beta2: f64, horizon: f64) -> Result<EnergyCertificate> {
    Ok(CertificateContext::new(CaseTag::Lip, a, b, horizon, None)?.certificate(beta2))
}

pub fn case2_certificate(
    a: &CoefficientProfile,
    b: &CoefficientProfile,
    beta2: f64,
    horizon: f64,
    s: f64,
) -> Result<EnergyCertificate> {
    Ok(CertificateContext::new(CaseTag::HolderStrict, a, b, horizon, Some(s))?.certificate(beta2))
}

pub fn case3_certificate(a: &CoefficientProfile, b: &CoefficientProfile, beta2: f64, horizon: f64) -> Result<EnergyCertificate> {
    Ok(CertificateContext::new(CaseTag::SmoothWeak, a, b, horizon, None)?.certificate(beta2))
}

pub fn case4_certificate(
    a: &CoefficientProfile,
    b: &CoefficientProfile,
    beta2: f64,
    horizon: f64,
    s: f64,
) -> Result<EnergyCertificate> {
    Ok(CertificateContext::new(CaseTag::HolderWeak, a, b, horizon, Some(s))?.certificate(beta2))
}

/// Outcome of checking a trajectory against a certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certification {
    pub pass: bool,
    pub realized_ratio: f64,
}

/// `max_t (|v|^2 + |v'|^2) / bound`; zero data gives ratio 0.
pub fn certify_trajectory(cert: &EnergyCertificate, traj: &ModeTrajectory, v0: Complex64, v1: Complex64) -> Certification {
    let data = v0.norm_sqr() + v1.norm_sqr();
    let max_energy = traj.energy().into_iter().fold(0.0, f64::max);
    let ratio = if max_energy == 0.0 {
        0.0
    } else if data == 0.0 {
        f64::INFINITY
    } else {
        (max_energy.ln() - data.ln() - cert.log_bound_factor()).exp()
    };
    Certification {
        pass: ratio <= 1.0,
        realized_ratio: ratio,
    }
}

/// Certifies, retrying once with `C` inflated by [`C_PRIME_RETRY`] in the Hölder regimes.
pub fn certify_with_retry(mut cert: EnergyCertificate, traj: &ModeTrajectory, v0: Complex64, v1: Complex64) -> EnergyCertificate {
    let mut outcome = certify_trajectory(&cert, traj, v0, v1);
    if !outcome.pass && matches!(cert.case, CaseTag::HolderStrict | CaseTag::HolderWeak) {
        cert.inflate(C_PRIME_RETRY);
        outcome = certify_trajectory(&cert, traj, v0, v1);
    }
    cert.realized_ratio = Some(outcome.realized_ratio);
    cert
}

/// `E(t) = a(t) |v|^2 + |v'|^2`.
pub fn symmetriser_energy(a: &CoefficientProfile, traj: &ModeTrajectory) -> Vec<f64> {
    traj.times
        .iter()
        .zip(traj.v.iter().zip(&traj.dv))
        .map(|(t, (v, dv))| a.eval(*t) * v.norm_sqr() + dv.norm_sqr())
        .collect()
}

/// `min(a0, 1) |V|^2 <= E <= max(a1, 1) |V|^2` at every sample.
pub fn symmetriser_sandwich_holds(a: &CoefficientProfile, traj: &ModeTrajectory, energy: &[f64]) -> bool {
    let c0 = a.a0().min(1.0);
    let c1 = a.a1().max(1.0);
    traj.energy().iter().zip(energy).all(|(v2, e)| {
        let slack = 1e-12 * v2;
        c0 * v2 <= e + slack && *e <= c1 * v2 + slack
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallAudit {
    /// `max_t E(t) / (exp(kappa t) E(0))`.
    pub max_ratio: f64,
    pub pass: bool,
}

/// Checks `E(t) <= exp(kappa t) E(0) (1 + slack)` along a Lipschitz-regime trajectory.
pub fn gronwall_audit(a: &CoefficientProfile, traj: &ModeTrajectory, kappa: f64) -> GronwallAudit {
    let energy = symmetriser_energy(a, traj);
    let e0 = energy[0];
    if e0 == 0.0 {
        let pass = energy.iter().all(|e| *e == 0.0);
        return GronwallAudit {
            max_ratio: if pass { 0.0 } else { f64::INFINITY },
            pass,
        };
    }
    let max_ratio = traj
        .times
        .iter()
        .zip(&energy)
        .map(|(t, e)| (e.ln() - e0.ln() - kappa * t).exp())
        .fold(0.0, f64::max);
    GronwallAudit {
        max_ratio,
        pass: max_ratio <= 1.0 + AUDIT_SLACK,
    }
}

#[derive(Debug, Clone)]
pub struct TransformedEnergy {
    pub times: Vec<f64>,
    /// `W(t_i)`; underflows to zero where the weight is negligible.
    pub w: Vec<[Complex64; 2]>,
    /// `rho(t_i) = -K t_i`.
    pub rho: Vec<f64>,
    /// `ln |W(t_i)|^2`, free of underflow.
    pub log_norm_sqr: Vec<f64>,
    pub epsilon: f64,
    pub shifted: bool,
    /// `max_i (|W_{i+1}|^2 - |W_i|^2) / max_i |W_i|^2`.
    pub max_increment: f64,
}

impl TransformedEnergy {
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.max_increment <= slack
    }
}

/// `W = exp(rho <beta>^{1/s}) det(H) H^{-1} V` with `rho = -K t`, `H = [[1, 1], [lam1, lam2]]`.
pub fn transform_energy(
    traj: &ModeTrajectory,
    eigs: &RegularizedEigenvalues,
    k: f64,
    s: f64,
    beta2: f64,
) -> Result<TransformedEnergy> {
    let i = Complex64::new(0.0, 1.0);
    let growth = bracket(beta2).powf(1.0 / s);
    let n = traj.times.len();
    let mut w = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    let mut log_norm_sqr = Vec::with_capacity(n);
    for idx in 0..n {
        let t = traj.times[idx];
        let (l1, l2) = eigs.lam(t);
        let det = l2 - l1;
        if det.abs() < 1e-14 {
            return Err(Error::SingularTransform { t, det });
        }
        let v1 = i * traj.v[idx];
        let v2 = traj.dv[idx];
        let raw = [l2 * v1 - v2, -l1 * v1 + v2];
        let raw_sqr = raw[0].norm_sqr() + raw[1].norm_sqr();
        let r = -k * t;
        let lw = r * growth;
        let scale = lw.exp();
        w.push([raw[0] * scale, raw[1] * scale]);
        rho.push(r);
        log_norm_sqr.push(if raw_sqr == 0.0 {
            f64::NEG_INFINITY
        } else {
            raw_sqr.ln() + 2.0 * lw
        });
    }
    let top = log_norm_sqr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_increment = if top == f64::NEG_INFINITY {
        0.0
    } else {
        log_norm_sqr
            .windows(2)
            .map(|p| (p[1] - top).exp() - (p[0] - top).exp())
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    };
    Ok(TransformedEnergy {
        times: traj.times.clone(),
        w,
        rho,
        log_norm_sqr,
        epsilon: eigs.epsilon(),
        shifted: eigs.is_shifted(),
        max_increment,
    })
}

/// `E_eps(t) = (a(t) + eps^2) |v|^2 + |v'|^2`.
pub fn quasi_symmetriser_energy(a: &CoefficientProfile, traj: &ModeTrajectory, eps: f64) -> Vec<f64> {
    traj.times
        .iter()
        .zip(traj.v.iter().zip(&traj.dv))
        .map(|(t, (v, dv))| (a.eval(*t).max(0.0) + eps * eps) * v.norm_sqr() + dv.norm_sqr())
        .collect()
}

/// `eps^2 / c1 |V|^2 <= E_eps <= c1 |V|^2` with `c1 = |a|_inf + 1`, at every sample.
pub fn quasi_sandwich_holds(a: &CoefficientProfile, traj: &ModeTrajectory, eps: f64, energy: &[f64]) -> bool {
    let c1 = a.sup_abs() + 1.0;
    traj.energy().iter().zip(energy).all(|(v2, e)| {
        let slack = 1e-12 * v2;
        eps * eps / c1 * v2 <= e + slack && *e <= c1 * v2 + slack
    })
}

/// Trapezoidal `int_0^T |a'| / (a + eps^2)^{1 - 1/l} dt`, doubling from 4096 intervals
/// until the relative change drops below `1e-4`.
pub fn log_derivative_integral(a: &CoefficientProfile, eps: f64, l: u32, horizon: f64) -> Result<f64> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("l must be at least 2, got {l}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    a.deriv(0.0).ok_or_else(|| Error::WrongCase {
        case: CaseTag::SmoothWeak.name(),
        reason: "no analytic derivative".into(),
    })?;
    let power = 1.0 - 1.0 / l as f64;
    let e2 = eps * eps;
    let integrand = |t: f64| {
        let d = a.deriv(t).unwrap_or(0.0).abs();
        d / (a.eval(t).max(0.0) + e2).powf(power)
    };
    let mut n = 4096usize;
    let mut h = horizon / n as f64;
    let mut sum = 0.5 * (integrand(0.0) + integrand(horizon))
        + (1..n).map(|i| integrand(i as f64 * h)).sum::<f64>();
    let mut value = sum * h;
    loop {
        // add the midpoints of the current grid
        let mids: f64 = (0..n).map(|i| integrand((i as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h = horizon / n as f64;
        let next = sum * h;
        let change = (next - value).abs();
        value = next;
        if change <= 1e-4 * value.abs() || value == 0.0 || n >= 1 << 24 {
            return Ok(value);
        }
    }
}

/// Constant of the inhomogeneous estimate: `|w|^2 + |w'|^2 <= 2 |V_hom|^2 + 2 C^2 T (1 + beta^2)^2 |g|^2_{L^2}`
/// with `C = max(1 + T + T |b|, T |a|)`.
pub fn corollary_constant(a_sup: f64, b_sup: f64, horizon: f64) -> f64 {
    (1.0 + horizon + horizon * b_sup).max(horizon * a_sup)
}

/// `max_t (|w|^2 + |w'|^2) / (2 |V_hom|^2 + 2 C^2 T (1 + beta^2)^2 |g|^2)` over the samples.
pub fn corollary_ratio(
    forced: &ModeTrajectory,
    homogeneous: &ModeTrajectory,
    beta2: f64,
    constant: f64,
    horizon: f64,
    g_l2_sqr: f64,
) -> f64 {
    let extra = 2.0 * constant * constant * horizon * (1.0 + beta2).powi(2) * g_l2_sqr;
    forced
        .energy()
        .iter()
        .zip(homogeneous.energy())
        .map(|(w, v)| {
            let rhs = 2.0 * v + extra;
            if rhs == 0.0 {
                if *w == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w / rhs
            }
        })
        .fold(0.0, f64::max)
}
