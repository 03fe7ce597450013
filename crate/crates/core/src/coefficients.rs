//! Time-dependent coefficients `a(t)`, `b(t)` and forcing amplitudes.
//!
//! Profiles are closed-form so that sup norms, derivative bounds and Hölder
//! seminorms can be supplied analytically. Outside `[0, T]` every profile is
//! extended by even reflection, which is what the mollifier sees near the
//! endpoints.

use std::fmt;

use crate::error::{Error, Result};

/// Regularity regime of the propagation speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// Lipschitz and bounded below by a positive constant.
    Lip,
    /// Hölder of order in (0, 1) and bounded below by a positive constant.
    HolderStrict,
    /// `C^l` with `l >= 2`, allowed to vanish.
    SmoothWeak,
    /// Hölder of order in (0, 2), allowed to vanish.
    HolderWeak,
}

impl CaseTag {
    pub const ALL: [CaseTag; 4] = [
        CaseTag::Lip,
        CaseTag::HolderStrict,
        CaseTag::SmoothWeak,
        CaseTag::HolderWeak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Lip => "Lip",
            CaseTag::HolderStrict => "HolderStrict",
            CaseTag::SmoothWeak => "SmoothWeak",
            CaseTag::HolderWeak => "HolderWeak",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        CaseTag::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, CaseTag::Lip | CaseTag::HolderStrict)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    /// `base + amplitude * |sin(omega t)|`
    AbsSin { base: f64, amplitude: f64, omega: f64 },
    /// `floor + sum_{j<=depth} 2^{-alpha j} cos(2^j t)`, shifted so its minimum on `[0, T]` is `floor`.
    Weierstrass { alpha: f64, depth: u32, floor: f64 },
    /// `(t - T/2)^{2 power}`
    DegeneratePower { power: u32 },
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Constant { .. } => "constant",
            ProfileKind::Linear { .. } => "linear",
            ProfileKind::AbsSin { .. } => "abs_sin",
            ProfileKind::Weierstrass { .. } => "weierstrass",
            ProfileKind::DegeneratePower { .. } => "degenerate_power",
        }
    }
}

/// Parameters accepted by [`make_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzParams {
    Constant(f64),
    Linear { intercept: f64, slope: f64 },
    AbsSin { base: f64, amplitude: f64, omega: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    kind: ProfileKind,
    horizon: f64,
    case_tag: CaseTag,
    alpha: Option<f64>,
    smoothness: Option<u32>,
    a0: f64,
    a1: f64,
    // Weierstrass only: raw minimum removed by the shift, and where it is attained
    shift: f64,
    argmin: f64,
}

/// A Hölder seminorm value together with whether it is a rigorous upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seminorm {
    pub value: f64,
    pub certified: bool,
}

impl CoefficientProfile {
    /// Builds a profile of any kind with the default case tag for that kind.
    pub fn from_kind(kind: ProfileKind, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        check_kind(&kind)?;
        let mut p = Self {
            kind,
            horizon,
            case_tag: CaseTag::Lip,
            alpha: None,
            smoothness: None,
            a0: 0.0,
            a1: 0.0,
            shift: 0.0,
            argmin: 0.0,
        };
        match p.kind {
            ProfileKind::Constant { value } => {
                p.a0 = value;
                p.a1 = value;
            }
            ProfileKind::Linear { intercept, slope } => {
                let end = intercept + slope * horizon;
                p.a0 = intercept.min(end);
                p.a1 = intercept.max(end);
                p.argmin = if slope >= 0.0 { 0.0 } else { horizon };
            }
            ProfileKind::AbsSin {
                base,
                amplitude,
                omega,
            } => {
                p.a0 = base;
                let top = if omega * horizon >= std::f64::consts::FRAC_PI_2 {
                    1.0
                } else {
                    (omega * horizon).sin()
                };
                p.a1 = base + amplitude * top;
            }
            ProfileKind::Weierstrass {
                alpha,
                depth,
                floor,
            } => {
                let (tmin, wmin) = weierstrass_min(alpha, depth, horizon);
                p.shift = wmin;
                p.argmin = tmin;
                p.a0 = floor;
                p.a1 = floor + weierstrass_raw(alpha, depth, 0.0) - wmin;
                p.alpha = Some(alpha);
            }
            ProfileKind::DegeneratePower { power } => {
                p.a0 = 0.0;
                p.a1 = (horizon / 2.0).powi(2 * power as i32);
                p.argmin = horizon / 2.0;
                p.smoothness = Some(2);
            }
        }
        p.case_tag = p.default_case();
        Ok(p)
    }

    pub fn constant(value: f64, horizon: f64) -> Result<Self> {
        Self::from_kind(ProfileKind::Constant { value }, horizon)
    }

    fn default_case(&self) -> CaseTag {
        match self.kind {
            ProfileKind::Weierstrass { floor, .. } if floor > 0.0 => CaseTag::HolderStrict,
            ProfileKind::Weierstrass { .. } => CaseTag::HolderWeak,
            ProfileKind::DegeneratePower { .. } => CaseTag::SmoothWeak,
            _ if self.a0 > 0.0 => CaseTag::Lip,
            _ => CaseTag::SmoothWeak,
        }
    }

    /// Retags the profile; fails if the profile violates the regime's preconditions.
    pub fn with_case(mut self, case: CaseTag) -> Result<Self> {
        self.case_tag = case;
        self.validate_case()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "Hölder exponent must lie in (0, 2), got {alpha}"
            )));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    pub fn with_smoothness(mut self, l: u32) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidParameter(format!(
                "smoothness order must be at least 2, got {l}"
            )));
        }
        self.smoothness = Some(l);
        Ok(self)
    }

    /// Checks the preconditions attached to the current case tag.
    pub fn validate_case(&self) -> Result<()> {
        let case = self.case_tag.name();
        let fail = |reason: String| Err(Error::WrongCase { case, reason });
        match self.case_tag {
            CaseTag::Lip => {
                if self.a0 <= 0.0 {
                    return fail(format!("requires a0 > 0, got a0 = {}", self.a0));
                }
                if self.lipschitz().is_none() {
                    return fail(format!("{} profiles are not Lipschitz", self.kind.name()));
                }
            }
            CaseTag::HolderStrict => {
                if self.a0 <= 0.0 {
                    return fail(match self.kind {
                        ProfileKind::Weierstrass { .. } => "requires floor > 0".to_string(),
                        _ => format!("requires a0 > 0, got a0 = {}", self.a0),
                    });
                }
                match self.alpha {
                    Some(a) if a > 0.0 && a < 1.0 => {}
                    Some(a) => return fail(format!("Hölder exponent {a} outside (0, 1)")),
                    None => return fail("requires a Hölder exponent".to_string()),
                }
            }
            CaseTag::SmoothWeak => {
                if self.a0 < -NEGATIVE_DUST {
                    return fail(format!("requires a >= 0, got a0 = {}", self.a0));
                }
                let l = self.smoothness.unwrap_or(2);
                if self.cl_norm(l).is_none() {
                    return fail(format!("{} profiles are not C^{l}", self.kind.name()));
                }
            }
            CaseTag::HolderWeak => {
                if self.a0 < -NEGATIVE_DUST {
                    return fail(format!("requires a >= 0, got a0 = {}", self.a0));
                }
                match self.alpha {
                    Some(a) if a > 0.0 && a < 2.0 => {}
                    Some(a) => return fail(format!("Hölder exponent {a} outside (0, 2)")),
                    None => return fail("requires a Hölder exponent".to_string()),
                }
            }
        }
        Ok(())
    }

    /// Fails unless the profile is pointwise non-negative (lower-order coefficients).
    pub fn require_nonnegative(&self, what: &str) -> Result<()> {
        if self.a0 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{what} must be non-negative, infimum is {}",
                self.a0
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn smoothness(&self) -> Option<u32> {
        self.smoothness
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// `sup |a|` over `[0, T]`.
    pub fn sup_abs(&self) -> f64 {
        self.a0.abs().max(self.a1.abs())
    }

    /// A point of `[0, T]` where the infimum is attained.
    pub fn argmin(&self) -> f64 {
        self.argmin
    }

    /// Angular frequency scale of the profile, used to size quadratures.
    pub fn bandwidth(&self) -> f64 {
        match self.kind {
            ProfileKind::AbsSin { omega, .. } => omega,
            ProfileKind::Weierstrass { depth, .. } => 2f64.powi(depth as i32),
            _ => 0.0,
        }
    }

    fn reflect(&self, t: f64) -> (f64, f64) {
        let period = 2.0 * self.horizon;
        let r = t.rem_euclid(period);
        if r > self.horizon {
            (period - r, -1.0)
        } else {
            (r, 1.0)
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (t, _) = self.reflect(t);
        match self.kind {
            ProfileKind::Constant { value } => value,
            ProfileKind::Linear { intercept, slope } => intercept + slope * t,
            ProfileKind::AbsSin {
                base,
                amplitude,
                omega,
            } => base + amplitude * (omega * t).sin().abs(),
            ProfileKind::Weierstrass {
                alpha,
                depth,
                floor,
            } => floor + (weierstrass_raw(alpha, depth, t) - self.shift),
            ProfileKind::DegeneratePower { power } => {
                (t - self.horizon / 2.0).powi(2 * power as i32)
            }
        }
    }

    /// `a'(t)` where the profile has a classical derivative model.
    pub fn deriv(&self, t: f64) -> Option<f64> {
        let (t, sign) = self.reflect(t);
        let d = match self.kind {
            ProfileKind::Constant { .. } => 0.0,
            ProfileKind::Linear { slope, .. } => slope,
            ProfileKind::AbsSin {
                amplitude, omega, ..
            } => {
                let s = (omega * t).sin();
                amplitude * omega * (omega * t).cos() * if s < 0.0 { -1.0 } else { 1.0 }
            }
            ProfileKind::Weierstrass { .. } => return None,
            ProfileKind::DegeneratePower { power } => {
                let m = 2 * power as i32;
                m as f64 * (t - self.horizon / 2.0).powi(m - 1)
            }
        };
        Some(sign * d)
    }

    /// `sup |a'|` over `[0, T]`, when the profile is Lipschitz.
    pub fn lipschitz(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Constant { .. } => Some(0.0),
            ProfileKind::Linear { slope, .. } => Some(slope.abs()),
            ProfileKind::AbsSin {
                amplitude, omega, ..
            } => Some(amplitude * omega),
            ProfileKind::Weierstrass { .. } => None,
            ProfileKind::DegeneratePower { power } => {
                let m = 2 * power as i32;
                Some(m as f64 * (self.horizon / 2.0).powi(m - 1))
            }
        }
    }

    /// `max_{k <= l} sup |a^{(k)}|` over `[0, T]`, when the profile is `C^l`.
    pub fn cl_norm(&self, l: u32) -> Option<f64> {
        match self.kind {
            ProfileKind::Constant { value } => Some(value.abs()),
            ProfileKind::Linear { slope, .. } => Some(self.sup_abs().max(slope.abs())),
            ProfileKind::DegeneratePower { power } => {
                let m = 2 * power;
                let half = self.horizon / 2.0;
                let mut best: f64 = 0.0;
                for k in 0..=l.min(m) {
                    let falling: f64 = ((m - k + 1)..=m).map(|j| j as f64).product();
                    best = best.max(falling * half.powi((m - k) as i32));
                }
                Some(best)
            }
            ProfileKind::AbsSin { amplitude, .. } if amplitude == 0.0 => Some(self.sup_abs()),
            _ => None,
        }
    }

    /// Analytic upper bound on the Hölder seminorm of order `gamma` in `(0, 1]`.
    pub fn holder_seminorm(&self, gamma: f64) -> Option<f64> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return None;
        }
        let t = self.horizon;
        match self.kind {
            ProfileKind::Constant { .. } => Some(0.0),
            ProfileKind::Linear { slope, .. } => Some(slope.abs() * t.powf(1.0 - gamma)),
            ProfileKind::AbsSin {
                amplitude, omega, ..
            } => {
                if omega == 0.0 || amplitude == 0.0 {
                    return Some(0.0);
                }
                // ||sin x| - |sin y|| <= min(|x - y|, 1)
                let knee = 1.0 / omega;
                Some(if knee <= t {
                    amplitude * omega.powf(gamma)
                } else {
                    amplitude * omega * t.powf(1.0 - gamma)
                })
            }
            ProfileKind::Weierstrass { alpha, depth, .. } => {
                Some(weierstrass_seminorm(alpha, depth, gamma, t))
            }
            ProfileKind::DegeneratePower { .. } => {
                self.lipschitz().map(|lip| lip * t.powf(1.0 - gamma))
            }
        }
    }

    /// Analytic seminorm when available, otherwise the sampled lower bound.
    pub fn seminorm(&self, gamma: f64) -> Result<Seminorm> {
        match self.holder_seminorm(gamma) {
            Some(value) => Ok(Seminorm {
                value,
                certified: true,
            }),
            None => Ok(Seminorm {
                value: holder_seminorm_estimate(self, gamma, 1 << 14)?,
                certified: false,
            }),
        }
    }
}

/// Tolerance below which negative values of a non-negative profile are rounding dust.
pub const NEGATIVE_DUST: f64 = 1e-12;

fn check_kind(kind: &ProfileKind) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidParameter(msg));
    let finite = |x: f64, name: &str| -> Result<()> {
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{name} must be finite")))
        }
    };
    match *kind {
        ProfileKind::Constant { value } => finite(value, "value"),
        ProfileKind::Linear { intercept, slope } => {
            finite(intercept, "intercept")?;
            finite(slope, "slope")
        }
        ProfileKind::AbsSin {
            base,
            amplitude,
            omega,
        } => {
            finite(base, "base")?;
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return bad(format!("amplitude must be non-negative, got {amplitude}"));
            }
            if !(omega.is_finite() && omega > 0.0) {
                return bad(format!("omega must be positive, got {omega}"));
            }
            Ok(())
        }
        ProfileKind::Weierstrass {
            alpha,
            depth,
            floor,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return bad(format!("Weierstrass alpha must lie in (0, 1), got {alpha}"));
            }
            if depth > 30 {
                return bad(format!("Weierstrass depth {depth} exceeds 30"));
            }
            if !(floor.is_finite() && floor >= 0.0) {
                return bad(format!("floor must be non-negative, got {floor}"));
            }
            Ok(())
        }
        ProfileKind::DegeneratePower { power } => {
            if power == 0 || power > 16 {
                return bad(format!("power must lie in 1..=16, got {power}"));
            }
            Ok(())
        }
    }
}

pub fn make_lipschitz(params: LipschitzParams, horizon: f64) -> Result<CoefficientProfile> {
    let kind = match params {
        LipschitzParams::Constant(value) => {
            if value <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "Lipschitz speed needs c0 > 0, got {value}"
                )));
            }
            ProfileKind::Constant { value }
        }
        LipschitzParams::Linear { intercept, slope } => ProfileKind::Linear { intercept, slope },
        LipschitzParams::AbsSin {
            base,
            amplitude,
            omega,
        } => ProfileKind::AbsSin {
            base,
            amplitude,
            omega,
        },
    };
    let p = CoefficientProfile::from_kind(kind, horizon)?;
    if p.a0 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz speed needs a positive infimum, got {}",
            p.a0
        )));
    }
    p.with_case(CaseTag::Lip)
}

pub fn make_weierstrass(alpha: f64, depth: u32, floor: f64, horizon: f64) -> Result<CoefficientProfile> {
    CoefficientProfile::from_kind(
        ProfileKind::Weierstrass {
            alpha,
            depth,
            floor,
        },
        horizon,
    )
}

pub fn make_degenerate_smooth(power: u32, horizon: f64) -> Result<CoefficientProfile> {
    CoefficientProfile::from_kind(ProfileKind::DegeneratePower { power }, horizon)
}

fn weierstrass_raw(alpha: f64, depth: u32, t: f64) -> f64 {
    (0..=depth)
        .map(|j| {
            let f = 2f64.powi(j as i32);
            f.powf(-alpha) * (f * t).cos()
        })
        .sum()
}

fn weierstrass_d1_d2(alpha: f64, depth: u32, t: f64) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for j in 0..=depth {
        let f = 2f64.powi(j as i32);
        let amp = f.powf(-alpha);
        let (s, c) = (f * t).sin_cos();
        d1 -= amp * f * s;
        d2 -= amp * f * f * c;
    }
    (d1, d2)
}

/// Global minimum of the raw Weierstrass sum on `[0, T]`: dense scan, then
/// safeguarded Newton on the derivative in every bracket that could hold it.
fn weierstrass_min(alpha: f64, depth: u32, horizon: f64) -> (f64, f64) {
    let top = 2f64.powi(depth as i32);
    let samples = ((horizon * top * 8.0).ceil() as usize).clamp(64, 1 << 24);
    let h = horizon / samples as f64;
    let values: Vec<f64> = (0..=samples)
        .map(|i| weierstrass_raw(alpha, depth, i as f64 * h))
        .collect();
    let curvature: f64 = (0..=depth)
        .map(|j| 2f64.powi(j as i32).powf(2.0 - alpha))
        .sum();
    let scan_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let slack = curvature * h * h;

    let mut best_t = 0.0;
    let mut best = f64::INFINITY;
    let mut consider = |t: f64, v: f64| {
        if v < best {
            best = v;
            best_t = t;
        }
    };
    consider(0.0, values[0]);
    consider(horizon, weierstrass_raw(alpha, depth, horizon));
    for i in 0..=samples {
        if values[i] > scan_min + slack {
            continue;
        }
        consider(i as f64 * h, values[i]);
        let lo = (i as f64 - 1.0).max(0.0) * h;
        let hi = ((i + 1) as f64 * h).min(horizon);
        if let Some(t) = derivative_root(alpha, depth, lo, hi) {
            consider(t, weierstrass_raw(alpha, depth, t));
        }
    }
    (best_t, best)
}

fn derivative_root(alpha: f64, depth: u32, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (dlo, _) = weierstrass_d1_d2(alpha, depth, lo);
    let (dhi, _) = weierstrass_d1_d2(alpha, depth, hi);
    if !(dlo < 0.0 && dhi > 0.0) {
        return None;
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (d1, d2) = weierstrass_d1_d2(alpha, depth, t);
        if d1 < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - d1 / d2;
        t = if d2 > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * (1.0 + t.abs()) || d1 == 0.0 {
            break;
        }
    }
    Some(t)
}

/// `sup_{0 < h <= T} sum_j 2^{-alpha j} min(2, 2^j h) / h^gamma`; the supremum
/// of each piece sits at a breakpoint `2^{1-j}`, at `T`, or (for `gamma = 1`) at `h -> 0`.
fn weierstrass_seminorm(alpha: f64, depth: u32, gamma: f64, horizon: f64) -> f64 {
    let f = |h: f64| -> f64 {
        (0..=depth)
            .map(|j| {
                let s = 2f64.powi(j as i32);
                s.powf(-alpha) * (s * h).min(2.0)
            })
            .sum::<f64>()
            / h.powf(gamma)
    };
    let mut best = f(horizon);
    for j in 0..=depth {
        let h = 2f64.powi(1 - j as i32);
        if h <= horizon {
            best = best.max(f(h));
        }
    }
    if gamma >= 1.0 {
        let slope: f64 = (0..=depth)
            .map(|j| 2f64.powi(j as i32).powf(1.0 - alpha))
            .sum();
        best = best.max(slope);
    }
    best
}

/// Sampled lower bound on the Hölder seminorm: `K + 1` uniform points and all
/// dyadic separations `2^p T / K`. Doubling `K` only adds pairs.
pub fn holder_seminorm_estimate(profile: &CoefficientProfile, alpha: f64, k: usize) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Hölder exponent must be positive, got {alpha}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "sample count must be at least 2, got {k}"
        )));
    }
    let t = profile.horizon();
    let dt = t / k as f64;
    let values: Vec<f64> = (0..=k).map(|i| profile.eval(i as f64 * dt)).collect();
    let mut best: f64 = 0.0;
    let mut sep = 1;
    while sep <= k {
        let denom = (sep as f64 * dt).powf(alpha);
        for i in 0..=(k - sep) {
            best = best.max((values[i + sep] - values[i]).abs() / denom);
        }
        sep *= 2;
    }
    Ok(best)
}

/// `int_{-1}^{1} exp(-1 / (1 - x^2)) dx`.
pub const BUMP_MASS: f64 = 0.443_993_816_168_078_65;

/// Gauss–Legendre nodes per panel.
pub const MOLLIFIER_NODES: usize = 64;

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp() / BUMP_MASS
    }
}

fn bump_deriv(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - x * x;
        bump(x) * (-2.0 * x / (q * q))
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Convolution with `phi_eps(t) = phi(t / eps) / eps`, `phi` the standard bump,
/// by composite Gauss–Legendre quadrature over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    epsilon: f64,
    panels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dweights: Vec<f64>,
    raw_mass: f64,
}

impl Mollifier {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_panels(epsilon, 1)
    }

    /// Enough panels that each sees at most ~40 radians of a signal with angular frequency `omega`.
    pub fn for_bandwidth(epsilon: f64, omega: f64) -> Result<Self> {
        let panels = ((2.0 * epsilon * omega / 40.0).ceil() as usize).max(1);
        Self::with_panels(epsilon, panels)
    }

    pub fn with_panels(epsilon: f64, panels: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mollifier width must be positive, got {epsilon}"
            )));
        }
        if panels == 0 || panels > 1 << 16 {
            return Err(Error::InvalidParameter(format!("panel count {panels} out of range")));
        }
        let (gx, gw) = gauss_legendre(MOLLIFIER_NODES);
        let width = 2.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * MOLLIFIER_NODES);
        let mut quad = Vec::with_capacity(panels * MOLLIFIER_NODES);
        for p in 0..panels {
            let mid = -1.0 + width * (p as f64 + 0.5);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * width * x);
                quad.push(0.5 * width * w);
            }
        }
        let raw: Vec<f64> = nodes.iter().zip(&quad).map(|(x, w)| w * bump(*x)).collect();
        let raw_mass: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / raw_mass).collect();
        let dweights = nodes
            .iter()
            .zip(&quad)
            .map(|(x, w)| w * bump_deriv(*x) / raw_mass)
            .collect();
        Ok(Self {
            epsilon,
            panels,
            nodes,
            weights,
            dweights,
            raw_mass,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Quadrature value of `int phi` before renormalization.
    pub fn quadrature_mass(&self) -> f64 {
        self.raw_mass
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64, t: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(t - self.epsilon * x))
            .sum()
    }

    /// Value and time derivative of the mollified function at `t`.
    pub fn apply_with_derivative(&self, f: impl Fn(f64) -> f64, t: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut slope = 0.0;
        for ((x, w), dw) in self.nodes.iter().zip(&self.weights).zip(&self.dweights) {
            let y = f(t - self.epsilon * x);
            value += w * y;
            slope += dw * y;
        }
        (value, slope / self.epsilon)
    }
}

/// Mollified profile `t -> (profile * phi_eps)(t)` using the profile's even extension.
pub fn mollify<'a>(profile: &'a CoefficientProfile, mol: &'a Mollifier) -> impl Fn(f64) -> f64 + 'a {
    move |t| mol.apply(|s| profile.eval(s), t)
}

/// `sqrt(max(a, 0))`, rejecting values below the rounding-dust threshold.
pub fn sqrt_clamped(a: f64, t: f64) -> Result<f64> {
    if a < -NEGATIVE_DUST {
        return Err(Error::NegativeCoefficient { t, value: a });
    }
    Ok(a.max(0.0).sqrt())
}

/// `lam_{1,2} = -/+ (sqrt(a) * phi_eps)`, optionally shifted by `eps^e` and `2 eps^e`.
#[derive(Debug, Clone)]
pub struct RegularizedEigenvalues {
    profile: CoefficientProfile,
    mollifier: Mollifier,
    shift: Option<f64>,
}

impl RegularizedEigenvalues {
    pub fn epsilon(&self) -> f64 {
        self.mollifier.epsilon
    }

    pub fn is_shifted(&self) -> bool {
        self.shift.is_some()
    }

    /// Exponent `e` of the shift `eps^e`, when shifted.
    pub fn shift_exponent(&self) -> Option<f64> {
        self.shift
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    fn shift_value(&self) -> f64 {
        self.shift
            .map_or(0.0, |e| self.mollifier.epsilon.powf(e))
    }

    fn sqrt_a(&self, t: f64) -> f64 {
        self.profile.eval(t).max(0.0).sqrt()
    }

    /// `(sqrt(a) * phi_eps)(t)` and its derivative.
    pub fn mollified_sqrt(&self, t: f64) -> (f64, f64) {
        self.mollifier.apply_with_derivative(|s| self.sqrt_a(s), t)
    }

    pub fn lam(&self, t: f64) -> (f64, f64) {
        let (m, _) = self.mollified_sqrt(t);
        let d = self.shift_value();
        (-m + d, m + 2.0 * d)
    }

    /// `(lam1, lam2, lam1', lam2')` at `t`.
    pub fn lam_with_derivative(&self, t: f64) -> (f64, f64, f64, f64) {
        let (m, dm) = self.mollified_sqrt(t);
        let d = self.shift_value();
        (-m + d, m + 2.0 * d, -dm, dm)
    }

    /// Checks the gap and sum invariants on `samples` points of `[0, T]`.
    pub fn check_invariants(&self, samples: usize) -> bool {
        let t_end = self.profile.horizon();
        let d = self.shift_value();
        let gap = if self.is_shifted() {
            d
        } else {
            2.0 * self.profile.a0().max(0.0).sqrt()
        };
        (0..=samples).all(|i| {
            let t = t_end * i as f64 / samples as f64;
            let (l1, l2) = self.lam(t);
            let gap_ok = l2 - l1 >= gap * (1.0 - 1e-12);
            let sum_ok = !self.is_shifted() || ((l1 + l2) - 3.0 * d).abs() <= 1e-12 * (1.0 + d);
            gap_ok && sum_ok
        })
    }
}

/// Builds the regularized eigenvalues of `a`; `shift` is the exponent `e` of the shift `eps^e`.
pub fn regularized_eigenvalues(
    a: &CoefficientProfile,
    eps: f64,
    shift: Option<f64>,
) -> Result<RegularizedEigenvalues> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "regularization width must lie in (0, 1], got {eps}"
        )));
    }
    if a.a0() < -NEGATIVE_DUST {
        return Err(Error::NegativeCoefficient {
            t: a.argmin(),
            value: a.a0(),
        });
    }
    if let Some(e) = shift {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::InvalidParameter(format!("shift exponent must be positive, got {e}")));
        }
    }
    Ok(RegularizedEigenvalues {
        profile: a.clone(),
        mollifier: Mollifier::for_bandwidth(eps, a.bandwidth())?,
        shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lipschitz_examples() {
        let a = make_lipschitz(LipschitzParams::Constant(2.0), 1.0).unwrap();
        assert_eq!((a.a0(), a.a1(), a.holder_seminorm(1.0)), (2.0, 2.0, Some(0.0)));
        let a = make_lipschitz(LipschitzParams::Linear { intercept: 1.0, slope: 1.0 }, 1.0).unwrap();
        assert_eq!((a.a0(), a.a1(), a.lipschitz()), (1.0, 2.0, Some(1.0)));
        let a = make_lipschitz(
            LipschitzParams::AbsSin { base: 1.0, amplitude: 1.0, omega: 5.0 },
            1.0,
        )
        .unwrap();
        assert_eq!(a.lipschitz(), Some(5.0));
        assert_eq!(a.holder_seminorm(1.0), Some(5.0));
        assert!(make_lipschitz(LipschitzParams::Constant(0.0), 1.0).is_err());
    }

    #[test]
    fn degenerate_examples() {
        let a = make_degenerate_smooth(1, 2.0).unwrap();
        assert_eq!(a.eval(1.0), 0.0);
        assert_eq!(a.eval(0.0), 1.0);
        assert_eq!(a.deriv(0.3), Some(2.0 * (0.3 - 1.0)));
        assert_eq!(a.case_tag(), CaseTag::SmoothWeak);
        let a = make_degenerate_smooth(2, 2.0).unwrap();
        assert_eq!(a.a0(), 0.0);
        assert_eq!(a.cl_norm(2), Some(12.0));
    }

    #[test]
    fn weierstrass_shift_pins_minimum() {
        let a = make_weierstrass(0.5, 0, 1.0, 1.0).unwrap();
        assert!((a.eval(1.0) - 1.0).abs() < 1e-14);
        let a = make_weierstrass(0.5, 12, 0.0, 1.0).unwrap();
        assert!(a.eval(a.argmin()).abs() < 1e-10);
        assert_eq!(a.case_tag(), CaseTag::HolderWeak);
        assert!(make_weierstrass(1.0, 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn reflection_is_even() {
        let a = make_weierstrass(0.5, 6, 1.0, 1.0).unwrap();
        for t in [0.1, 0.37, 0.9] {
            assert!((a.eval(-t) - a.eval(t)).abs() < 1e-14);
            assert!((a.eval(1.0 + t) - a.eval(1.0 - t)).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(64);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn mollifier_mass_and_constants() {
        let m = Mollifier::new(0.25).unwrap();
        assert!((m.quadrature_mass() - 1.0).abs() < 1e-10);
        let a = CoefficientProfile::constant(4.0, 1.0).unwrap();
        let f = mollify(&a, &m);
        assert!((f(0.5) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn shifted_eigenvalues_of_zero() {
        let a = CoefficientProfile::constant(0.0, 1.0).unwrap();
        let e = regularized_eigenvalues(&a, 0.25, Some(0.5)).unwrap();
        let (l1, l2) = e.lam(0.3);
        assert!((l1 - 0.5).abs() < 1e-15 && (l2 - 1.0).abs() < 1e-15);
        assert!(e.check_invariants(64));
    }

    #[test]
    fn estimator_examples() {
        let c = CoefficientProfile::constant(3.0, 1.0).unwrap();
        assert_eq!(holder_seminorm_estimate(&c, 0.5, 64).unwrap(), 0.0);
        let lin = CoefficientProfile::from_kind(ProfileKind::Linear { intercept: 0.0, slope: 1.0 }, 1.0).unwrap();
        assert!((holder_seminorm_estimate(&lin, 1.0, 64).unwrap() - 1.0).abs() < 1e-10);
        assert!(holder_seminorm_estimate(&lin, 0.0, 64).is_err());
    }
}
