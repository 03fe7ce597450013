//! Experiment files: line-oriented `key = value` pairs inside `[section]` blocks.
//! `#` and `;` start comments. Parsing reports every problem found, not just the first.
//!
//! ```text
//! [run]
//! mode = verify          # solve | verify | converge | selftest
//! T = 1
//! ode_tol = 1e-10
//!
//! [grid]
//! n = 1
//! N = 64
//! hbar = 0.015625        # converge: comma-separated list, with L
//!
//! [a]
//! kind = weierstrass
//! alpha = 0.5
//! depth = 8
//! floor = 1
//!
//! [b]
//! kind = constant
//! value = 0
//!
//! [data]
//! u0 = single_mode 1
//! u1 = zero
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::coefficients::{CaseTag, CoefficientProfile, ProfileKind};
use crate::error::{Error, Result};
use crate::lattice_fourier::{GridField, LatticeGrid, MAX_DIM};
use crate::semiclassical::{BandLimited, ContinuumForcing, ContinuumSpec};
use crate::wave_solver::{CauchySpec, Forcing};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Solve,
    Verify,
    Converge,
    Selftest,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Solve => "solve",
            RunMode::Verify => "verify",
            RunMode::Converge => "converge",
            RunMode::Selftest => "selftest",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [RunMode::Solve, RunMode::Verify, RunMode::Converge, RunMode::Selftest]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub horizon: f64,
    pub ode_tol: f64,
    pub s: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub points: Option<usize>,
    pub hbars: Vec<f64>,
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileConfig {
    pub kind: ProfileKind,
    pub case: Option<CaseTag>,
    /// Hölder exponent for non-Weierstrass kinds.
    pub alpha: Option<f64>,
    pub smoothness: Option<u32>,
}

impl ProfileConfig {
    pub fn constant(value: f64) -> Self {
        Self {
            kind: ProfileKind::Constant { value },
            case: None,
            alpha: None,
            smoothness: None,
        }
    }

    pub fn build(&self, horizon: f64) -> Result<CoefficientProfile> {
        let mut p = CoefficientProfile::from_kind(self.kind.clone(), horizon)?;
        if let Some(a) = self.alpha {
            p = p.with_alpha(a)?;
        }
        if let Some(l) = self.smoothness {
            p = p.with_smoothness(l)?;
        }
        match self.case {
            Some(c) => p.with_case(c),
            None => Ok(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataPreset {
    Zero,
    /// 1 at the origin, 0 elsewhere.
    Delta,
    SingleMode(Vec<i64>),
    GaussianSeries { cutoff: i64, width: f64 },
    Series(Vec<(Vec<i64>, Complex64)>),
}

impl DataPreset {
    pub fn band_limited(&self, dim: usize, period: f64) -> Result<BandLimited> {
        let pad = |m: &[i64]| -> Result<[i64; MAX_DIM]> {
            if m.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "mode {m:?} has {} components in dimension {dim}",
                    m.len()
                )));
            }
            let mut out = [0; MAX_DIM];
            out[..dim].copy_from_slice(m);
            Ok(out)
        };
        match self {
            DataPreset::Zero => BandLimited::zero(dim, period),
            DataPreset::Delta => Err(Error::InvalidParameter(
                "delta data are not band-limited".into(),
            )),
            DataPreset::SingleMode(m) => BandLimited::single_mode(dim, period, &pad(m)?[..dim]),
            DataPreset::GaussianSeries { cutoff, width } => {
                BandLimited::gaussian_series(dim, period, *cutoff, *width)
            }
            DataPreset::Series(terms) => BandLimited::new(
                dim,
                period,
                terms
                    .iter()
                    .map(|(m, c)| Ok((pad(m)?, *c)))
                    .collect::<Result<_>>()?,
            ),
        }
    }

    pub fn field(&self, grid: &LatticeGrid) -> Result<GridField> {
        match self {
            DataPreset::Delta => GridField::from_fn(*grid, |idx| {
                if idx.iter().all(|&k| k == 0) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            other => other.band_limited(grid.dim(), grid.period())?.sample(grid),
        }
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut words = text.split_whitespace();
        let head = words.next().unwrap_or("");
        let rest: Vec<&str> = words.collect();
        let ints = |xs: &[&str]| -> std::result::Result<Vec<i64>, String> {
            xs.iter()
                .map(|x| x.parse::<i64>().map_err(|_| format!("'{x}' is not an integer")))
                .collect()
        };
        match head {
            "zero" if rest.is_empty() => Ok(DataPreset::Zero),
            "delta" if rest.is_empty() => Ok(DataPreset::Delta),
            "single_mode" if !rest.is_empty() => Ok(DataPreset::SingleMode(ints(&rest)?)),
            "gaussian_series" if rest.len() == 2 => {
                let cutoff = rest[0]
                    .parse::<i64>()
                    .ok()
                    .filter(|c| *c >= 0)
                    .ok_or_else(|| format!("'{}' is not a non-negative cutoff", rest[0]))?;
                let width = parse_f64(rest[1])?;
                Ok(DataPreset::GaussianSeries { cutoff, width })
            }
            "series" if !rest.is_empty() => {
                let joined = rest.join(" ");
                let terms = joined
                    .split(',')
                    .map(|term| {
                        let parts: Vec<&str> = term.trim().split(':').collect();
                        if parts.len() != 3 {
                            return Err(format!("series term '{}' is not mode:re:im", term.trim()));
                        }
                        let mode: Vec<&str> = parts[0].split('/').collect();
                        Ok((ints(&mode)?, Complex64::new(parse_f64(parts[1])?, parse_f64(parts[2])?)))
                    })
                    .collect::<std::result::Result<_, String>>()?;
                Ok(DataPreset::Series(terms))
            }
            _ => Err(format!(
                "unknown data preset '{text}' (zero, delta, single_mode m.., gaussian_series M width, series m:re:im,..)"
            )),
        }
    }

    fn render(&self) -> String {
        let modes = |m: &[i64], sep: &str| m.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep);
        match self {
            DataPreset::Zero => "zero".into(),
            DataPreset::Delta => "delta".into(),
            DataPreset::SingleMode(m) => format!("single_mode {}", modes(m, " ")),
            DataPreset::GaussianSeries { cutoff, width } => format!("gaussian_series {cutoff} {width:?}"),
            DataPreset::Series(terms) => format!(
                "series {}",
                terms
                    .iter()
                    .map(|(m, c)| format!("{}:{:?}:{:?}", modes(m, "/"), c.re, c.im))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ForcingConfig {
    #[default]
    Zero,
    Separable { g: ProfileConfig, shape: DataPreset },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub grid: GridConfig,
    pub a: ProfileConfig,
    pub b: ProfileConfig,
    pub u0: DataPreset,
    pub u1: DataPreset,
    pub forcing: ForcingConfig,
    /// Debug multiplier on the certificate constant `K`.
    pub k_scale: f64,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("'{}' is not a finite number", s.trim()))
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

const SECTIONS: [&str; 7] = ["run", "grid", "a", "b", "data", "forcing", "debug"];

fn tokenize(text: &str, errors: &mut Vec<String>) -> Sections {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = match raw.find(['#', ';']) {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                errors.push(format!("line {line_no}: unknown section [{name}]"));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {line_no}: expected key = value, got '{line}'"));
            continue;
        };
        let Some(section) = &current else {
            errors.push(format!("line {line_no}: key '{}' outside any section", key.trim()));
            continue;
        };
        let entry = sections.entry(section.clone()).or_default();
        let key = key.trim().to_string();
        if entry.contains_key(&key) {
            errors.push(format!("line {line_no}: duplicate key '{key}' in [{section}]"));
        }
        entry.insert(key, (line_no, value.trim().to_string()));
    }
    sections
}

struct Reader<'a> {
    section: &'static str,
    map: BTreeMap<String, (usize, String)>,
    errors: &'a mut Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(sections: &mut Sections, section: &'static str, errors: &'a mut Vec<String>) -> Self {
        Self {
            section,
            map: sections.remove(section).unwrap_or_default(),
            errors,
        }
    }

    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn fail(&mut self, line: usize, key: &str, msg: String) {
        self.errors
            .push(format!("line {line}: [{}] {key}: {msg}", self.section));
    }

    fn missing(&mut self, key: &str) {
        self.errors
            .push(format!("[{}] missing required key '{key}'", self.section));
    }

    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Option<T> {
        let (line, value) = self.raw(key)?;
        match parse(&value) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.fail(line, key, msg);
                None
            }
        }
    }

    fn f64(&mut self, key: &str) -> Option<f64> {
        self.get(key, parse_f64)
    }

    fn usize(&mut self, key: &str) -> Option<usize> {
        self.get(key, |s| s.parse::<usize>().map_err(|_| format!("'{s}' is not a non-negative integer")))
    }

    fn required_f64(&mut self, key: &str) -> Option<f64> {
        if !self.has(key) {
            self.missing(key);
            return None;
        }
        self.f64(key)
    }

    fn finish(self) {
        for (key, (line, _)) in self.map {
            self.errors
                .push(format!("line {line}: unknown key '{key}' in [{}]", self.section));
        }
    }
}

fn read_profile(r: &mut Reader, prefix: &str) -> Option<ProfileConfig> {
    let key = |k: &str| format!("{prefix}{k}");
    let Some((line, kind_name)) = r.raw(&key("kind")) else {
        r.missing(&key("kind"));
        return None;
    };
    let need = |r: &mut Reader, k: &str| {
        let name = key(k);
        if r.has(&name) {
            r.f64(&name)
        } else {
            r.missing(&name);
            None
        }
    };
    let kind = match kind_name.as_str() {
        "constant" => need(r, "value").map(|value| ProfileKind::Constant { value }),
        "linear" => {
            let intercept = need(r, "intercept");
            let slope = need(r, "slope");
            Some(ProfileKind::Linear {
                intercept: intercept?,
                slope: slope?,
            })
        }
        "abs_sin" => {
            let base = need(r, "base");
            let amplitude = need(r, "amplitude");
            let omega = need(r, "omega");
            Some(ProfileKind::AbsSin {
                base: base?,
                amplitude: amplitude?,
                omega: omega?,
            })
        }
        "weierstrass" => {
            let alpha = need(r, "alpha");
            let depth = if r.has(&key("depth")) {
                r.get(&key("depth"), |s| s.parse::<u32>().map_err(|_| format!("'{s}' is not a depth")))
            } else {
                r.missing(&key("depth"));
                None
            };
            let floor = need(r, "floor");
            Some(ProfileKind::Weierstrass {
                alpha: alpha?,
                depth: depth?,
                floor: floor?,
            })
        }
        "degenerate_power" => {
            let power = if r.has(&key("power")) {
                r.get(&key("power"), |s| s.parse::<u32>().map_err(|_| format!("'{s}' is not a power")))
            } else {
                r.missing(&key("power"));
                None
            };
            power.map(|power| ProfileKind::DegeneratePower { power })
        }
        other => {
            r.fail(
                line,
                &key("kind"),
                format!("unknown kind '{other}' (constant, linear, abs_sin, weierstrass, degenerate_power)"),
            );
            return None;
        }
    };
    let case = r.get(&key("case"), |s| {
        CaseTag::parse(s).ok_or_else(|| format!("unknown case '{s}' (Lip, HolderStrict, SmoothWeak, HolderWeak)"))
    });
    let is_weierstrass = kind_name == "weierstrass";
    let alpha = if !is_weierstrass && r.has(&key("alpha")) {
        r.f64(&key("alpha"))
    } else {
        None
    };
    let smoothness = r.get(&key("smoothness"), |s| {
        s.parse::<u32>().map_err(|_| format!("'{s}' is not a smoothness order"))
    });
    Some(ProfileConfig {
        kind: kind?,
        case,
        alpha,
        smoothness,
    })
}

/// Parses and validates an experiment file, collecting every error.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut errors = Vec::new();
    let mut sections = tokenize(text, &mut errors);

    let mut r = Reader::new(&mut sections, "run", &mut errors);
    let mode = if r.has("mode") {
        r.get("mode", |s| {
            RunMode::parse(s).ok_or_else(|| format!("unknown mode '{s}' (solve, verify, converge, selftest)"))
        })
    } else {
        r.missing("mode");
        None
    };
    let is_selftest = mode == Some(RunMode::Selftest);
    let horizon = if is_selftest && !r.has("T") {
        Some(1.0)
    } else {
        r.required_f64("T")
    };
    let ode_tol = r.f64("ode_tol").unwrap_or(1e-10);
    let s = r.f64("s");
    let out = r.raw("out").map(|(_, v)| PathBuf::from(v));
    let workers = r.usize("workers");
    r.finish();

    if is_selftest {
        for (name, keys) in std::mem::take(&mut sections) {
            if !SECTIONS.contains(&name.as_str()) {
                continue;
            }
            if let Some((key, (line, _))) = keys.into_iter().next() {
                errors.push(format!("line {line}: [{name}] {key}: selftest takes no [{name}] block"));
            }
        }
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        return Ok(ExperimentConfig {
            run: RunConfig {
                mode: RunMode::Selftest,
                horizon: horizon.unwrap_or(1.0),
                ode_tol,
                s,
                out,
                workers,
            },
            grid: GridConfig {
                n: 1,
                points: None,
                hbars: Vec::new(),
                period: None,
            },
            a: ProfileConfig::constant(1.0),
            b: ProfileConfig::constant(0.0),
            u0: DataPreset::Zero,
            u1: DataPreset::Zero,
            forcing: ForcingConfig::Zero,
            k_scale: 1.0,
        });
    }

    let mut r = Reader::new(&mut sections, "grid", &mut errors);
    let n = r.usize("n").unwrap_or(1);
    let points = r.usize("N");
    let hbars = if r.has("hbar") {
        r.get("hbar", |s| s.split(',').map(parse_f64).collect::<std::result::Result<Vec<_>, _>>())
    } else {
        r.missing("hbar");
        None
    };
    let period = r.f64("L");
    r.finish();

    let mut r = Reader::new(&mut sections, "a", &mut errors);
    let a = read_profile(&mut r, "");
    r.finish();
    let mut r = Reader::new(&mut sections, "b", &mut errors);
    let b = if r.has("kind") {
        read_profile(&mut r, "")
    } else {
        Some(ProfileConfig::constant(0.0))
    };
    r.finish();

    let mut r = Reader::new(&mut sections, "data", &mut errors);
    let u0 = if r.has("u0") {
        r.get("u0", DataPreset::parse)
    } else {
        r.missing("u0");
        None
    };
    let u1 = r.get("u1", DataPreset::parse).or(Some(DataPreset::Zero));
    r.finish();

    let mut r = Reader::new(&mut sections, "forcing", &mut errors);
    let forcing = match r.raw("kind") {
        None => Some(ForcingConfig::Zero),
        Some((_, k)) if k == "zero" => Some(ForcingConfig::Zero),
        Some((_, k)) if k == "separable" => {
            let shape = if r.has("shape") {
                r.get("shape", DataPreset::parse)
            } else {
                r.missing("shape");
                None
            };
            let g = read_profile(&mut r, "g_");
            match (g, shape) {
                (Some(g), Some(shape)) => Some(ForcingConfig::Separable { g, shape }),
                _ => None,
            }
        }
        Some((line, k)) => {
            r.fail(line, "kind", format!("unknown forcing '{k}' (zero, separable)"));
            None
        }
    };
    r.finish();

    let mut r = Reader::new(&mut sections, "debug", &mut errors);
    let k_scale = r.f64("k_scale").unwrap_or(1.0);
    r.finish();

    let (Some(mode), Some(horizon), Some(hbars), Some(a), Some(b), Some(u0), Some(u1), Some(forcing)) =
        (mode, horizon, hbars, a, b, u0, u1, forcing)
    else {
        return Err(Error::Config(errors));
    };
    let config = ExperimentConfig {
        run: RunConfig {
            mode,
            horizon,
            ode_tol,
            s,
            out,
            workers,
        },
        grid: GridConfig {
            n,
            points,
            hbars,
            period,
        },
        a,
        b,
        u0,
        u1,
        forcing,
        k_scale,
    };
    errors.extend(config.semantic_errors());
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(errors))
    }
}

impl ExperimentConfig {
    fn semantic_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let run = &self.run;
        if !(run.horizon > 0.0) {
            errors.push(format!("[run] T must be positive, got {}", run.horizon));
        }
        if let Some(s) = run.s {
            if !(s > 1.0) {
                errors.push(format!("[run] s must exceed 1, got {s}"));
            }
        }
        if run.workers == Some(0) {
            errors.push("[run] workers must be at least 1".into());
        }
        if !(self.k_scale > 0.0) {
            errors.push(format!("[debug] k_scale must be positive, got {}", self.k_scale));
        }
        if self.grid.n == 0 || self.grid.n > MAX_DIM {
            errors.push(format!("[grid] n must lie in 1..={MAX_DIM}, got {}", self.grid.n));
        }

        for (name, p) in [("a", &self.a), ("b", &self.b)] {
            let case = p.case.map(|c| c.name());
            if p.alpha.is_some() && !matches!(p.case, Some(CaseTag::HolderStrict | CaseTag::HolderWeak)) {
                errors.push(format!(
                    "[{name}] alpha given with case {}; only HolderStrict and HolderWeak take an exponent",
                    case.unwrap_or("(default)")
                ));
            }
            if p.smoothness.is_some() && p.case != Some(CaseTag::SmoothWeak) {
                errors.push(format!(
                    "[{name}] smoothness given with case {}; only SmoothWeak takes a smoothness order",
                    case.unwrap_or("(default)")
                ));
            }
            if let Err(e) = p.build(run.horizon.max(f64::MIN_POSITIVE)) {
                errors.push(format!("[{name}] {e}"));
            }
        }
        if let Some(s) = run.s {
            if let Ok(a) = self.a.build(run.horizon.max(f64::MIN_POSITIVE)) {
                if a.case_tag() == CaseTag::Lip || a.case_tag() == CaseTag::SmoothWeak {
                    errors.push(format!("[run] s = {s} given for case {}, which has no Gevrey index", a.case_tag()));
                }
            }
        }

        match run.mode {
            RunMode::Converge => {
                let period = self.grid.period;
                if period.is_none() {
                    errors.push("[grid] converge requires L".into());
                }
                if self.grid.points.is_some() {
                    errors.push("[grid] converge derives N from L and hbar; remove N".into());
                }
                if self.grid.hbars.len() < 2 {
                    errors.push("[grid] converge requires at least two hbar values".into());
                }
                if self.grid.hbars.windows(2).any(|w| !(w[1] < w[0])) {
                    errors.push("[grid] hbar values must be strictly decreasing".into());
                }
                if let Some(l) = period {
                    for &h in &self.grid.hbars {
                        let ratio = l / h;
                        let n = ratio.round();
                        if !(h > 0.0) || (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 2.0 || n % 2.0 != 0.0 {
                            errors.push(format!("[grid] N=L/hbar not an even integer (L = {l}, hbar = {h})"));
                        }
                    }
                    for (name, d) in self.data_presets() {
                        if let Err(e) = d.band_limited(self.grid.n, l) {
                            errors.push(format!("[{name}] {e}"));
                        }
                    }
                }
            }
            _ => {
                if self.grid.hbars.len() != 1 {
                    errors.push(format!("[grid] {} requires a single hbar", run.mode.name()));
                }
                match self.grid.points {
                    None => errors.push("[grid] missing required key 'N'".into()),
                    Some(points) => {
                        if let Some(&h) = self.grid.hbars.first() {
                            match LatticeGrid::new(self.grid.n.clamp(1, MAX_DIM), points, h) {
                                Ok(grid) => {
                                    if let Some(l) = self.grid.period {
                                        if (l - grid.period()).abs() > 1e-12 * l {
                                            errors.push(format!("[grid] L = {l} but N*hbar = {}", grid.period()));
                                        }
                                    }
                                    for (name, d) in self.data_presets() {
                                        if let Err(e) = d.field(&grid) {
                                            errors.push(format!("[{name}] {e}"));
                                        }
                                    }
                                }
                                Err(e) => errors.push(format!("[grid] {e}")),
                            }
                        }
                    }
                }
            }
        }
        errors
    }

    fn data_presets(&self) -> Vec<(&'static str, &DataPreset)> {
        let mut out = vec![("data", &self.u0), ("data", &self.u1)];
        if let ForcingConfig::Separable { shape, .. } = &self.forcing {
            out.push(("forcing", shape));
        }
        out
    }

    pub fn grid(&self) -> Result<LatticeGrid> {
        let points = self
            .grid
            .points
            .ok_or_else(|| Error::Config(vec!["[grid] missing required key 'N'".into()]))?;
        LatticeGrid::new(self.grid.n, points, self.grid.hbars[0])
    }

    pub fn cauchy_spec(&self) -> Result<CauchySpec> {
        let grid = self.grid()?;
        let t = self.run.horizon;
        let forcing = match &self.forcing {
            ForcingConfig::Zero => Forcing::Zero,
            ForcingConfig::Separable { g, shape } => Forcing::Separable {
                g: g.build(t)?,
                shape: shape.field(&grid)?,
            },
        };
        let a = self.a.build(t)?;
        Ok(CauchySpec {
            grid,
            case: a.case_tag(),
            a,
            b: self.b.build(t)?,
            forcing,
            u0: self.u0.field(&grid)?,
            u1: self.u1.field(&grid)?,
            horizon: t,
            ode_tol: self.run.ode_tol,
            s: self.run.s,
        })
    }

    pub fn continuum_spec(&self) -> Result<ContinuumSpec> {
        let n = self.grid.n;
        let l = self
            .grid
            .period
            .ok_or_else(|| Error::Config(vec!["[grid] converge requires L".into()]))?;
        let t = self.run.horizon;
        let forcing = match &self.forcing {
            ForcingConfig::Zero => ContinuumForcing::Zero,
            ForcingConfig::Separable { g, shape } => ContinuumForcing::Separable {
                g: g.build(t)?,
                shape: shape.band_limited(n, l)?,
            },
        };
        let a = self.a.build(t)?;
        Ok(ContinuumSpec {
            dim: n,
            period: l,
            case: a.case_tag(),
            a,
            b: self.b.build(t)?,
            forcing,
            u0: self.u0.band_limited(n, l)?,
            u1: self.u1.band_limited(n, l)?,
            horizon: t,
            ode_tol: self.run.ode_tol,
            s: self.run.s,
        })
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let run = &self.run;
        let _ = writeln!(s, "[run]\nmode = {}", run.mode.name());
        let _ = writeln!(s, "T = {:?}\node_tol = {:?}", run.horizon, run.ode_tol);
        if let Some(v) = run.s {
            let _ = writeln!(s, "s = {v:?}");
        }
        if let Some(o) = &run.out {
            let _ = writeln!(s, "out = {}", o.display());
        }
        if let Some(w) = run.workers {
            let _ = writeln!(s, "workers = {w}");
        }
        if run.mode == RunMode::Selftest {
            return s;
        }
        let _ = writeln!(s, "\n[grid]\nn = {}", self.grid.n);
        if let Some(p) = self.grid.points {
            let _ = writeln!(s, "N = {p}");
        }
        let hbars: Vec<String> = self.grid.hbars.iter().map(|h| format!("{h:?}")).collect();
        let _ = writeln!(s, "hbar = {}", hbars.join(", "));
        if let Some(l) = self.grid.period {
            let _ = writeln!(s, "L = {l:?}");
        }
        let _ = writeln!(s, "\n[a]");
        render_profile(&mut s, &self.a, "");
        let _ = writeln!(s, "\n[b]");
        render_profile(&mut s, &self.b, "");
        let _ = writeln!(s, "\n[data]\nu0 = {}\nu1 = {}", self.u0.render(), self.u1.render());
        if let ForcingConfig::Separable { g, shape } = &self.forcing {
            let _ = writeln!(s, "\n[forcing]\nkind = separable\nshape = {}", shape.render());
            render_profile(&mut s, g, "g_");
        }
        if self.k_scale != 1.0 {
            let _ = writeln!(s, "\n[debug]\nk_scale = {:?}", self.k_scale);
        }
        s
    }
}

fn render_profile(s: &mut String, p: &ProfileConfig, prefix: &str) {
    let _ = writeln!(s, "{prefix}kind = {}", p.kind.name());
    match &p.kind {
        ProfileKind::Constant { value } => {
            let _ = writeln!(s, "{prefix}value = {value:?}");
        }
        ProfileKind::Linear { intercept, slope } => {
            let _ = writeln!(s, "{prefix}intercept = {intercept:?}\n{prefix}slope = {slope:?}");
        }
        ProfileKind::AbsSin { base, amplitude, omega } => {
            let _ = writeln!(
                s,
                "{prefix}base = {base:?}\n{prefix}amplitude = {amplitude:?}\n{prefix}omega = {omega:?}"
            );
        }
        ProfileKind::Weierstrass { alpha, depth, floor } => {
            let _ = writeln!(s, "{prefix}alpha = {alpha:?}\n{prefix}depth = {depth}\n{prefix}floor = {floor:?}");
        }
        ProfileKind::DegeneratePower { power } => {
            let _ = writeln!(s, "{prefix}power = {power}");
        }
    }
    if let Some(c) = p.case {
        let _ = writeln!(s, "{prefix}case = {}", c.name());
    }
    if let Some(a) = p.alpha {
        let _ = writeln!(s, "{prefix}alpha = {a:?}");
    }
    if let Some(l) = p.smoothness {
        let _ = writeln!(s, "{prefix}smoothness = {l}");
    }
}
