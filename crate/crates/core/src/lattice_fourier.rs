//! Discrete Fourier analysis on the periodic lattice `hbar * Z^n / (N hbar Z)^n`.
//!
//! Grid values are stored row-major over the multi-index `m = (m_1, .., m_n)`
//! with the last axis fastest. The forward transform is the unnormalized DFT
//! and the inverse carries the `1/N^n` factor, so the inverse is the mean over
//! grid frequencies `theta_m = m / N`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Upper limit on the number of lattice points held in one field.
pub const MAX_POINTS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGrid {
    dim: usize,
    points: usize,
    hbar: f64,
}

impl LatticeGrid {
    pub fn new(dim: usize, points: usize, hbar: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and at least 2, got {points}"
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {hbar}")));
        }
        match points.checked_pow(dim as u32) {
            Some(total) if total <= MAX_POINTS => {}
            _ => {
                return Err(Error::InvalidGrid(format!(
                    "{points}^{dim} points exceeds the limit of {MAX_POINTS}"
                )))
            }
        }
        Ok(Self { dim, points, hbar })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn period(&self) -> f64 {
        self.points as f64 * self.hbar
    }

    /// Total number of lattice points, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.points;
            rest /= self.points;
        }
        out
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index[..self.dim]
            .iter()
            .fold(0, |acc, &m| acc * self.points + m % self.points)
    }

    /// Frequency `theta_m = m / N` in `[0, 1)^n`; unused trailing axes are zero.
    pub fn theta(&self, flat: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(flat);
        let mut out = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            out[axis] = m[axis] as f64 / self.points as f64;
        }
        out
    }

    /// Representative of `m` in `(-N/2, N/2]` on every axis.
    pub fn signed_mode(&self, flat: usize) -> [i64; MAX_DIM] {
        let m = self.multi_index(flat);
        let n = self.points as i64;
        let mut out = [0; MAX_DIM];
        for axis in 0..self.dim {
            let k = m[axis] as i64;
            out[axis] = if k > n / 2 { k - n } else { k };
        }
        out
    }

    /// Flat index of the mode congruent to `mode` modulo `N`.
    pub fn index_of_mode(&self, mode: &[i64]) -> usize {
        let n = self.points as i64;
        mode[..self.dim]
            .iter()
            .fold(0, |acc, &m| acc * self.points + m.rem_euclid(n) as usize)
    }

    /// `beta^2` at every grid frequency, in flat order.
    pub fn beta_squared_table(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| beta_squared(&self.theta(k)[..self.dim], self))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: LatticeGrid,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: LatticeGrid, values: Vec<Complex64>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: LatticeGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: LatticeGrid, f: impl Fn(&[usize]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|k| f(&grid.multi_index(k)[..grid.dim()]))
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Squared counting-measure norm `sum_k |u(k)|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: LatticeGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: LatticeGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        check_values(&grid, &coeffs)?;
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Mean of `|u_hat|^2` over the grid frequencies, equal to the lattice energy.
    pub fn mean_sqr(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid.len() as f64
    }
}

fn check_values(grid: &LatticeGrid, values: &[Complex64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::InvalidField(format!(
            "expected {} values, got {}",
            grid.len(),
            values.len()
        )));
    }
    if let Some(k) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidField(format!("non-finite value at index {k}")));
    }
    Ok(())
}

/// Real-valued Fourier multiplier `theta -> sigma(theta)`, 1-periodic in each axis.
#[derive(Clone)]
pub struct Symbol {
    eval: Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
}

impl Symbol {
    pub fn new(eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
        }
    }

    pub fn identity() -> Self {
        Self::new(|_| Complex64::new(1.0, 0.0))
    }

    /// Symbol of the nearest-neighbour lattice Laplacian.
    pub fn lattice_laplacian() -> Self {
        Self::new(|theta| Complex64::new(laplacian_symbol(theta), 0.0))
    }

    /// Symbol of `I - hbar^{-2} L_hbar`, i.e. `1 + beta^2`.
    pub fn bracket_squared(hbar: f64) -> Self {
        Self::new(move |theta| Complex64::new(1.0 - laplacian_symbol(theta) / (hbar * hbar), 0.0))
    }

    pub fn at(&self, theta: &[f64]) -> Complex64 {
        (self.eval)(theta)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Symbol(..)")
    }
}

/// `2 sum_j cos(2 pi theta_j) - 2n`, written as `-4 sum_j sin^2(pi theta_j)`.
pub fn laplacian_symbol(theta: &[f64]) -> f64 {
    -4.0 * theta.iter().map(|t| (PI * t).sin().powi(2)).sum::<f64>()
}

/// `beta^2(theta) = -hbar^{-2} * laplacian_symbol(theta)`.
pub fn beta_squared(theta: &[f64], grid: &LatticeGrid) -> f64 {
    let h = grid.hbar();
    -laplacian_symbol(&theta[..grid.dim()]) / (h * h)
}

pub fn forward_dft(field: &GridField) -> SpectralField {
    let mut data = field.values.clone();
    transform(&field.grid, &mut data, FftDirection::Forward);
    SpectralField {
        grid: field.grid,
        coeffs: data,
    }
}

pub fn inverse_dft(spec: &SpectralField) -> GridField {
    let mut data = spec.coeffs.clone();
    transform(&spec.grid, &mut data, FftDirection::Inverse);
    let scale = 1.0 / spec.grid.len() as f64;
    for z in &mut data {
        *z *= scale;
    }
    GridField {
        grid: spec.grid,
        values: data,
    }
}

fn transform(grid: &LatticeGrid, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.points();
    let fft = FftPlanner::new().plan_fft(n, direction);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = grid.len();
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        for start in 0..total {
            // a line starts where the index along `axis` is zero
            if (start / stride) % n != 0 {
                continue;
            }
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[start + i * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (i, value) in line.iter().enumerate() {
                data[start + i * stride] = *value;
            }
        }
    }
}

/// Periodic 2n-point stencil `sum_j (u(k + hbar v_j) + u(k - hbar v_j)) - 2n u(k)`.
pub fn apply_lattice_laplacian(field: &GridField) -> GridField {
    let grid = field.grid;
    let n = grid.points();
    let dim = grid.dim();
    let u = &field.values;
    let values = (0..grid.len())
        .map(|k| {
            let m = grid.multi_index(k);
            let mut acc = -(2.0 * dim as f64) * u[k];
            for axis in 0..dim {
                let mut up = m;
                let mut down = m;
                up[axis] = (m[axis] + 1) % n;
                down[axis] = (m[axis] + n - 1) % n;
                acc += u[grid.flat_index(&up)] + u[grid.flat_index(&down)];
            }
            acc
        })
        .collect();
    GridField { grid, values }
}

pub fn apply_symbol_op(sigma: &Symbol, field: &GridField) -> Result<GridField> {
    let grid = field.grid;
    let mut spec = forward_dft(field);
    for (k, c) in spec.coeffs.iter_mut().enumerate() {
        let s = sigma.at(&grid.theta(k)[..grid.dim()]);
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::NonFiniteSymbol { index: k });
        }
        *c *= s;
    }
    Ok(inverse_dft(&spec))
}

/// `| sum_k |u(k)|^2 - N^{-n} sum_m |u_hat(theta_m)|^2 |`.
pub fn plancherel_defect(field: &GridField) -> f64 {
    (field.norm_sqr() - forward_dft(field).mean_sqr()).abs()
}
