//! Adaptive Dormand–Prince 5(4) for complex first-order systems, sampled on a
//! prescribed time grid. Steps are clipped so every sample time is hit exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    /// Largest accepted local error estimate, in absolute units.
    pub max_local_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub tol: f64,
    pub h_max: f64,
}

fn norm(y: &[Complex64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrates `y' = f(t, y)` from `times[0]` through every entry of `times`,
/// returning the state at each sample. Local error per step is held below
/// `tol * (1 + |y|)`.
pub fn integrate<F>(
    mut f: F,
    y0: &[Complex64],
    times: &[f64],
    control: StepControl,
) -> Result<(Vec<Vec<Complex64>>, IntegratorStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y0.len();
    let zero = Complex64::new(0.0, 0.0);
    let span = (times[times.len() - 1] - times[0]).abs().max(f64::MIN_POSITIVE);
    let h_min = 1e-14 * span;
    if !(control.h_max >= h_min) {
        return Err(Error::Stiffness {
            t: times[0],
            h: control.h_max,
        });
    }
    let mut stats = IntegratorStats::default();
    let mut out = Vec::with_capacity(times.len());
    out.push(y0.to_vec());

    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![zero; dim]; 7];
    let mut stage = vec![zero; dim];
    let mut y_new = vec![zero; dim];
    let mut t = times[0];
    f(t, &y, &mut k[0]);
    let mut h = control.h_max.min(span);

    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = zero;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    stage[i] = y[i] + step * acc;
                }
                f(t + C[s] * step, &stage, &mut k[s]);
            }
            // stage 7 is evaluated at the fifth-order solution (first-same-as-last)
            y_new.copy_from_slice(&stage);
            let mut err_sq = 0.0;
            for i in 0..dim {
                let mut e = zero;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                err_sq += (step * e).norm_sqr();
            }
            let err = err_sq.sqrt();
            if !err.is_finite() || y_new.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                if step <= h_min {
                    return Err(Error::NonFinite { t });
                }
                h = 0.25 * step;
                stats.rejected += 1;
                continue;
            }
            let scale = control.tol * (1.0 + norm(&y).max(norm(&y_new)));
            let ratio = err / scale;
            if ratio <= 1.0 {
                t = if clipped { target } else { t + step };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                stats.steps += 1;
                stats.max_local_error = stats.max_local_error.max(err);
                let grow = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !clipped {
                    h = (step * grow).min(control.h_max);
                }
            } else {
                stats.rejected += 1;
                h = step * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                if h < h_min {
                    return Err(Error::Stiffness { t, h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let (ys, stats) = integrate(
            |_, y, dy| dy[0] = -y[0],
            &[Complex64::new(1.0, 0.0)],
            &times,
            StepControl { tol: 1e-12, h_max: 0.05 },
        )
        .unwrap();
        assert!((ys[10][0].re - (-1.0f64).exp()).abs() < 1e-11);
        assert!(stats.steps >= 20);
    }

    #[test]
    fn blow_up_is_reported() {
        let times = [0.0, 2.0];
        let r = integrate(
            |_, y, dy| dy[0] = y[0] * y[0],
            &[Complex64::new(1.0, 0.0)],
            &times,
            StepControl { tol: 1e-10, h_max: 0.1 },
        );
        assert!(r.is_err());
    }

    #[test]
    fn step_cap_below_resolution_is_stiff() {
        let r = integrate(
            |_, y, dy| dy[0] = -y[0],
            &[Complex64::new(1.0, 0.0)],
            &[0.0, 1.0],
            StepControl { tol: 1e-10, h_max: 1e-16 },
        );
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }
}
