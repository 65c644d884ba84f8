//! Product integration for the weakly singular kernels `sqrt(s)` and
//! `1/sqrt(s)`, a marching solver for the Volterra equation, its residual,
//! and the Adomian recurrence.
//!
//! The integrand is interpolated piecewise linearly on a uniform grid and
//! multiplied by the kernel, which is integrated exactly on each interval.
//! The singularity of `1/sqrt(t - tau)` at `tau = t` is therefore never
//! sampled.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform samples `values[i] ~ f(i * dt)` on `[0, dt * (len - 1)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::domain(format!("grid spacing must be > 0, got {dt}")));
        }
        if values.is_empty() {
            return Err(Error::domain("grid function needs at least one sample"));
        }
        Ok(GridFunction { dt, values })
    }

    /// Samples `f` at `steps + 1` equispaced points of `[0, t_max]`.
    pub fn sample<F, E>(t_max: f64, steps: usize, mut f: F) -> std::result::Result<Self, E>
    where
        F: FnMut(f64) -> std::result::Result<f64, E>,
    {
        let dt = t_max / steps as f64;
        let values = (0..=steps)
            .map(|i| f(i as f64 * dt))
            .collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(GridFunction { dt, values })
    }

    pub fn constant(t_max: f64, steps: usize, c: f64) -> Self {
        GridFunction {
            dt: t_max / steps as f64,
            values: vec![c; steps + 1],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.t(i))
    }

    /// Largest absolute sample.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise map preserving the grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            dt: self.dt,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Sup-norm of the difference; the grids must match.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if self.len() != other.len() || self.dt != other.dt {
            return Err(Error::domain("grid functions live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Convolution kernels `k(s) = s^alpha` supported by the moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `sqrt(t - tau)`
    Sqrt,
    /// `1 / sqrt(t - tau)`
    InvSqrt,
}

impl Kernel {
    pub fn exponent(self) -> f64 {
        match self {
            Kernel::Sqrt => 0.5,
            Kernel::InvSqrt => -0.5,
        }
    }

    /// `int_0^t k(s) ds`
    pub fn integral(self, t: f64) -> f64 {
        let p = self.exponent() + 1.0;
        t.powf(p) / p
    }
}

/// Exact kernel-times-hat-function integrals on a uniform grid.
///
/// For the interval whose far end lies `m` steps behind the evaluation
/// point, `far[m]` weights the older node and `near[m]` the newer one, both
/// already scaled by `dt^(alpha + 1)`.
#[derive(Debug, Clone)]
pub struct KernelMoments {
    pub kernel: Kernel,
    pub dt: f64,
    pub far: Vec<f64>,
    pub near: Vec<f64>,
}

impl KernelMoments {
    /// Moments for grids of up to `intervals` intervals.
    pub fn new(kernel: Kernel, dt: f64, intervals: usize) -> Self {
        let alpha = kernel.exponent();
        let scale = dt.powf(alpha + 1.0);
        let (far, near) = (0..intervals)
            .map(|m| {
                let (a, b) = unit_moments(alpha, m);
                (a * scale, b * scale)
            })
            .unzip();
        KernelMoments { kernel, dt, far, near }
    }

    /// `int_0^{t_i} f(tau) k(t_i - tau) dtau` with `f` piecewise linear.
    pub fn convolve(&self, values: &[f64], i: usize) -> Result<f64> {
        if i >= values.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: values.len(),
            });
        }
        if i > self.far.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.far.len() + 1,
            });
        }
        if i == 0 {
            return Ok(0.0);
        }
        Ok(self.history(values, i) + self.near[0] * values[i])
    }

    /// The part of [`KernelMoments::convolve`] that does not involve
    /// `values[i]`.
    fn history(&self, values: &[f64], i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut acc = self.far[0] * values[i - 1];
        for j in 0..i - 1 {
            let m = i - j - 1;
            acc += self.far[m] * values[j] + self.near[m] * values[j + 1];
        }
        acc
    }

    /// Convolution at every grid point.
    pub fn convolve_all(&self, values: &[f64]) -> Result<Vec<f64>> {
        (0..values.len()).map(|i| self.convolve(values, i)).collect()
    }
}

/// Threshold above which the moments come from the binomial expansion in
/// `1/m` rather than differences of powers.
const BINOMIAL_FROM: usize = 16;

/// `(int_0^1 (m+u)^alpha u du, int_0^1 (m+u)^alpha (1-u) du)`.
fn unit_moments(alpha: f64, m: usize) -> (f64, f64) {
    if m < BINOMIAL_FROM {
        let mf = m as f64;
        let d1 = power_difference(alpha + 1.0, mf);
        let d2 = power_difference(alpha + 2.0, mf);
        (d2 - mf * d1, (mf + 1.0) * d1 - d2)
    } else {
        // (m+u)^alpha = m^alpha sum_k C(alpha, k) (u/m)^k
        let mf = m as f64;
        let inv = 1.0 / mf;
        let mut coeff = 1.0;
        let mut scale = 1.0;
        let mut far = 0.0;
        let mut near = 0.0;
        for k in 0..60 {
            let kf = k as f64;
            if k > 0 {
                coeff *= (alpha - kf + 1.0) / kf;
                scale *= inv;
            }
            let c = coeff * scale;
            let df = c / (kf + 2.0);
            far += df;
            near += c / ((kf + 1.0) * (kf + 2.0));
            if df.abs() < 1e-18 * far.abs() {
                break;
            }
        }
        let base = mf.powf(alpha);
        (base * far, base * near)
    }
}

/// `((m+1)^p - m^p) / p` without cancellation.
fn power_difference(p: f64, m: f64) -> f64 {
    if m == 0.0 {
        1.0 / p
    } else {
        m.powf(p) * (p * (1.0 / m).ln_1p()).exp_m1() / p
    }
}

fn convolve_with(kernel: Kernel, f: &GridFunction, t_index: usize) -> Result<f64> {
    if t_index >= f.len() {
        return Err(Error::IndexOutOfRange {
            index: t_index,
            len: f.len(),
        });
    }
    KernelMoments::new(kernel, f.dt, t_index).convolve(&f.values, t_index)
}

/// `int_0^t f(tau) sqrt(t - tau) dtau` at `t = t_index * dt`.
pub fn convolve_sqrt(f: &GridFunction, t_index: usize) -> Result<f64> {
    convolve_with(Kernel::Sqrt, f, t_index)
}

/// `int_0^t f(tau) / sqrt(t - tau) dtau` at `t = t_index * dt`.
pub fn convolve_inv_sqrt(f: &GridFunction, t_index: usize) -> Result<f64> {
    convolve_with(Kernel::InvSqrt, f, t_index)
}

/// Smallest admissible magnitude of the per-step divisor.
pub const MIN_DIVISOR: f64 = 1e-14;

/// Marches `y(t) = 1 - (2 lambda / sqrt(pi)) int_0^t y(tau) sqrt(t - tau) dtau`
/// over `steps` uniform intervals of `[0, t_max]`.
pub fn solve_volterra(lambda: f64, t_max: f64, steps: usize) -> Result<GridFunction> {
    if steps < 2 {
        return Err(Error::domain(format!("need at least 2 steps, got {steps}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::domain(format!("t_max must be > 0, got {t_max}")));
    }
    if !lambda.is_finite() {
        return Err(Error::domain("lambda must be finite"));
    }
    let dt = t_max / steps as f64;
    let moments = KernelMoments::new(Kernel::Sqrt, dt, steps);
    let c = 2.0 * lambda / PI.sqrt();
    let divisor = 1.0 + c * moments.near[0];
    let mut y = vec![0.0; steps + 1];
    y[0] = 1.0;
    for i in 1..=steps {
        if divisor.abs() < MIN_DIVISOR {
            return Err(Error::DivisorUnderflow { step: i, divisor });
        }
        y[i] = (1.0 - c * moments.history(&y, i)) / divisor;
    }
    Ok(GridFunction { dt, values: y })
}

/// `phi(t) = y(t) - 1 + (2 lambda / sqrt(pi)) int_0^t y(tau) sqrt(t - tau) dtau`
/// on the grid of `y`. Vanishes for an exact solution.
pub fn volterra_residual(y: &GridFunction, lambda: f64) -> GridFunction {
    let moments = KernelMoments::new(Kernel::Sqrt, y.dt, y.len() - 1);
    let c = 2.0 * lambda / PI.sqrt();
    let values = (0..y.len())
        .map(|i| {
            let conv = moments.convolve(&y.values, i).expect("index within grid");
            y.values[i] - 1.0 + c * conv
        })
        .collect();
    GridFunction { dt: y.dt, values }
}

/// First `n_terms` Adomian terms `y_0 = 1`,
/// `y_n = -(2 lambda / sqrt(pi)) int_0^t y_{n-1}(tau) sqrt(t - tau) dtau`.
pub fn adomian_terms(lambda: f64, t_max: f64, steps: usize, n_terms: usize) -> Result<Vec<GridFunction>> {
    if n_terms == 0 {
        return Err(Error::domain("need at least one Adomian term"));
    }
    if steps == 0 || !(t_max > 0.0) {
        return Err(Error::domain("need steps >= 1 and t_max > 0"));
    }
    let dt = t_max / steps as f64;
    let moments = KernelMoments::new(Kernel::Sqrt, dt, steps);
    let c = -2.0 * lambda / PI.sqrt();
    let mut terms = vec![GridFunction::constant(t_max, steps, 1.0)];
    for _ in 1..n_terms {
        let prev = terms.last().expect("nonempty");
        let next = moments.convolve_all(&prev.values)?.into_iter().map(|v| c * v).collect();
        terms.push(GridFunction { dt, values: next });
    }
    Ok(terms)
}

/// Running sums `y_0`, `y_0 + y_1`, ... of the Adomian terms.
pub fn adomian_partial_sums(terms: &[GridFunction]) -> Vec<GridFunction> {
    let mut out: Vec<GridFunction> = Vec::with_capacity(terms.len());
    for term in terms {
        let next = match out.last() {
            None => term.clone(),
            Some(acc) => GridFunction {
                dt: acc.dt,
                values: acc.values.iter().zip(&term.values).map(|(a, b)| a + b).collect(),
            },
        };
        out.push(next);
    }
    out
}
