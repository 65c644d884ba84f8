//! Explicit series solution of
//!
//! ```text
//! y(t) = 1 - (2 lambda / sqrt(pi)) int_0^t y(tau) sqrt(t - tau) dtau
//! ```
//!
//! written as `y = I - sqrt(2/pi) J` with
//!
//! ```text
//! I(t) = sum_n lambda^(2n)   t^(3n)        / (3n)!
//! J(t) = sum_n 2^(m/2) lambda^(2n+1) t^(m/2) / m!!,   m = 3(2n+1)
//! ```
//!
//! The powers of `lambda` are kept explicit (never `lambda^(2/3)`), which is
//! the term-by-term closed form of the Adomian recurrence and is well defined
//! for negative `lambda`.
//!
//! Terms are formed in log domain with the sign carried separately, and
//! summed in ascending order so results are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{log_factorial, log_gamma_half, log_odd_double_factorial};

pub const DEFAULT_TERM_CAP: usize = 10_000;

/// Number of consecutive shrinking terms required before the tolerance
/// test may stop the sum.
const DECREASING_RUN: usize = 3;

/// Scalar inputs shared by the solution, heat and bounds computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub t_max: f64,
    pub h0: f64,
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, t_max: f64, h0: f64, epsilon: f64) -> Result<Self> {
        let p = ModelParams {
            lambda,
            t_max,
            h0,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::domain("lambda must be finite"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::domain(format!("t_max must be > 0, got {}", self.t_max)));
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(Error::domain(format!("h0 must be > 0, got {}", self.h0)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::domain(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            lambda: 1.0,
            t_max: 1.0,
            h0: 1.0,
            epsilon: 0.5,
        }
    }
}

/// Result of a truncated series sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesEvaluation {
    pub value: f64,
    pub terms_used: usize,
    /// Magnitude of the last term added; a proxy for the truncation error.
    pub last_term_magnitude: f64,
}

impl SeriesEvaluation {
    fn exact(value: f64) -> Self {
        SeriesEvaluation {
            value,
            terms_used: 1,
            last_term_magnitude: 0.0,
        }
    }
}

/// Truncation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub tol: f64,
    pub term_cap: usize,
}

impl SeriesOptions {
    pub fn new(tol: f64) -> Self {
        SeriesOptions {
            tol,
            term_cap: DEFAULT_TERM_CAP,
        }
    }

    pub fn with_term_cap(mut self, cap: usize) -> Self {
        self.term_cap = cap;
        self
    }

    fn halved(self) -> Self {
        SeriesOptions {
            tol: 0.5 * self.tol,
            ..self
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::domain(format!("tolerance must be > 0, got {}", self.tol)));
        }
        if self.term_cap == 0 {
            return Err(Error::domain("term cap must be at least 1"));
        }
        Ok(())
    }
}

impl From<f64> for SeriesOptions {
    fn from(tol: f64) -> Self {
        SeriesOptions::new(tol)
    }
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions::new(1e-10)
    }
}

/// One series term as `sign * exp(log_mag)`; `None` marks a term that is
/// identically zero (e.g. a differentiated constant).
type Term = Option<(f64, f64)>;

/// Sums terms in ascending `n` until a term is below
/// `tol * max(1, |partial|)` after at least [`DECREASING_RUN`] consecutive
/// shrinking magnitudes.
fn sum_terms<F>(opts: &SeriesOptions, lambda: f64, t: f64, mut term: F) -> Result<SeriesEvaluation>
where
    F: FnMut(usize) -> Term,
{
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    let mut run = 0;
    for n in 0..opts.term_cap {
        let Some((sign, log_mag)) = term(n) else {
            continue;
        };
        let mag = log_mag.exp();
        sum += sign * mag;
        match prev {
            Some(p) if mag < p || mag == 0.0 => run += 1,
            Some(_) => run = 0,
            None => {}
        }
        prev = Some(mag);
        if run >= DECREASING_RUN && mag <= opts.tol * sum.abs().max(1.0) {
            return Ok(SeriesEvaluation {
                value: sum,
                terms_used: n + 1,
                last_term_magnitude: mag,
            });
        }
    }
    Err(Error::TermCap {
        cap: opts.term_cap,
        lambda,
        t,
    })
}

/// `e * ln(base)` with the convention `0 * ln(0) = 0`.
fn scaled_log(exponent: f64, log_base: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else {
        exponent * log_base
    }
}

/// Falling factorial `e (e-1) ... (e-k+1)` for `e = twice_e / 2`, returned
/// as `(sign, ln|value|)`, or `None` when it vanishes.
fn falling_factorial(twice_e: i64, k: u32) -> Term {
    let mut sign = 1.0;
    let mut log = 0.0;
    for j in 0..k as i64 {
        let f = (twice_e - 2 * j) as f64 * 0.5;
        if f == 0.0 {
            return None;
        }
        if f < 0.0 {
            sign = -sign;
        }
        log += f.abs().ln();
    }
    Some((sign, log))
}

/// Checks shared by every entry point; derivatives of order >= 2 are
/// singular at the origin.
fn check_args(t: f64, order: u32, opts: &SeriesOptions) -> Result<()> {
    opts.check()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be finite and >= 0, got {t}")));
    }
    if order > 3 {
        return Err(Error::domain(format!("derivative order must be 0..=3, got {order}")));
    }
    if order >= 2 && t == 0.0 {
        return Err(Error::domain(format!(
            "derivative of order {order} is singular at t = 0"
        )));
    }
    Ok(())
}

/// `d^order/dt^order I(t)`.
pub fn eval_i_derivative(lambda: f64, t: f64, order: u32, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    check_args(t, order, opts)?;
    if lambda == 0.0 || (t == 0.0 && order == 0) {
        // only the constant term survives
        return Ok(SeriesEvaluation::exact(if order == 0 { 1.0 } else { 0.0 }));
    }
    let ln_lam = lambda.abs().ln();
    let ln_t = t.ln();
    sum_terms(opts, lambda, t, |n| {
        let e = 3 * n as i64;
        let (sign, ff) = falling_factorial(2 * e, order)?;
        let log = scaled_log(2.0 * n as f64, ln_lam) + scaled_log((e - order as i64) as f64, ln_t)
            - log_factorial(e as u64)
            + ff;
        Some((sign, log))
    })
}

/// `d^order/dt^order J(t)`.
pub fn eval_j_derivative(lambda: f64, t: f64, order: u32, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    check_args(t, order, opts)?;
    if lambda == 0.0 || t == 0.0 {
        // every term carries lambda^(2n+1) and a positive power of t
        return Ok(SeriesEvaluation::exact(0.0));
    }
    let ln_lam = lambda.abs().ln();
    let ln_t = t.ln();
    let lam_sign = lambda.signum();
    sum_terms(opts, lambda, t, |n| {
        let m = 3 * (2 * n as i64 + 1);
        let (sign, ff) = falling_factorial(m, order)?;
        let half_m = m as f64 * 0.5;
        let log =
            half_m * std::f64::consts::LN_2 + (2 * n + 1) as f64 * ln_lam + scaled_log(half_m - order as f64, ln_t)
                - log_odd_double_factorial(m as u64)
                + ff;
        Some((sign * lam_sign, log))
    })
}

pub fn eval_i(lambda: f64, t: f64, tol: f64) -> Result<SeriesEvaluation> {
    eval_i_derivative(lambda, t, 0, &SeriesOptions::new(tol))
}

pub fn eval_j(lambda: f64, t: f64, tol: f64) -> Result<SeriesEvaluation> {
    eval_j_derivative(lambda, t, 0, &SeriesOptions::new(tol))
}

/// `y^(order)(t) = I^(order) - sqrt(2/pi) J^(order)`, each part summed at
/// half the tolerance.
pub fn eval_y_with(lambda: f64, t: f64, order: u32, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    let half = opts.halved();
    let i = eval_i_derivative(lambda, t, order, &half)?;
    let j = eval_j_derivative(lambda, t, order, &half)?;
    Ok(combine(&i, &j))
}

/// Combines already-evaluated parts into `I - sqrt(2/pi) J`.
pub fn combine(i: &SeriesEvaluation, j: &SeriesEvaluation) -> SeriesEvaluation {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    SeriesEvaluation {
        value: i.value - c * j.value,
        terms_used: i.terms_used + j.terms_used,
        last_term_magnitude: i.last_term_magnitude.max(c * j.last_term_magnitude),
    }
}

pub fn eval_y(lambda: f64, t: f64, tol: f64) -> Result<SeriesEvaluation> {
    eval_y_with(lambda, t, 0, &SeriesOptions::new(tol))
}

/// Term-wise derivative of `y`, `order` in `1..=3`.
pub fn eval_y_derivative(lambda: f64, t: f64, order: u32, tol: f64) -> Result<SeriesEvaluation> {
    if order == 0 {
        return Err(Error::domain("derivative order must be 1, 2 or 3"));
    }
    eval_y_with(lambda, t, order, &SeriesOptions::new(tol))
}

/// Single-sum form `sum_n (-lambda)^n t^((3n+s)/2) / Gamma((3n+s)/2 + 1)`.
///
/// `s = 0` is `y` itself, `s = 1` is its Abel transform
/// `(1/sqrt(pi)) int_0^t y(tau) / sqrt(t - tau) dtau`, and `s = -1` is the
/// time derivative of that transform.
fn abel_family(lambda: f64, t: f64, shift: i64, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    opts.check()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be finite and >= 0, got {t}")));
    }
    if shift < 0 && t == 0.0 {
        return Err(Error::domain("rate of the Abel transform is singular at t = 0"));
    }
    if t == 0.0 {
        return Ok(SeriesEvaluation::exact(if shift == 0 { 1.0 } else { 0.0 }));
    }
    let ln_lam = lambda.abs().ln();
    let ln_t = t.ln();
    let base_sign = -lambda.signum();
    if lambda == 0.0 {
        let e = shift as f64 * 0.5;
        let v = (scaled_log(e, ln_t) - log_gamma_half((shift + 2) as u64)).exp();
        return Ok(SeriesEvaluation::exact(v));
    }
    sum_terms(opts, lambda, t, |n| {
        let k = 3 * n as i64 + shift;
        let sign = if n % 2 == 0 { 1.0 } else { base_sign };
        let log = scaled_log(n as f64, ln_lam) + scaled_log(k as f64 * 0.5, ln_t) - log_gamma_half((k + 2) as u64);
        Some((sign, log))
    })
}

/// `y(t)` from the single-sum form; an independent arrangement of the same
/// series used for cross-checks.
pub fn eval_y_single_sum(lambda: f64, t: f64, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    abel_family(lambda, t, 0, opts)
}

/// `(1/sqrt(pi)) int_0^t y(tau) / sqrt(t - tau) dtau`, integrated term-wise.
pub fn eval_abel_transform(lambda: f64, t: f64, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    abel_family(lambda, t, 1, opts)
}

/// Time derivative of [`eval_abel_transform`]; behaves like
/// `1/sqrt(pi t)` near the origin.
pub fn eval_abel_transform_rate(lambda: f64, t: f64, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    abel_family(lambda, t, -1, opts)
}
