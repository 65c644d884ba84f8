//! Nonclassical heat problem on the half-line
//!
//! ```text
//! u_t - u_xx = -lambda int_0^t u_x(0, tau) dtau,   x > 0, t > 0
//! u(0, t) = 0,   u(x, 0) = h0
//! ```
//!
//! with solution
//!
//! ```text
//! u(x, t) = h0 erf(x / (2 sqrt t)) - lambda int_0^t erf(x / (2 sqrt(t - tau))) U(tau) dtau
//! U(t)    = (h0 / sqrt(pi)) int_0^t g(tau) / sqrt(t - tau) dtau
//! ```
//!
//! where `g` solves the Volterra equation. `U` is the accumulated boundary
//! flux, `U' = u_x(0, .)`.
//!
//! Two routes to `U` exist: [`eval_accumulated_flux`] applies product
//! integration to `g` sampled on a grid, and [`HeatProblem`] integrates the
//! series of `g` term by term. The temperature uses the second route so that
//! its finite-difference defect is not swamped by quadrature error.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_from_origin, simpson, GaussLegendre};
use crate::series::{eval_abel_transform, eval_abel_transform_rate, eval_y_with, SeriesOptions};
use crate::specfun::erf;
use crate::volterra::{GridFunction, Kernel, KernelMoments};

/// Panels on `tau in [0, t/2]` (variable `r = sqrt(tau)`).
const EARLY_PANELS: usize = 4;
/// Geometric refinement levels on `t - tau in [0, t/2]` (variable `q = sqrt(t - tau)`).
const LATE_LEVELS: u32 = 12;
const QUAD_PANELS: usize = 4;

/// One evaluated point of the temperature field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatSample {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub flux0: Option<f64>,
    pub residual: Option<f64>,
}

/// `U` on a uniform grid of `[0, t_max]` by product integration of the
/// sampled series solution. `U(0) = 0`.
pub fn eval_accumulated_flux(
    lambda: f64,
    h0: f64,
    t_max: f64,
    steps: usize,
    opts: impl Into<SeriesOptions>,
) -> Result<GridFunction> {
    check_h0(h0)?;
    if steps < 2 || !(t_max > 0.0) {
        return Err(Error::domain("need steps >= 2 and t_max > 0"));
    }
    let opts: SeriesOptions = opts.into();
    let g = GridFunction::sample(t_max, steps, |t| eval_y_with(lambda, t, 0, &opts).map(|e| e.value))?;
    let moments = KernelMoments::new(Kernel::InvSqrt, g.dt, steps);
    let scale = h0 / PI.sqrt();
    let values = moments
        .convolve_all(&g.values)?
        .into_iter()
        .map(|v| scale * v)
        .collect();
    Ok(GridFunction { dt: g.dt, values })
}

/// Boundary flux `u_x(0, t) = h0 / sqrt(pi t) - h0 lambda int_0^t g`, the
/// integral by composite Simpson on `steps` intervals.
pub fn eval_flux0(lambda: f64, h0: f64, t: f64, steps: usize, opts: impl Into<SeriesOptions>) -> Result<f64> {
    check_h0(h0)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("flux needs t > 0, got {t}")));
    }
    if steps < 2 {
        return Err(Error::domain("need steps >= 2"));
    }
    let opts: SeriesOptions = opts.into();
    let g = GridFunction::sample(t, steps, |s| eval_y_with(lambda, s, 0, &opts).map(|e| e.value))?;
    Ok(h0 / (PI * t).sqrt() - h0 * lambda * simpson(&g.values, g.dt))
}

fn check_h0(h0: f64) -> Result<()> {
    if h0 > 0.0 && h0.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("h0 must be > 0, got {h0}")))
    }
}

/// Solution of the heat problem for one `(lambda, h0)`.
#[derive(Debug, Clone, Copy)]
pub struct HeatProblem {
    pub lambda: f64,
    pub h0: f64,
    opts: SeriesOptions,
}

impl HeatProblem {
    pub fn new(lambda: f64, h0: f64, opts: impl Into<SeriesOptions>) -> Result<Self> {
        Self::with_options(lambda, h0, opts.into())
    }

    pub fn with_options(lambda: f64, h0: f64, opts: SeriesOptions) -> Result<Self> {
        check_h0(h0)?;
        if !lambda.is_finite() {
            return Err(Error::domain("lambda must be finite"));
        }
        Ok(HeatProblem { lambda, h0, opts })
    }

    /// `U(t)` from the term-wise Abel transform of the series.
    pub fn accumulated_flux(&self, t: f64) -> Result<f64> {
        Ok(self.h0 * eval_abel_transform(self.lambda, t, &self.opts)?.value)
    }

    /// `u_x(0, t) = U'(t)` from the term-wise series.
    pub fn flux0(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("flux needs t > 0, got {t}")));
        }
        Ok(self.h0 * eval_abel_transform_rate(self.lambda, t, &self.opts)?.value)
    }

    /// Right side of the PDE, `-lambda int_0^t u_x(0, tau) dtau`.
    ///
    /// The `1/sqrt(tau)` part of the flux is integrated in closed form and
    /// the rest is rewritten as `int_0^t g(s) (t - s) ds`.
    pub fn memory_term(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("t must be >= 0, got {t}")));
        }
        let lam = self.lambda;
        let moment = integrate_from_origin(
            |s| Ok::<_, Error>(eval_y_with(lam, s, 0, &self.opts)?.value * (t - s)),
            t,
            QUAD_PANELS,
        )?;
        let integrated_flux = 2.0 * self.h0 * t.sqrt() / PI.sqrt() - self.h0 * lam * moment;
        Ok(-lam * integrated_flux)
    }

    /// Precomputes the time-`t` quadrature so many `x` can be evaluated
    /// cheaply.
    pub fn slice(&self, t: f64) -> Result<HeatSlice> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("temperature needs t > 0, got {t}")));
        }
        let rule = GaussLegendre::standard();
        let half = (0.5 * t).sqrt();
        let mut lags = Vec::new();
        let mut weights = Vec::new();

        // tau = r^2 on [0, t/2]: U(r^2) is a power series in r
        let h = half / EARLY_PANELS as f64;
        for p in 0..EARLY_PANELS {
            let lo = p as f64 * h;
            for (r, w) in rule.on_interval(lo, lo + h) {
                let tau = r * r;
                lags.push(t - tau);
                weights.push(2.0 * r * w * self.accumulated_flux(tau)?);
            }
        }
        // t - tau = q^2 on [0, t/2], panels halving toward q = 0 where
        // erf(x / 2q) switches on at q ~ x
        let mut edges: Vec<f64> = (0..=LATE_LEVELS).map(|k| half * 0.5f64.powi(k as i32)).collect();
        edges.push(0.0);
        for pair in edges.windows(2) {
            let (hi, lo) = (pair[0], pair[1]);
            for (q, w) in rule.on_interval(lo, hi) {
                let lag = q * q;
                lags.push(lag);
                weights.push(2.0 * q * w * self.accumulated_flux(t - lag)?);
            }
        }
        Ok(HeatSlice {
            t,
            lambda: self.lambda,
            h0: self.h0,
            lags,
            weights,
        })
    }

    pub fn u(&self, x: f64, t: f64) -> Result<f64> {
        self.slice(t)?.u(x)
    }

    /// `u_t - u_xx + lambda int_0^t u_x(0, .)` with centered differences:
    /// two-point in `t`, three-point in `x`.
    pub fn pde_residual(&self, x: f64, t: f64, dx: f64, dt_fd: f64) -> Result<f64> {
        if !(dx > 0.0 && dt_fd > 0.0) {
            return Err(Error::domain("finite-difference steps must be > 0"));
        }
        if !(x - dx > 0.0) || !(t - dt_fd > 0.0) {
            return Err(Error::domain(format!(
                "stencil leaves the domain at (x, t) = ({x}, {t})"
            )));
        }
        let now = self.slice(t)?;
        let before = self.slice(t - dt_fd)?;
        let after = self.slice(t + dt_fd)?;
        let u_t = (after.u(x)? - before.u(x)?) / (2.0 * dt_fd);
        let u_xx = (now.u(x + dx)? - 2.0 * now.u(x)? + now.u(x - dx)?) / (dx * dx);
        Ok(u_t - u_xx - self.memory_term(t)?)
    }

    pub fn sample(&self, x: f64, t: f64) -> Result<HeatSample> {
        let u = self.u(x, t)?;
        let flux0 = if x == 0.0 { Some(self.flux0(t)?) } else { None };
        Ok(HeatSample {
            x,
            t,
            u,
            flux0,
            residual: None,
        })
    }
}

/// Quadrature for `u(., t)` at one fixed time.
#[derive(Debug, Clone)]
pub struct HeatSlice {
    pub t: f64,
    lambda: f64,
    h0: f64,
    /// `t - tau` at each node
    lags: Vec<f64>,
    /// Gauss weight times Jacobian times `U(tau)`
    weights: Vec<f64>,
}

impl HeatSlice {
    pub fn u(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("x must be >= 0, got {x}")));
        }
        if x.is_infinite() {
            return Ok(self.far_field());
        }
        let mut acc = 0.0;
        for (&lag, &w) in self.lags.iter().zip(&self.weights) {
            acc += w * erf(x / (2.0 * lag.sqrt()));
        }
        Ok(self.h0 * erf(x / (2.0 * self.t.sqrt())) - self.lambda * acc)
    }

    /// `lim_{x -> inf} u(x, t) = h0 - lambda int_0^t U`.
    pub fn far_field(&self) -> f64 {
        self.h0 - self.lambda * self.weights.iter().sum::<f64>()
    }
}
