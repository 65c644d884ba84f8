//! Numerical verification that the series solution of the Volterra equation
//! solves the singular third-order problem
//!
//! ```text
//! y'''(t) - lambda^2 y(t) = c lambda t^(-3/2),   t > 0
//! y(0) = 1,  y'(0) = 0,  y''(1) = -lambda/sqrt(pi) + lambda^2 int_0^1 y
//! ```
//!
//! and the first- and second-derivative identities obtained by integrating
//! it. Two values of the forcing constant `c` circulate (`1/(2 sqrt(pi))`
//! and `1/sqrt(pi)`); [`Forcing`] selects which one a residual is measured
//! against. Differentiating the second-derivative identity gives
//! `1/(2 sqrt(pi))`, and that is the one the solution satisfies.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_from_origin, simpson};
use crate::series::{eval_y_with, ModelParams, SeriesOptions};
use crate::volterra::{volterra_residual, GridFunction};

/// Forcing constant of the third-order equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Forcing {
    /// `lambda / (2 sqrt(pi)) * t^(-3/2)`
    #[default]
    HalfOverSqrtPi,
    /// `lambda / sqrt(pi) * t^(-3/2)`
    OverSqrtPi,
}

impl Forcing {
    pub fn coefficient(self, lambda: f64) -> f64 {
        match self {
            Forcing::HalfOverSqrtPi => lambda / (2.0 * PI.sqrt()),
            Forcing::OverSqrtPi => lambda / PI.sqrt(),
        }
    }
}

/// Offset used to probe the conditions at the singular point.
pub const PROBE_OFFSET: f64 = 1e-6;

/// Offsets for extrapolating the regular part of `y''` to the origin.
pub const EXTRAPOLATION_OFFSETS: [f64; 3] = [1e-4, 1e-6, 1e-8];

/// Panels of the 20-point Gauss rule used for `int_0^t` of the solution.
const QUAD_PANELS: usize = 4;

/// `y'''(t) - lambda^2 y(t) - c lambda t^(-3/2)`.
pub fn ode_residual(lambda: f64, t: f64, opts: impl Into<SeriesOptions>, forcing: Forcing) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("ODE residual needs t > 0, got {t}")));
    }
    let opts: SeriesOptions = opts.into();
    ode_residual_with(lambda, t, &opts, forcing)
}

fn ode_residual_with(lambda: f64, t: f64, opts: &SeriesOptions, forcing: Forcing) -> Result<f64> {
    let y = eval_y_with(lambda, t, 0, opts)?.value;
    let y3 = eval_y_with(lambda, t, 3, opts)?.value;
    Ok(y3 - lambda * lambda * y - forcing.coefficient(lambda) * t.powf(-1.5))
}

/// Errors in the conditions at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialConditionErrors {
    /// `|y(0) - 1|`
    pub y0: f64,
    /// `|y'(PROBE_OFFSET)|`
    pub dy0: f64,
    /// `|lim_{t->0} (y''(t) + lambda / sqrt(pi t))|`, extrapolated.
    pub d2y0: f64,
    /// Whether the regular part shrank monotonically over
    /// [`EXTRAPOLATION_OFFSETS`].
    pub d2y0_trend_ok: bool,
}

/// Regular part of the second derivative, `y''(t) + lambda / sqrt(pi t)`.
fn regular_second_derivative(lambda: f64, t: f64, opts: &SeriesOptions) -> Result<f64> {
    Ok(eval_y_with(lambda, t, 2, opts)?.value + lambda / (PI * t).sqrt())
}

/// Conditions at the singular point `t = 0`.
///
/// `y''` itself blows up like `t^(-1/2)`, so `y''(0) = 0` is read as the
/// vanishing of its regular part; that part behaves like `lambda^2 t` and is
/// extrapolated linearly from the two smallest offsets.
pub fn check_initial_conditions(lambda: f64, opts: impl Into<SeriesOptions>) -> Result<InitialConditionErrors> {
    let opts: SeriesOptions = opts.into();
    let y0 = (eval_y_with(lambda, 0.0, 0, &opts)?.value - 1.0).abs();
    let dy0 = eval_y_with(lambda, PROBE_OFFSET, 1, &opts)?.value.abs();

    let mut reg = [0.0; 3];
    for (r, &eps) in reg.iter_mut().zip(&EXTRAPOLATION_OFFSETS) {
        *r = regular_second_derivative(lambda, eps, &opts)?;
    }
    let trend_ok = reg[2].abs() <= reg[1].abs() && reg[1].abs() <= reg[0].abs();
    let (e1, e2) = (EXTRAPOLATION_OFFSETS[1], EXTRAPOLATION_OFFSETS[2]);
    let at_zero = (e1 * reg[2] - e2 * reg[1]) / (e1 - e2);
    Ok(InitialConditionErrors {
        y0,
        dy0,
        d2y0: at_zero.abs(),
        d2y0_trend_ok: trend_ok,
    })
}

/// `|y''(1) + lambda/sqrt(pi) - lambda^2 Q|`, `Q` the composite Simpson
/// value of `int_0^1 y` on `steps` intervals.
pub fn check_integral_bc(lambda: f64, steps: usize, opts: impl Into<SeriesOptions>) -> Result<f64> {
    if steps < 100 {
        return Err(Error::domain(format!(
            "integral condition check needs steps >= 100, got {steps}"
        )));
    }
    let opts: SeriesOptions = opts.into();
    let y = GridFunction::sample(1.0, steps, |t| eval_y_with(lambda, t, 0, &opts).map(|e| e.value))?;
    let q = simpson(&y.values, y.dt);
    let y2 = eval_y_with(lambda, 1.0, 2, &opts)?.value;
    Ok((y2 + lambda / PI.sqrt() - lambda * lambda * q).abs())
}

/// Sup-norm discrepancies of the two derivative identities
///
/// ```text
/// y'(t)  = lambda^2 int_0^t y(tau)(t - tau) dtau - 2 lambda sqrt(t) / sqrt(pi)
/// y''(t) = -lambda / sqrt(pi t) + lambda^2 int_0^t y(tau) dtau
/// ```
///
/// over `ts` (all strictly positive). Left sides come from the
/// differentiated series, right sides from quadrature of `y`.
pub fn check_derivative_identities(lambda: f64, ts: &[f64], opts: impl Into<SeriesOptions>) -> Result<(f64, f64)> {
    let opts: SeriesOptions = opts.into();
    let y = |tau: f64| eval_y_with(lambda, tau, 0, &opts).map(|e| e.value);
    let lam2 = lambda * lambda;
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for &t in ts {
        if !(t > 0.0) {
            return Err(Error::domain(format!("identity grid must be > 0, got {t}")));
        }
        let integral = integrate_from_origin(y, t, QUAD_PANELS)?;
        let moment = integrate_from_origin(|tau| Ok(y(tau)? * (t - tau)), t, QUAD_PANELS)?;
        let dy = eval_y_with(lambda, t, 1, &opts)?.value;
        let d2y = eval_y_with(lambda, t, 2, &opts)?.value;
        let rhs1 = lam2 * moment - 2.0 * lambda * t.sqrt() / PI.sqrt();
        let rhs2 = -lambda / (PI * t).sqrt() + lam2 * integral;
        first = first.max((dy - rhs1).abs());
        second = second.max((d2y - rhs2).abs());
    }
    Ok((first, second))
}

/// Second-derivative identity evaluated on a numerical solution: `y''` by
/// second differences of the grid values, right side by trapezoid.
/// Interior points whose time is at least `t_min` are compared.
pub fn grid_second_derivative_defect(y: &GridFunction, lambda: f64, t_min: f64) -> f64 {
    let h = y.dt;
    let v = &y.values;
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for i in 1..v.len() - 1 {
        integral += 0.5 * h * (v[i - 1] + v[i]);
        let t = y.t(i);
        if t < t_min {
            continue;
        }
        let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
        let rhs = -lambda / (PI * t).sqrt() + lambda * lambda * integral;
        worst = worst.max((d2 - rhs).abs());
    }
    worst
}

/// `n` log-spaced points on `[a, b]`, `0 < a < b`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![b];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Where the sup-norm checks of [`full_equivalence_report`] are taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridDescriptor {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub spacing: &'static str,
}

/// Pass thresholds for each field of [`EquivalenceReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceTolerances {
    pub ode_residual_sup: f64,
    pub ic_y0_error: f64,
    pub ic_dy0_error: f64,
    pub d2y0_error: f64,
    pub integral_bc_error: f64,
    pub dy_identity_sup_error: f64,
    pub d2y_identity_sup_error: f64,
    pub volterra_residual_sup: f64,
}

impl EquivalenceTolerances {
    pub fn for_run(lambda: f64, t_max: f64, steps: usize) -> Self {
        let dt = t_max / steps as f64;
        EquivalenceTolerances {
            ode_residual_sup: 1e-6,
            ic_y0_error: 0.0,
            ic_dy0_error: 3.0 * lambda.abs() * PROBE_OFFSET.sqrt(),
            d2y0_error: 1e-6,
            integral_bc_error: 1e-7,
            dy_identity_sup_error: 1e-6,
            d2y_identity_sup_error: 1e-6,
            volterra_residual_sup: 5.0 * dt * dt * (1.0 + lambda.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub lambda: f64,
    pub t_max: f64,
    pub steps: usize,
    pub forcing: Forcing,
    pub ode_residual_sup: f64,
    pub ic_y0_error: f64,
    pub ic_dy0_error: f64,
    pub d2y0_error: f64,
    pub integral_bc_error: f64,
    pub dy_identity_sup_error: f64,
    pub d2y_identity_sup_error: f64,
    pub volterra_residual_sup: f64,
    pub grid: GridDescriptor,
    pub tolerances: EquivalenceTolerances,
    pub pass: bool,
}

/// Log-spaced residual grid starts this fraction of `t_max` from the origin.
pub const REPORT_GRID_START: f64 = 0.05;
pub const REPORT_GRID_POINTS: usize = 32;

/// Runs every check for `params.lambda` on `(0, params.t_max]`.
///
/// A tolerance miss is reported through `pass`; only numerical failures
/// (term cap, bad arguments) are errors.
pub fn full_equivalence_report(
    params: &ModelParams,
    steps: usize,
    opts: impl Into<SeriesOptions>,
    forcing: Forcing,
) -> Result<EquivalenceReport> {
    params.validate()?;
    let lambda = params.lambda;
    let t_max = params.t_max;
    let opts: SeriesOptions = opts.into();
    let ts = log_grid(REPORT_GRID_START * t_max, t_max, REPORT_GRID_POINTS);

    let mut ode_sup: f64 = 0.0;
    for &t in &ts {
        ode_sup = ode_sup.max(ode_residual_with(lambda, t, &opts, forcing)?.abs());
    }
    let ic = check_initial_conditions(lambda, opts)?;
    let bc = check_integral_bc(lambda, steps.max(100), opts)?;
    let (dy_err, d2y_err) = check_derivative_identities(lambda, &ts, opts)?;
    let y = GridFunction::sample(t_max, steps, |t| eval_y_with(lambda, t, 0, &opts).map(|e| e.value))?;
    let phi = volterra_residual(&y, lambda).sup_norm();

    let tolerances = EquivalenceTolerances::for_run(lambda, t_max, steps);
    let pass = ode_sup <= tolerances.ode_residual_sup
        && ic.y0 <= tolerances.ic_y0_error
        && ic.dy0 <= tolerances.ic_dy0_error
        && ic.d2y0 <= tolerances.d2y0_error
        && ic.d2y0_trend_ok
        && bc <= tolerances.integral_bc_error
        && dy_err <= tolerances.dy_identity_sup_error
        && d2y_err <= tolerances.d2y_identity_sup_error
        && phi <= tolerances.volterra_residual_sup;

    Ok(EquivalenceReport {
        lambda,
        t_max,
        steps,
        forcing,
        ode_residual_sup: ode_sup,
        ic_y0_error: ic.y0,
        ic_dy0_error: ic.dy0,
        d2y0_error: ic.d2y0,
        integral_bc_error: bc,
        dy_identity_sup_error: dy_err,
        d2y_identity_sup_error: d2y_err,
        volterra_residual_sup: phi,
        grid: GridDescriptor {
            t_min: ts[0],
            t_max,
            points: ts.len(),
            spacing: "log",
        },
        tolerances,
        pass,
    })
}
