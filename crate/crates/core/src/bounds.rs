//! Parameter-dependence bounds.
//!
//! For `|lambda| <= lambda_{eps,T} = (3 sqrt(pi) / 4) eps / T^(3/2)` the
//! solution `g_lambda`, the accumulated flux `U_lambda` and the temperature
//! `u_lambda` obey explicit sup-norm and Lipschitz bounds. This module
//! evaluates those bounds and measures the corresponding quantities on
//! discrete grids.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heat::{eval_accumulated_flux, HeatProblem};
use crate::series::{eval_y_with, ModelParams, SeriesOptions};
use crate::specfun::erf;
use crate::volterra::GridFunction;

/// Slack added to every bound before comparing.
pub const BOUND_SLACK: f64 = 1e-9;

/// Time levels used for the temperature norms.
pub const TEMPERATURE_TIME_LEVELS: usize = 16;

/// Points of the default `x` grid on `[0, 8 sqrt(T)]`, before the far-field
/// point is appended.
pub const DEFAULT_X_POINTS: usize = 64;

/// `(3 sqrt(pi) / 4) eps / T^(3/2)`.
pub fn lambda_threshold(epsilon: f64, t_max: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::domain(format!("T must be > 0, got {t_max}")));
    }
    Ok(0.75 * PI.sqrt() * epsilon / t_max.powf(1.5))
}

pub fn sup_norm(f: &GridFunction) -> f64 {
    f.sup_norm()
}

/// `n` equispaced values of `[-threshold, threshold]`, endpoints included.
/// Odd `n` includes zero.
pub fn lambda_samples(threshold: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                // symmetric construction keeps +l and -l exact mirrors
                let k = 2.0 * i as f64 - (n - 1) as f64;
                threshold * k / (n - 1) as f64
            })
            .collect(),
    }
}

/// Default `x` grid: `DEFAULT_X_POINTS` points on `[0, 8 sqrt(T)]` and a
/// point at infinity.
pub fn default_x_grid(t_max: f64) -> Vec<f64> {
    let x_max = 8.0 * t_max.sqrt();
    let n = DEFAULT_X_POINTS;
    let mut xs: Vec<f64> = (0..n).map(|i| x_max * i as f64 / (n - 1) as f64).collect();
    xs.push(f64::INFINITY);
    xs
}

/// A measured quantity that exceeded its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub quantity: &'static str,
    pub lambda: f64,
    pub lambda_other: Option<f64>,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Default)]
struct Tracker {
    violations: Vec<Violation>,
}

impl Tracker {
    fn check(&mut self, quantity: &'static str, lambda: f64, other: Option<f64>, measured: f64, bound: f64) {
        if !(measured <= bound + BOUND_SLACK) {
            self.violations.push(Violation {
                quantity,
                lambda,
                lambda_other: other,
                measured,
                bound,
            });
        }
    }
}

/// Measurements for the Volterra solution itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionBounds {
    pub lambda_threshold: f64,
    pub lambdas: Vec<f64>,
    pub g_norms: Vec<f64>,
    pub g_norm_bound: f64,
    pub g_norm_measured: f64,
    pub g_lipschitz_bound: f64,
    pub g_lipschitz_measured: f64,
    pub violations: Vec<Violation>,
}

/// Samples of `g_lambda` on `steps + 1` points of `[0, T]`.
fn solution_grids(lambdas: &[f64], t_max: f64, steps: usize, opts: &SeriesOptions) -> Result<Vec<GridFunction>> {
    lambdas
        .iter()
        .map(|&lam| GridFunction::sample(t_max, steps, |t| eval_y_with(lam, t, 0, opts).map(|e| e.value)))
        .collect()
}

/// Largest `sup |a - b| / |la - lb|` over distinct pairs.
fn max_lipschitz_ratio(
    lambdas: &[f64],
    distance: impl Fn(usize, usize) -> f64,
    mut on_pair: impl FnMut(usize, usize, f64),
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..lambdas.len() {
        for j in i + 1..lambdas.len() {
            let dl = (lambdas[j] - lambdas[i]).abs();
            if dl == 0.0 {
                continue;
            }
            let ratio = distance(i, j) / dl;
            on_pair(i, j, ratio);
            worst = worst.max(ratio);
        }
    }
    worst
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Sup-norm of `g_lambda` against `1/(1 - eps)` and pairwise ratios
/// against `(4 / (3 sqrt(pi))) T^(3/2) / (1 - eps)^2`.
pub fn verify_solution_bounds(
    epsilon: f64,
    t_max: f64,
    n_lambda_samples: usize,
    steps: usize,
    opts: impl Into<SeriesOptions>,
) -> Result<SolutionBounds> {
    let threshold = lambda_threshold(epsilon, t_max)?;
    if steps == 0 {
        return Err(Error::domain("need steps >= 1"));
    }
    let opts: SeriesOptions = opts.into();
    let lambdas = lambda_samples(threshold, n_lambda_samples);
    let grids = solution_grids(&lambdas, t_max, steps, &opts)?;

    let g_norm_bound = 1.0 / (1.0 - epsilon);
    let g_lipschitz_bound = 4.0 / (3.0 * PI.sqrt()) * t_max.powf(1.5) / (1.0 - epsilon).powi(2);

    let mut tracker = Tracker::default();
    let g_norms: Vec<f64> = grids.iter().map(GridFunction::sup_norm).collect();
    for (&lam, &n) in lambdas.iter().zip(&g_norms) {
        tracker.check("g_norm", lam, None, n, g_norm_bound);
    }
    let g_lipschitz_measured = max_lipschitz_ratio(
        &lambdas,
        |i, j| sup_distance(&grids[i].values, &grids[j].values),
        |i, j, r| tracker.check("g_lipschitz", lambdas[i], Some(lambdas[j]), r, g_lipschitz_bound),
    );

    Ok(SolutionBounds {
        lambda_threshold: threshold,
        g_norm_bound,
        g_norm_measured: g_norms.iter().copied().fold(0.0, f64::max),
        g_lipschitz_bound,
        g_lipschitz_measured,
        lambdas,
        g_norms,
        violations: tracker.violations,
    })
}

/// Per-sample temperature measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatSampleNorms {
    pub lambda: f64,
    #[serde(rename = "U_norm")]
    pub flux_integral_norm: f64,
    pub u_norm: f64,
    pub u_dev: f64,
}

/// Measurements for the accumulated flux and the temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatBounds {
    pub lambda_threshold: f64,
    pub samples: Vec<HeatSampleNorms>,
    #[serde(rename = "U_norm_bound")]
    pub flux_integral_norm_bound: f64,
    #[serde(rename = "U_norm_measured")]
    pub flux_integral_norm_measured: f64,
    #[serde(rename = "U_lipschitz_bound")]
    pub flux_integral_lipschitz_bound: f64,
    #[serde(rename = "U_lipschitz_measured")]
    pub flux_integral_lipschitz_measured: f64,
    pub u_norm_bound: f64,
    pub u_norm_measured: f64,
    pub u_dev_bound: f64,
    pub u_dev_measured: f64,
    pub u_lipschitz_bound: f64,
    pub u_lipschitz_measured: f64,
    pub violations: Vec<Violation>,
}

/// `U_lambda`, `u_lambda` and `u_lambda - u_0` against their bounds, plus
/// pairwise Lipschitz ratios for `U` and `u`.
///
/// `U` is measured on the product-integration grid with `steps` intervals;
/// `u` on `x_grid` times [`TEMPERATURE_TIME_LEVELS`] levels of `(0, T]`.
pub fn verify_heat_bounds(
    epsilon: f64,
    t_max: f64,
    h0: f64,
    n_lambda_samples: usize,
    steps: usize,
    x_grid: &[f64],
    opts: impl Into<SeriesOptions>,
) -> Result<HeatBounds> {
    let threshold = lambda_threshold(epsilon, t_max)?;
    let opts: SeriesOptions = opts.into();
    if !(h0 > 0.0) {
        return Err(Error::domain(format!("h0 must be > 0, got {h0}")));
    }
    if x_grid.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::domain("x grid must be nonnegative"));
    }
    let lambdas = lambda_samples(threshold, n_lambda_samples);
    let one_minus = 1.0 - epsilon;
    let sqrt_t = t_max.sqrt();

    let flux_integral_norm_bound = 2.0 * h0 / PI.sqrt() * sqrt_t / one_minus;
    let flux_integral_lipschitz_bound = 8.0 * h0 * t_max * t_max / (3.0 * PI * one_minus * one_minus);
    let u_norm_bound = h0 * (1.0 + 3.0 * epsilon / (2.0 * one_minus));
    let u_dev_per_lambda = 2.0 * h0 / PI.sqrt() * t_max.powf(1.5) / one_minus;
    let u_lipschitz_bound = 2.0 * h0 * sqrt_t / (PI.sqrt() * one_minus) * (epsilon * PI / one_minus + t_max);

    let times: Vec<f64> = (1..=TEMPERATURE_TIME_LEVELS)
        .map(|k| t_max * k as f64 / TEMPERATURE_TIME_LEVELS as f64)
        .collect();
    let baseline: Vec<f64> = times
        .iter()
        .flat_map(|&t| x_grid.iter().map(move |&x| h0 * erf_profile(x, t)))
        .collect();

    let mut tracker = Tracker::default();
    let mut flux_grids = Vec::with_capacity(lambdas.len());
    let mut fields = Vec::with_capacity(lambdas.len());
    let mut samples = Vec::with_capacity(lambdas.len());
    for &lam in &lambdas {
        let big_u = eval_accumulated_flux(lam, h0, t_max, steps, opts)?;
        let problem = HeatProblem::new(lam, h0, opts)?;
        let mut field = Vec::with_capacity(baseline.len());
        for &t in &times {
            let slice = problem.slice(t)?;
            for &x in x_grid {
                field.push(slice.u(x)?);
            }
        }
        let u_norm = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let u_dev = sup_distance(&field, &baseline);
        let s = HeatSampleNorms {
            lambda: lam,
            flux_integral_norm: big_u.sup_norm(),
            u_norm,
            u_dev,
        };
        tracker.check("U_norm", lam, None, s.flux_integral_norm, flux_integral_norm_bound);
        tracker.check("u_norm", lam, None, s.u_norm, u_norm_bound);
        tracker.check("u_dev", lam, None, s.u_dev, u_dev_per_lambda * lam.abs());
        samples.push(s);
        flux_grids.push(big_u);
        fields.push(field);
    }

    let flux_integral_lipschitz_measured = max_lipschitz_ratio(
        &lambdas,
        |i, j| sup_distance(&flux_grids[i].values, &flux_grids[j].values),
        |i, j, r| {
            tracker.check(
                "U_lipschitz",
                lambdas[i],
                Some(lambdas[j]),
                r,
                flux_integral_lipschitz_bound,
            )
        },
    );
    let u_lipschitz_measured = max_lipschitz_ratio(
        &lambdas,
        |i, j| sup_distance(&fields[i], &fields[j]),
        |i, j, r| tracker.check("u_lipschitz", lambdas[i], Some(lambdas[j]), r, u_lipschitz_bound),
    );

    let max_of = |f: fn(&HeatSampleNorms) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    Ok(HeatBounds {
        lambda_threshold: threshold,
        flux_integral_norm_bound,
        flux_integral_norm_measured: max_of(|s| s.flux_integral_norm),
        flux_integral_lipschitz_bound,
        flux_integral_lipschitz_measured,
        u_norm_bound,
        u_norm_measured: max_of(|s| s.u_norm),
        u_dev_bound: u_dev_per_lambda * threshold,
        u_dev_measured: max_of(|s| s.u_dev),
        u_lipschitz_bound,
        u_lipschitz_measured,
        samples,
        violations: tracker.violations,
    })
}

fn erf_profile(x: f64, t: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        erf(x / (2.0 * t.sqrt()))
    }
}

/// Settings echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSettings {
    pub epsilon: f64,
    pub t_max: f64,
    pub h0: f64,
    pub n_lambda_samples: usize,
    pub steps: usize,
    pub x_points: usize,
    pub time_levels: usize,
    pub slack: f64,
}

/// Combined report for the solution and the heat problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lambda_threshold: f64,
    pub g_norm_bound: f64,
    pub g_norm_measured: f64,
    pub g_lipschitz_bound: f64,
    pub g_lipschitz_measured: f64,
    #[serde(rename = "U_norm_bound")]
    pub flux_integral_norm_bound: f64,
    #[serde(rename = "U_norm_measured")]
    pub flux_integral_norm_measured: f64,
    #[serde(rename = "U_lipschitz_bound")]
    pub flux_integral_lipschitz_bound: f64,
    #[serde(rename = "U_lipschitz_measured")]
    pub flux_integral_lipschitz_measured: f64,
    pub u_norm_bound: f64,
    pub u_norm_measured: f64,
    pub u_dev_bound: f64,
    pub u_dev_measured: f64,
    pub u_lipschitz_bound: f64,
    pub u_lipschitz_measured: f64,
    pub lambdas: Vec<f64>,
    pub g_norms: Vec<f64>,
    pub heat_samples: Vec<HeatSampleNorms>,
    pub violations: Vec<Violation>,
    pub tolerances: BoundsSettings,
    pub pass: bool,
}

impl BoundsReport {
    /// Smallest `bound - measured` over the reported pairs; nonnegative on a
    /// clean run.
    pub fn min_margin(&self) -> f64 {
        [
            self.g_norm_bound - self.g_norm_measured,
            self.g_lipschitz_bound - self.g_lipschitz_measured,
            self.flux_integral_norm_bound - self.flux_integral_norm_measured,
            self.flux_integral_lipschitz_bound - self.flux_integral_lipschitz_measured,
            self.u_norm_bound - self.u_norm_measured,
            self.u_dev_bound - self.u_dev_measured,
            self.u_lipschitz_bound - self.u_lipschitz_measured,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// Runs both verifications. `x_grid` defaults to [`default_x_grid`].
pub fn bounds_report(
    params: &ModelParams,
    n_lambda_samples: usize,
    steps: usize,
    x_grid: Option<&[f64]>,
    opts: impl Into<SeriesOptions>,
) -> Result<BoundsReport> {
    params.validate()?;
    let opts: SeriesOptions = opts.into();
    let xs = match x_grid {
        Some(xs) => xs.to_vec(),
        None => default_x_grid(params.t_max),
    };
    let g = verify_solution_bounds(params.epsilon, params.t_max, n_lambda_samples, steps, opts)?;
    let h = verify_heat_bounds(
        params.epsilon,
        params.t_max,
        params.h0,
        n_lambda_samples,
        steps,
        &xs,
        opts,
    )?;
    let mut violations = g.violations;
    violations.extend(h.violations);
    Ok(BoundsReport {
        lambda_threshold: g.lambda_threshold,
        g_norm_bound: g.g_norm_bound,
        g_norm_measured: g.g_norm_measured,
        g_lipschitz_bound: g.g_lipschitz_bound,
        g_lipschitz_measured: g.g_lipschitz_measured,
        flux_integral_norm_bound: h.flux_integral_norm_bound,
        flux_integral_norm_measured: h.flux_integral_norm_measured,
        flux_integral_lipschitz_bound: h.flux_integral_lipschitz_bound,
        flux_integral_lipschitz_measured: h.flux_integral_lipschitz_measured,
        u_norm_bound: h.u_norm_bound,
        u_norm_measured: h.u_norm_measured,
        u_dev_bound: h.u_dev_bound,
        u_dev_measured: h.u_dev_measured,
        u_lipschitz_bound: h.u_lipschitz_bound,
        u_lipschitz_measured: h.u_lipschitz_measured,
        lambdas: g.lambdas,
        g_norms: g.g_norms,
        heat_samples: h.samples,
        pass: violations.is_empty(),
        violations,
        tolerances: BoundsSettings {
            epsilon: params.epsilon,
            t_max: params.t_max,
            h0: params.h0,
            n_lambda_samples,
            steps,
            x_points: xs.len(),
            time_levels: TEMPERATURE_TIME_LEVELS,
            slack: BOUND_SLACK,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_values() {
        let v = lambda_threshold(0.5, 1.0).unwrap();
        assert!((v - 3.0 * PI.sqrt() / 8.0).abs() < 1e-15);
        assert!((v - 0.664_670).abs() < 1e-6);
        let w = lambda_threshold(0.5, 2.0).unwrap();
        assert!((v / w - 2f64.powf(1.5)).abs() < 1e-13);
        let z = lambda_threshold(0.9, 0.25).unwrap();
        assert!((z - 0.75 * PI.sqrt() * 0.9 / 0.125).abs() < 1e-13);
        assert!((z - 9.5712).abs() < 1e-4);
        assert!(lambda_threshold(1.0, 1.0).is_err());
        assert!(lambda_threshold(0.0, 1.0).is_err());
        assert!(lambda_threshold(0.5, 0.0).is_err());
    }

    #[test]
    fn samples_include_endpoints_and_zero() {
        let s = lambda_samples(2.0, 9);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], -2.0);
        assert_eq!(s[8], 2.0);
        assert_eq!(s[4], 0.0);
        for i in 0..9 {
            assert_eq!(s[i], -s[8 - i]);
        }
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&GridFunction::constant(1.0, 10, 1.0)), 1.0);
        let lam = lambda_threshold(0.5, 1.0).unwrap();
        let opts = SeriesOptions::new(1e-12);
        let g = GridFunction::sample(1.0, 512, |t| eval_y_with(-lam, t, 0, &opts).map(|e| e.value)).unwrap();
        assert!(sup_norm(&g) <= 2.0);
    }

    #[test]
    fn solution_bounds_hold() {
        let r = verify_solution_bounds(0.5, 1.0, 9, 512, 1e-12).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.g_norm_measured <= 2.0);
        let r = verify_solution_bounds(0.25, 2.0, 9, 512, 1e-12).unwrap();
        assert!((r.g_lipschitz_bound - 3.7825).abs() < 1e-4);
        assert!(r.g_lipschitz_measured <= r.g_lipschitz_bound);
    }

    #[test]
    fn heat_bounds_hold() {
        let xs = default_x_grid(1.0);
        let r = verify_heat_bounds(0.5, 1.0, 1.0, 5, 256, &xs, 1e-12).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!((r.flux_integral_norm_bound - 4.0 / PI.sqrt()).abs() < 1e-14);
        let zero = r.samples.iter().find(|s| s.lambda == 0.0).unwrap();
        assert_eq!(zero.u_dev, 0.0);
        assert!(zero.u_norm <= 1.0);
    }

    #[test]
    fn report_margins_nonnegative() {
        let p = ModelParams::new(0.0, 1.0, 1.0, 0.5).unwrap();
        let r = bounds_report(&p, 5, 256, None, 1e-12).unwrap();
        assert!(r.pass);
        assert!(r.min_margin() >= 0.0);
    }
}
