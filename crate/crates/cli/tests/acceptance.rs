//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use volheat::bounds::{default_x_grid, verify_heat_bounds, verify_solution_bounds, BOUND_SLACK};
use volheat::heat::HeatProblem;
use volheat::odecheck::{
    check_derivative_identities, check_initial_conditions, check_integral_bc, log_grid, ode_residual, Forcing,
};
use volheat::quad::gauss_composite;
use volheat::series::eval_y;
use volheat::specfun::erf;
use volheat::volterra::{convolve_inv_sqrt, convolve_sqrt, solve_volterra, volterra_residual};
use volheat::GridFunction;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    let detail = detail.trim_end().to_string();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn series_grid(lambda: f64, t_max: f64, steps: usize, tol: f64) -> GridFunction {
    GridFunction::sample(t_max, steps, |t| eval_y(lambda, t, tol).map(|e| e.value)).unwrap()
}

fn oracle_agreement() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_ratio = f64::INFINITY;
    let mut notes = Vec::new();
    for lambda in [-4.0, -1.0, 0.0, 0.5, 1.0, 5.0] {
        let coarse = solve_volterra(lambda, 1.0, 2000).unwrap();
        let fine = solve_volterra(lambda, 1.0, 4000).unwrap();
        let d1 = coarse.sup_distance(&series_grid(lambda, 1.0, 2000, 1e-14)).unwrap();
        let d2 = fine.sup_distance(&series_grid(lambda, 1.0, 4000, 1e-14)).unwrap();
        worst = worst.max(d1);
        // at lambda = 0 both differences vanish identically
        if d1 > 0.0 {
            let ratio = d1 / d2;
            worst_ratio = worst_ratio.min(ratio);
            notes.push(format!("{lambda}: {d1:.2e} ratio {ratio:.2}"));
        } else {
            notes.push(format!("{lambda}: {d1:.2e}"));
        }
    }
    check(
        worst <= 1e-4 && worst_ratio >= 3.0,
        format!(
            "max diff {worst:.3e}, min refinement ratio {worst_ratio:.3} [{}]",
            notes.join("; ")
        ),
    )
}

fn series_residual() -> Outcome {
    let mut worst = 0.0f64;
    for lambda in [-3.0, -1.0, 1.0, 3.0] {
        let y = series_grid(lambda, 1.0, 2000, 1e-14);
        worst = worst.max(volterra_residual(&y, lambda).sup_norm());
    }
    check(worst <= 1e-6, format!("sup residual {worst:.3e} (tol 1e-6)"))
}

const ODE_POINTS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
const ODE_LAMBDAS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Residual against `lambda/sqrt(pi)` must vanish and the one against
/// `lambda/(2 sqrt(pi))` must be of size `|lambda|/(2 sqrt(pi)) t^(-3/2)`.
fn ode_forward_as_stated() -> Outcome {
    let mut full_sup = 0.0f64;
    let mut half_worst_ratio = f64::INFINITY;
    for lambda in ODE_LAMBDAS {
        for t in ODE_POINTS {
            let full = ode_residual(lambda, t, 1e-14, Forcing::OverSqrtPi).unwrap().abs();
            let half = ode_residual(lambda, t, 1e-14, Forcing::HalfOverSqrtPi).unwrap().abs();
            full_sup = full_sup.max(full);
            let gap = lambda.abs() / (2.0 * PI.sqrt()) * t.powf(-1.5) * (1.0 - 1e-3);
            half_worst_ratio = half_worst_ratio.min(half / gap);
        }
    }
    check(
        full_sup <= 1e-6 && half_worst_ratio >= 1.0,
        format!(
            "forcing lambda/sqrt(pi): sup residual {full_sup:.3e} (tol 1e-6); \
             forcing lambda/(2 sqrt(pi)): min residual/gap {half_worst_ratio:.3e} (need >= 1)"
        ),
    )
}

/// The same measurement with the two forcing constants exchanged.
fn ode_forward_swapped() -> Outcome {
    let mut half_sup = 0.0f64;
    let mut full_worst_ratio = f64::INFINITY;
    for lambda in ODE_LAMBDAS {
        for t in ODE_POINTS {
            let half = ode_residual(lambda, t, 1e-14, Forcing::HalfOverSqrtPi).unwrap().abs();
            let full = ode_residual(lambda, t, 1e-14, Forcing::OverSqrtPi).unwrap().abs();
            half_sup = half_sup.max(half);
            let gap = lambda.abs() / (2.0 * PI.sqrt()) * t.powf(-1.5) * (1.0 - 1e-3);
            full_worst_ratio = full_worst_ratio.min(full / gap);
        }
    }
    check(
        half_sup <= 1e-6 && full_worst_ratio >= 1.0,
        format!(
            "forcing lambda/(2 sqrt(pi)): sup residual {half_sup:.3e}; \
             forcing lambda/sqrt(pi): min residual/gap {full_worst_ratio:.6}"
        ),
    )
}

fn initial_and_boundary_conditions() -> Outcome {
    let grid = log_grid(0.05, 1.0, 32);
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for lambda in [-2.0, -1.0, 1.0, 2.0] {
        let y0 = eval_y(lambda, 0.0, 1e-14).unwrap().value;
        let ic = check_initial_conditions(lambda, 1e-14).unwrap();
        let bc = check_integral_bc(lambda, 1000, 1e-14).unwrap();
        let (_, d2y) = check_derivative_identities(lambda, &grid, 1e-14).unwrap();
        if y0 != 1.0 {
            failures.push(format!("{lambda}: y(0) = {y0}"));
        }
        if ic.dy0 > 3.0 * lambda.abs() * 1e-3 {
            failures.push(format!("{lambda}: |y'| = {:.3e}", ic.dy0));
        }
        if bc > 1e-7 {
            failures.push(format!("{lambda}: bc {bc:.3e}"));
        }
        if d2y > 1e-6 {
            failures.push(format!("{lambda}: identity {d2y:.3e}"));
        }
        notes.push(format!("{lambda}: |y'| {:.2e} bc {bc:.2e} id {d2y:.2e}", ic.dy0));
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn grid_of(t_max: f64, steps: usize, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::sample(t_max, steps, |t| Ok::<_, ()>(f(t))).unwrap()
}

/// `int_sigma^t` of `sqrt(tau - sigma) / sqrt(t - tau)`, split at the
/// midpoint so each half has one endpoint singularity, which a reflection
/// moves onto the kernel.
fn half_power_pair(sigma: f64, t: f64, steps: usize) -> f64 {
    let h = 0.5 * (t - sigma);
    let near_sigma = grid_of(h, steps, |v| 1.0 / (h + v).sqrt());
    let near_t = grid_of(h, steps, |v| (h + v).sqrt());
    convolve_sqrt(&near_sigma, steps).unwrap() + convolve_inv_sqrt(&near_t, steps).unwrap()
}

/// `int_sigma^t` of `1 / (sqrt(t - tau) sqrt(tau - sigma))`, same splitting.
fn inverse_half_power_pair(sigma: f64, t: f64, steps: usize) -> f64 {
    let h = 0.5 * (t - sigma);
    let near_sigma = grid_of(h, steps, |v| 1.0 / (h + v).sqrt());
    let near_t = grid_of(h, steps, |v| 1.0 / (h + v).sqrt());
    convolve_inv_sqrt(&near_sigma, steps).unwrap() + convolve_inv_sqrt(&near_t, steps).unwrap()
}

fn quadrature_identities() -> Outcome {
    let mut worst_rel = 0.0f64;
    for (sigma, t) in [(0.0, 1.0), (0.5, 2.0)] {
        let a = half_power_pair(sigma, t, 2000);
        let b = inverse_half_power_pair(sigma, t, 2000);
        worst_rel = worst_rel.max((a / (PI / 2.0 * (t - sigma)) - 1.0).abs());
        worst_rel = worst_rel.max((b / PI - 1.0).abs());
    }
    let direct = convolve_inv_sqrt(&grid_of(1.0, 20_000, f64::sqrt), 20_000).unwrap();
    let direct_rel = (direct / (PI / 2.0) - 1.0).abs();

    let mut worst_abs = 0.0f64;
    let polys: [fn(f64) -> f64; 3] = [|_| 1.0, |x| x, |x| x * x];
    for y in polys {
        for t in [0.5, 1.0, 2.0] {
            let inner = |tau: f64| gauss_composite(|xi| Ok::<_, ()>(y(xi)), 0.0, tau, 1);
            let lhs = gauss_composite(inner, 0.0, t, 1).unwrap();
            let rhs = gauss_composite(|tau| Ok::<_, ()>(y(tau) * (t - tau)), 0.0, t, 1).unwrap();
            worst_abs = worst_abs.max((lhs - rhs).abs());
        }
    }
    check(
        worst_rel <= 1e-6 && direct_rel <= 1e-6 && worst_abs <= 1e-10,
        format!(
            "beta identities rel err {worst_rel:.3e}, unsplit {direct_rel:.3e} (tol 1e-6); \
             repeated integral {worst_abs:.3e} (tol 1e-10)"
        ),
    )
}

fn heat_solution() -> Outcome {
    let mut boundary = 0.0f64;
    for lambda in [-2.0, 1.0, 3.0] {
        let p = HeatProblem::new(lambda, 1.0, 1e-14).unwrap();
        for t in [0.1, 1.0] {
            boundary = boundary.max(p.u(0.0, t).unwrap().abs());
        }
    }
    let mut reduction = 0.0f64;
    for h0 in [1.0, 2.5] {
        let p = HeatProblem::new(0.0, h0, 1e-14).unwrap();
        for t in [0.1f64, 0.5, 1.0] {
            for x in [0.0, 0.3, 1.0, 2.5] {
                let exact = h0 * erf(x / (2.0 * t.sqrt()));
                reduction = reduction.max((p.u(x, t).unwrap() - exact).abs());
            }
        }
    }
    let p = HeatProblem::new(1.0, 1.0, 1e-14).unwrap();
    let r1 = p.pde_residual(1.0, 0.5, 1e-3, 1e-3).unwrap().abs();
    let r2 = p.pde_residual(1.0, 0.5, 5e-4, 5e-4).unwrap().abs();
    let ratio = r1 / r2;
    check(
        boundary <= 1e-12 && reduction <= 1e-12 && ratio >= 3.5,
        format!(
            "|u(0,t)| {boundary:.2e}, erf reduction {reduction:.2e}, residual {r1:.3e} -> {r2:.3e} ratio {ratio:.3}"
        ),
    )
}

const CONFIGS: [(f64, f64); 9] = [
    (0.25, 0.5),
    (0.25, 1.0),
    (0.25, 2.0),
    (0.5, 0.5),
    (0.5, 1.0),
    (0.5, 2.0),
    (0.75, 0.5),
    (0.75, 1.0),
    (0.75, 2.0),
];

fn solution_bounds() -> Outcome {
    let mut min_norm_margin = f64::INFINITY;
    let mut min_lip_margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (eps, t) in CONFIGS {
        let b = verify_solution_bounds(eps, t, 9, 1000, 1e-13).unwrap();
        for (&lam, &n) in b.lambdas.iter().zip(&b.g_norms) {
            if n > b.g_norm_bound + BOUND_SLACK {
                violations.push(format!("eps {eps} T {t} lambda {lam}: norm {n}"));
            }
        }
        if b.g_lipschitz_measured > b.g_lipschitz_bound + BOUND_SLACK {
            violations.push(format!("eps {eps} T {t}: lipschitz {}", b.g_lipschitz_measured));
        }
        min_norm_margin = min_norm_margin.min(b.g_norm_bound - b.g_norm_measured);
        min_lip_margin = min_lip_margin.min(b.g_lipschitz_bound - b.g_lipschitz_measured);
    }
    check(
        violations.is_empty(),
        format!(
            "min norm margin {min_norm_margin:.3e}, min lipschitz margin {min_lip_margin:.3e} {}",
            violations.join("; ")
        ),
    )
}

fn heat_bounds() -> Outcome {
    let mut violations = Vec::new();
    let mut linearity = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for (eps, t) in CONFIGS {
        let xs = default_x_grid(t);
        for h0 in [1.0, 3.0] {
            let b = verify_heat_bounds(eps, t, h0, 9, 400, &xs, 1e-13).unwrap();
            let doubled = verify_heat_bounds(eps, t, 2.0 * h0, 9, 400, &xs, 1e-13).unwrap();
            for s in &b.samples {
                let dev_bound = b.u_dev_bound / b.lambda_threshold * s.lambda.abs();
                for (name, measured, bound) in [
                    ("U", s.flux_integral_norm, b.flux_integral_norm_bound),
                    ("u", s.u_norm, b.u_norm_bound),
                    ("u - u0", s.u_dev, dev_bound),
                ] {
                    min_margin = min_margin.min(bound - measured);
                    if measured > bound + BOUND_SLACK {
                        violations.push(format!(
                            "eps {eps} T {t} h0 {h0} lambda {}: {name} {measured} > {bound}",
                            s.lambda
                        ));
                    }
                }
            }
            for (a, d) in b.samples.iter().zip(&doubled.samples) {
                for (x, y) in [
                    (a.flux_integral_norm, d.flux_integral_norm),
                    (a.u_norm, d.u_norm),
                    (a.u_dev, d.u_dev),
                ] {
                    if x != 0.0 {
                        linearity = linearity.max((y / (2.0 * x) - 1.0).abs());
                    } else if y != 0.0 {
                        linearity = f64::INFINITY;
                    }
                }
            }
        }
    }
    check(
        violations.is_empty() && linearity <= 1e-12,
        format!(
            "min margin {min_margin:.3e}, doubling h0 rel err {linearity:.2e} (tol 1e-12) {}",
            violations.join("; ")
        ),
    )
}

fn cli_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_volheat");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 5] = [
        &[
            "series", "--lambda", "1", "--t-max", "1", "--steps", "200", "--tol", "1e-10",
        ],
        &["volterra", "--lambda", "-2", "--t-max", "1", "--steps", "400"],
        &["equivalence", "--lambda", "1", "--t-max", "1"],
        &["heat", "--lambda", "1", "--t-max", "1", "--steps", "200"],
        &[
            "bounds",
            "--epsilon",
            "0.5",
            "--t-max",
            "1",
            "--h0",
            "1",
            "--steps",
            "200",
        ],
    ];
    let mut notes = Vec::new();
    for args in runs {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{}-{k}", args[0]));
            let status = Command::new(exe)
                .args(args)
                .arg("--output")
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{} exited with {status}", args[0]));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Err(format!("{} output differs between runs", args[0]));
        }
        notes.push(format!("{} {} bytes", args[0], outputs[0].len()));
    }
    Ok(notes.join(", "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1", oracle_agreement),
        ("2", series_residual),
        ("3", ode_forward_as_stated),
        ("3 (constants swapped)", ode_forward_swapped),
        ("4", initial_and_boundary_conditions),
        ("5", quadrature_identities),
        ("6", heat_solution),
        ("7", solution_bounds),
        ("8", heat_bounds),
        ("9", cli_determinism),
    ];
    let mut failed = 0;
    for (label, run) in criteria {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {label}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {label}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
