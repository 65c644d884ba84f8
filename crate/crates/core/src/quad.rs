//! Fixed quadrature rules: Gauss-Legendre (composite, optionally in the
//! `tau = r^2` variable for integrands with half-integer powers at the
//! origin) and composite Simpson on uniform samples.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 20-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(20))
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre over `[a, b]` with `panels` equal panels.
pub fn gauss_composite<F, E>(mut f: F, a: f64, b: f64, panels: usize) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let rule = GaussLegendre::standard();
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (x, w) in rule.on_interval(lo, lo + h) {
            acc += w * f(x)?;
        }
    }
    Ok(acc)
}

/// `int_0^t f(tau) dtau` computed as `int_0^sqrt(t) f(r^2) 2r dr`.
///
/// Functions that are power series in `sqrt(tau)` become power series in
/// `r`, so the Gauss rule converges spectrally.
pub fn integrate_from_origin<F, E>(mut f: F, t: f64, panels: usize) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if t == 0.0 {
        return Ok(0.0);
    }
    gauss_composite(|r| Ok(2.0 * r * f(r * r)?), 0.0, t.sqrt(), panels)
}

/// Composite Simpson on uniform samples `values[i] = f(i * h)`.
///
/// An odd number of intervals finishes with Simpson's 3/8 rule on the last
/// three. Two samples fall back to the trapezoid.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let even_end = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut acc = 0.0;
            if even_end > 0 {
                let mut s = values[0] + values[even_end];
                for (i, v) in values.iter().enumerate().take(even_end).skip(1) {
                    s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                acc += s * h / 3.0;
            }
            if even_end < n {
                let v = &values[even_end..];
                acc += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            acc
        }
    }
}
