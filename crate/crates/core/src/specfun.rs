//! Scalar special functions: the error function, log-Gamma, Beta, and the
//! factorial-type quantities used by the series solution.
//!
//! Every factorial-type value is returned as a natural logarithm so that
//! callers can combine huge numerators and denominators without overflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Above this magnitude `erfc` is below the smallest subnormal.
const ERF_SATURATION: f64 = 27.0;

/// Error function, absolute accuracy better than 1e-15 on the real line.
///
/// Odd symmetry is exact: the magnitude is computed from `|x|` and the sign
/// reapplied.
pub fn erf(x: f64) -> f64 {
    let a = x.abs();
    let v = if a < 3.0 {
        erf_series(a)
    } else if a < ERF_SATURATION {
        1.0 - erfc_continued_fraction(a)
    } else {
        1.0
    };
    v.copysign(x)
}

/// Complementary error function for `x >= 0`.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 0.5 {
        1.0 - erf_series(x)
    } else if x < ERF_SATURATION {
        erfc_continued_fraction(x)
    } else {
        0.0
    }
}

// erf(x) = 2/sqrt(pi) * x * exp(-x^2) * sum_n (2x^2)^n / (2n+1)!!
// All terms are positive, so there is no cancellation for moderate x.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    TWO_OVER_SQRT_PI * x * (-x2).exp() * sum
}

// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x).exp())
}

/// Beta function `B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)`.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::domain(format!(
            "beta requires positive arguments, got ({x}, {y})"
        )));
    }
    Ok((ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp())
}

/// `ln(n!)`. Exact products up to `20!`, Stirling's series above.
pub fn log_factorial(n: u64) -> f64 {
    if n <= 20 {
        let mut p: u64 = 1;
        for k in 2..=n {
            p *= k;
        }
        return (p as f64).ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + tail
}

/// `ln(m!!)` for odd `m >= 1`, where `m!! = m (m-2) ... 3 * 1`.
///
/// Panics on even `m` or `m == 0`.
pub fn log_odd_double_factorial(m: u64) -> f64 {
    assert!(m % 2 == 1, "odd double factorial needs odd m >= 1, got {m}");
    // 33!! is the last one that fits in u64.
    if m <= 33 {
        let mut p: u64 = 1;
        let mut k = m;
        while k > 1 {
            p *= k;
            k -= 2;
        }
        return (p as f64).ln();
    }
    // m!! = m! / (2^k k!), k = (m - 1)/2
    let k = (m - 1) / 2;
    log_factorial(m) - k as f64 * std::f64::consts::LN_2 - log_factorial(k)
}

/// `ln Gamma(k / 2)` for integer `k >= 1`, assembled from exact factorial
/// quantities instead of the Lanczos sum.
pub fn log_gamma_half(k: u64) -> f64 {
    assert!(k >= 1, "log_gamma_half needs k >= 1");
    if k.is_multiple_of(2) {
        log_factorial(k / 2 - 1)
    } else if k == 1 {
        0.5 * PI.ln()
    } else {
        // Gamma(k/2) = (k-2)!! sqrt(pi) / 2^((k-1)/2)
        log_odd_double_factorial(k - 2) + 0.5 * PI.ln() - ((k - 1) / 2) as f64 * std::f64::consts::LN_2
    }
}
