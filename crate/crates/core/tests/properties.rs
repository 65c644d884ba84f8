use std::f64::consts::PI;

use proptest::prelude::*;
use volheat::heat::HeatProblem;
use volheat::series::{eval_i, eval_j, eval_y, eval_y_single_sum, SeriesOptions};
use volheat::specfun::{beta, erf, gamma, log_odd_double_factorial};
use volheat::volterra::volterra_residual;
use volheat::GridFunction;

/// `sum_n z^(3n) / (3n)!` by the roots-of-unity filter on `exp`.
fn trisected_exp(z: f64) -> f64 {
    ((z).exp() + 2.0 * (-0.5 * z).exp() * (0.5 * 3f64.sqrt() * z).cos()) / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn erf_is_odd_and_monotone(x in -8.0f64..8.0, dx in 1e-6f64..1.0) {
        prop_assert_eq!(erf(-x), -erf(x));
        prop_assert!(erf(x + dx) >= erf(x));
        prop_assert!(erf(x).abs() <= 1.0);
    }

    #[test]
    fn odd_double_factorial_recurrence(k in 1u64..400) {
        let m = 2 * k + 1;
        let lhs = log_odd_double_factorial(m);
        let rhs = (m as f64).ln() + log_odd_double_factorial(m - 2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn beta_is_symmetric(x in 0.05f64..20.0, y in 0.05f64..20.0) {
        let a = beta(x, y).unwrap();
        let b = beta(y, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs());
    }

    #[test]
    fn gamma_recurrence(x in 0.1f64..30.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
    }

    #[test]
    fn series_is_bit_deterministic(lambda in -6.0f64..6.0, t in 0.0f64..2.0) {
        let a = eval_y(lambda, t, 1e-12).unwrap();
        let b = eval_y(lambda, t, 1e-12).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.terms_used, b.terms_used);
    }

    #[test]
    fn parity_in_lambda(lambda in -6.0f64..6.0, t in 0.0f64..2.0) {
        let i_pos = eval_i(lambda, t, 1e-13).unwrap().value;
        let i_neg = eval_i(-lambda, t, 1e-13).unwrap().value;
        let j_pos = eval_j(lambda, t, 1e-13).unwrap().value;
        let j_neg = eval_j(-lambda, t, 1e-13).unwrap().value;
        prop_assert_eq!(i_pos, i_neg);
        prop_assert_eq!(j_pos, -j_neg);
        let y_neg = eval_y(-lambda, t, 1e-13).unwrap().value;
        let mirrored = i_pos + (2.0 / PI).sqrt() * j_pos;
        prop_assert!(rel(y_neg, mirrored) <= 1e-12);
    }

    #[test]
    fn even_part_matches_trisected_exponential(lambda in -5.0f64..5.0, t in 0.0f64..2.0) {
        prop_assume!(lambda != 0.0);
        let z = lambda.abs().powf(2.0 / 3.0) * t;
        let got = eval_i(lambda, t, 1e-14).unwrap().value;
        prop_assert!(rel(got, trisected_exp(z)) <= 1e-9, "{} vs {}", got, trisected_exp(z));
    }

    #[test]
    fn split_and_single_sums_agree(lambda in -5.0f64..5.0, t in 0.0f64..2.0) {
        let opts = SeriesOptions::new(1e-14);
        let split = eval_y(lambda, t, 1e-14).unwrap().value;
        let single = eval_y_single_sum(lambda, t, &opts).unwrap().value;
        prop_assert!(rel(split, single) <= 1e-10);
    }

    #[test]
    fn residual_vanishes_at_origin(lambda in -5.0f64..5.0, steps in 2usize..200) {
        let y = GridFunction::sample(1.0, steps, |t| eval_y(lambda, t, 1e-12).map(|e| e.value)).unwrap();
        prop_assert_eq!(volterra_residual(&y, lambda).values[0], 0.0);
    }

    #[test]
    fn temperature_is_linear_in_initial_level(
        lambda in -2.0f64..2.0,
        h0 in 0.1f64..5.0,
        x in 0.0f64..4.0,
        t in 0.05f64..1.5,
    ) {
        let one = HeatProblem::new(lambda, 1.0, 1e-13).unwrap().u(x, t).unwrap();
        let scaled = HeatProblem::new(lambda, h0, 1e-13).unwrap().u(x, t).unwrap();
        prop_assert!((scaled - h0 * one).abs() <= 1e-12 * h0.max(1.0) * one.abs().max(1.0));
    }
}
