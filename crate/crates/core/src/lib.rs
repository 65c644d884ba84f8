//! Explicit and numerical solutions of the weakly singular Volterra equation
//!
//! ```text
//! y(t) = 1 - (2 lambda / sqrt(pi)) int_0^t y(tau) sqrt(t - tau) dtau
//! ```
//!
//! together with the singular third-order ODE it is equivalent to, the
//! nonclassical heat problem whose solution it drives, and the
//! parameter-dependence bounds for both.
//!
//! - [`specfun`]: erf, Gamma, Beta, log-factorials.
//! - [`series`]: the explicit `I`, `J`, `y` series and their derivatives.
//! - [`volterra`]: product integration, marching solver, Adomian terms.
//! - [`odecheck`]: residuals of the ODE, its conditions and the derivative identities.
//! - [`heat`]: temperature, boundary flux and PDE defect.
//! - [`bounds`]: admissible-parameter threshold and measured-vs-bound reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod heat;
pub mod odecheck;
pub mod quad;
pub mod series;
pub mod specfun;
pub mod volterra;

pub use error::{Error, Result};
pub use series::{ModelParams, SeriesEvaluation, SeriesOptions};
pub use volterra::GridFunction;
