//! Sharp constants for the martingale moment inequality
//! `E f(S_n) <= E f(X_1) + C_f sum_{j>=2} E f(X_j)` over the class F(1,2),
//! with exact-expectation verification on finite-support martingales.
//!
//! The math core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`, which is what sweeps and tolerances assume.

// negated comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod ineqcheck;
pub mod momfun;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type MomentFn = momfun::MomentFunction<f64>;
pub type GammaMeasure = momfun::MixingMeasure<f64>;
pub type AltParams = momfun::AltSplineParams<f64>;
