//! One-dimensional optimizers, root finding, quadrature, the gamma function
//! and low-discrepancy point sets.

pub mod lanczos;
pub mod lowdisc;
pub mod optimize;
pub mod quadrature;

pub use lanczos::gamma;
pub use lowdisc::KroneckerSequence;
pub use optimize::{bisect_root, golden_max, golden_min, Extremum};
pub use quadrature::{integrate, Quadrature};
