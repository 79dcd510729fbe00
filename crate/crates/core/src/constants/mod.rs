//! Sharp constants and explicit bounds: `C_f`, `x_p`, `tC_p` with its
//! bracketing bounds, `W_p`, `D(p)`, `C_p^vBE`, the centring constants
//! `kappa_f`, `tkappa_p`, and the reduced factor `K`.

mod centring;
mod kernel;
mod power;

use std::fmt;

pub use centring::{
    centring_constant, centring_shift, power_centring_constant, two_point_objective, CentringGrid,
};
pub use kernel::{moment_kernel, normalized_kernel_max, sharp_constant, SupGrid};
pub use power::{
    power_argmax, power_bounds, power_constant, power_kernel, power_root_residual, vbe_constant,
    vbe_d, w_bound, PowerConstants,
};

use crate::error::{ensure, Result};
use crate::scalar::Real;

/// How a constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    RootFind,
    GoldenSection,
    GridSup,
    NestedOpt,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::ClosedForm => "closed_form",
            Method::RootFind => "root_find",
            Method::GoldenSection => "golden_section",
            Method::GridSup => "grid_sup",
            Method::NestedOpt => "nested_opt",
        };
        f.write_str(s)
    }
}

/// A computed constant with the coordinates where it is attained.
///
/// `GridSup` and `NestedOpt` values are actual evaluations of the objective,
/// hence lower bounds for the supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantResult<T> {
    pub value: T,
    pub witness: Vec<(String, T)>,
    pub method: Method,
    pub abs_tol: T,
    pub attained_in_limit: bool,
}

impl<T: Real> ConstantResult<T> {
    pub(crate) fn exact(value: T) -> Self {
        Self {
            value,
            witness: Vec::new(),
            method: Method::ClosedForm,
            abs_tol: T::epsilon(),
            attained_in_limit: false,
        }
    }

    pub(crate) fn with_witness(mut self, name: &str, v: T) -> Self {
        self.witness.push((name.to_string(), v));
        self
    }

    /// Witness coordinate by name.
    pub fn witness(&self, name: &str) -> Option<T> {
        self.witness
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// `K = C - (lambda / n)(C - 1)`.
pub fn reduced_constant<T: Real>(c: T, lambda: T, n: usize) -> Result<T> {
    ensure!(c >= T::one(), Domain, "constant must be >= 1, got {c:?}");
    ensure!(n >= 2, Domain, "need n >= 2, got {n}");
    ensure!(
        lambda > T::zero(),
        Domain,
        "lambda must be positive, got {lambda:?}"
    );
    let n_t = T::from_usize(n).expect("n fits");
    ensure!(lambda <= n_t, Domain, "lambda = {lambda:?} exceeds n = {n}");
    Ok(c - lambda / n_t * (c - T::one()))
}
