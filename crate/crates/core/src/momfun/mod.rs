//! Moment functions of the class F(1,2): even, `f(0) = 0`, with `f''`
//! nonnegative and nonincreasing on `(0, inf)`.
//!
//! Every member is a mixture of the extreme functions
//! `psi_t(x) = x^2 - (|x| - t)_+^2`, `t in (0, inf]`; see [`MixingMeasure`].

mod altspline;
mod construct;
mod gamma;

use std::fmt;
use std::sync::Arc;

pub use altspline::{p_eff, rho, tp_eff, AltSplineParams};
pub use construct::from_second_derivative;
pub use gamma::{gamma_of, momfun_of_gamma, Atom, Density, MixingMeasure, RecoveryOptions};

use crate::error::{ensure, Result};
use crate::scalar::{lit, pos, sgn, Real};

/// Restriction of a moment function to `[0, inf)`.
///
/// Implementations only ever see nonnegative arguments; [`MomentFunction`]
/// performs the even extension.
pub trait Profile<T: Real>: Send + Sync {
    fn value(&self, a: T) -> T;
    fn slope(&self, a: T) -> T;
    /// Right derivative of the slope.
    fn curvature(&self, a: T) -> T;
    /// `value(a + delta) - value(a)` for `a >= 0`, `a + delta >= 0`.
    fn step(&self, a: T, delta: T) -> T {
        self.value(a + delta) - self.value(a)
    }
}

/// Which family a [`MomentFunction`] came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind<T> {
    Power(T),
    Extreme(T),
    AltSpline(AltSplineParams<T>),
    FromSecondDeriv,
    FromGamma,
}

/// A member of F(1,2) together with its first two derivatives.
#[derive(Clone)]
pub struct MomentFunction<T: Real> {
    kind: Kind<T>,
    profile: Arc<dyn Profile<T>>,
    support_start: T,
    homogeneous_degree: Option<T>,
}

impl<T: Real> fmt::Debug for MomentFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentFunction")
            .field("kind", &self.kind)
            .field("support_start", &self.support_start)
            .field("homogeneous_degree", &self.homogeneous_degree)
            .finish()
    }
}

/// `psi_t(x)`; `t = inf` gives `x^2`. No domain check.
#[inline]
pub(crate) fn psi_raw<T: Real>(t: T, x: T) -> T {
    let a = x.abs();
    let excess = pos(a - t);
    x * x - excess * excess
}

/// `psi_t'(x)` extended to the whole line as an odd function.
#[inline]
pub(crate) fn psi_slope_raw<T: Real>(t: T, x: T) -> T {
    sgn(x) * lit::<T>(2.0) * t.min(x.abs())
}

fn check_location<T: Real>(t: T) -> Result<()> {
    ensure!(
        t > T::zero(),
        Domain,
        "extreme function needs t > 0, got {t:?}"
    );
    Ok(())
}

/// The extreme function `psi_t(x) = x^2 - (|x| - t)_+^2`.
pub fn psi<T: Real>(t: T, x: T) -> Result<T> {
    check_location(t)?;
    Ok(psi_raw(t, x))
}

/// `psi_t'(x) = 2 min(t, x)` for `x >= 0`.
pub fn psi_prime<T: Real>(t: T, x: T) -> Result<T> {
    check_location(t)?;
    ensure!(
        x >= T::zero(),
        Domain,
        "psi_prime is defined for x >= 0, got {x:?}"
    );
    Ok(psi_slope_raw(t, x))
}

struct PowerProfile<T> {
    p: T,
}

impl<T: Real> Profile<T> for PowerProfile<T> {
    fn value(&self, a: T) -> T {
        if a == T::zero() {
            T::zero()
        } else {
            a.powf(self.p)
        }
    }

    fn slope(&self, a: T) -> T {
        if a == T::zero() {
            T::zero()
        } else {
            self.p * a.powf(self.p - T::one())
        }
    }

    fn curvature(&self, a: T) -> T {
        let two: T = lit(2.0);
        if self.p == two {
            two
        } else if a == T::zero() {
            T::infinity()
        } else {
            self.p * (self.p - T::one()) * a.powf(self.p - two)
        }
    }

    fn step(&self, a: T, delta: T) -> T {
        if a == T::zero() {
            return self.value(delta);
        }
        a.powf(self.p) * (self.p * (delta / a).ln_1p()).exp_m1()
    }
}

struct ExtremeProfile<T> {
    t: T,
}

impl<T: Real> Profile<T> for ExtremeProfile<T> {
    fn value(&self, a: T) -> T {
        psi_raw(self.t, a)
    }

    fn slope(&self, a: T) -> T {
        lit::<T>(2.0) * self.t.min(a)
    }

    fn curvature(&self, a: T) -> T {
        if a < self.t {
            lit(2.0)
        } else {
            T::zero()
        }
    }

    fn step(&self, a: T, delta: T) -> T {
        let b = a + delta;
        let two: T = lit(2.0);
        let square = delta * (two * a + delta);
        let excess = if a > self.t && b > self.t {
            delta * (two * (a - self.t) + delta)
        } else {
            let ea = pos(a - self.t);
            let eb = pos(b - self.t);
            eb * eb - ea * ea
        };
        square - excess
    }
}

impl<T: Real> MomentFunction<T> {
    pub(crate) fn from_profile(
        kind: Kind<T>,
        profile: Arc<dyn Profile<T>>,
        support_start: T,
        homogeneous_degree: Option<T>,
    ) -> Self {
        Self {
            kind,
            profile,
            support_start,
            homogeneous_degree,
        }
    }

    /// `|x|^p` for `p in (1, 2]`.
    pub fn power(p: T) -> Result<Self> {
        ensure!(
            p > T::one() && p <= lit(2.0),
            Domain,
            "power moment function needs p in (1, 2], got {p:?}"
        );
        let support_start = if p == lit(2.0) {
            T::infinity()
        } else {
            T::zero()
        };
        Ok(Self::from_profile(
            Kind::Power(p),
            Arc::new(PowerProfile { p }),
            support_start,
            Some(p),
        ))
    }

    /// The extreme function `psi_t`, `t in (0, inf]`.
    pub fn extreme(t: T) -> Result<Self> {
        check_location(t)?;
        Ok(Self::from_profile(
            Kind::Extreme(t),
            Arc::new(ExtremeProfile { t }),
            t,
            Some(lit(2.0)),
        ))
    }

    /// The square function `psi_inf(x) = x^2`.
    pub fn square() -> Self {
        Self::extreme(T::infinity()).expect("t = inf is valid")
    }

    pub fn kind(&self) -> &Kind<T> {
        &self.kind
    }

    /// Infimum of the support of the mixing measure (`inf` for `x^2`).
    pub fn support_start(&self) -> T {
        self.support_start
    }

    pub fn homogeneous_degree(&self) -> Option<T> {
        self.homogeneous_degree
    }

    /// True for `x^2` (both as `Power(2)` and as `Extreme(inf)`).
    pub fn is_square(&self) -> bool {
        match self.kind {
            Kind::Power(p) => p == lit(2.0),
            Kind::Extreme(t) => t.is_infinite(),
            _ => false,
        }
    }

    pub fn eval(&self, x: T) -> T {
        self.profile.value(x.abs())
    }

    pub fn deriv(&self, x: T) -> T {
        sgn(x) * self.profile.slope(x.abs())
    }

    /// `f''(x)`: right derivative of `f'` for `x > 0`, left derivative for
    /// `x < 0`.
    pub fn second_deriv(&self, x: T) -> T {
        self.profile.curvature(x.abs())
    }

    /// `f(x + h) - f(x)`, computed without cancellation when `x` and `x + h`
    /// lie on the same side of the origin.
    pub fn increment(&self, x: T, h: T) -> T {
        let y = x + h;
        if x != T::zero() && (sgn(y) == sgn(x) || y == x) {
            let s = sgn(x);
            self.profile.step(x.abs(), s * h)
        } else {
            self.eval(y) - self.eval(x)
        }
    }
}

/// `|x|^p`, `p in (1, 2]`.
pub fn power_momfun<T: Real>(p: T) -> Result<MomentFunction<T>> {
    MomentFunction::power(p)
}

/// `psi_t`, `t in (0, inf]`.
pub fn extreme_momfun<T: Real>(t: T) -> Result<MomentFunction<T>> {
    MomentFunction::extreme(t)
}

pub fn altspline_momfun<T: Real>(params: AltSplineParams<T>) -> MomentFunction<T> {
    MomentFunction::alt_spline(params)
}
