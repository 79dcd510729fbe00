use std::sync::Arc;

use super::{Kind, MomentFunction, Profile};
use crate::error::{ensure, Result};
use crate::scalar::{lit, Real};

const MAX_SEGMENTS: usize = 64;

/// Parameters of the parabolic spline with breakpoints `x_0 = 0`,
/// `x_j = q^(2^(j-1)) - 1`, `q = x1 + 1`, and `f'' = (x_j + 1)^(-2/3)` on
/// `[x_j, x_(j+1))`.
///
/// Breakpoints are tabulated up to the last index whose closed form is
/// finite in the scalar type; the final segment extends to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct AltSplineParams<T> {
    x1: T,
    q: T,
    ln_q: T,
    breaks: Vec<T>,
    curv: Vec<T>,
    slope_at: Vec<T>,
    offset_at: Vec<T>,
}

impl<T: Real> AltSplineParams<T> {
    pub fn new(x1: T) -> Result<Self> {
        ensure!(
            x1 > T::zero() && x1.is_finite(),
            Domain,
            "x1 must be positive, got {x1:?}"
        );
        let ln_q = x1.ln_1p();
        let third: T = lit(2.0 / 3.0);
        let mut breaks = vec![T::zero()];
        let mut curv = vec![T::one()];
        let mut slope_at = vec![T::zero()];
        let mut offset_at = vec![T::zero()];
        for j in 1..MAX_SEGMENTS {
            let ln_x1 = lit::<T>(2f64.powi(j as i32 - 1)) * ln_q;
            let xj = ln_x1.exp_m1();
            let k = j - 1;
            let width = xj - breaks[k];
            let w = width * curv[k];
            let mid = breaks[k] + width / lit(2.0);
            let s1 = slope_at[k] + w;
            let s2 = offset_at[k] + mid * w;
            let c = (-third * ln_x1).exp();
            if !(xj.is_finite() && s1.is_finite() && s2.is_finite() && (xj * s1).is_finite()) {
                break;
            }
            breaks.push(xj);
            curv.push(c);
            slope_at.push(s1);
            offset_at.push(s2);
        }
        Ok(Self {
            x1,
            q: x1 + T::one(),
            ln_q,
            breaks,
            curv,
            slope_at,
            offset_at,
        })
    }

    pub fn x1(&self) -> T {
        self.x1
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// Tabulated breakpoints `x_0 = 0, x_1, ..., x_J`.
    pub fn breakpoints(&self) -> &[T] {
        &self.breaks
    }

    /// `x_j` from the closed form; may be infinite.
    pub fn breakpoint(&self, j: usize) -> T {
        if j == 0 {
            return T::zero();
        }
        (lit::<T>(2f64.powi(j as i32 - 1)) * self.ln_q).exp_m1()
    }

    /// Index `j` with `a` in `[x_j, x_(j+1))`.
    pub fn segment(&self, a: T) -> usize {
        self.breaks.partition_point(|&b| b <= a).saturating_sub(1)
    }

    /// `log_q(x + 1)`.
    pub fn log_q1p(&self, x: T) -> T {
        x.abs().ln_1p() / self.ln_q
    }

    /// Closed form on segment `j`, valid for any `a` (used for one-sided
    /// limits at breakpoints).
    pub(crate) fn value_on(&self, j: usize, a: T) -> T {
        let d = a - self.breaks[j];
        d * d * self.curv[j] / lit(2.0) + a * self.slope_at[j] - self.offset_at[j]
    }

    pub(crate) fn slope_on(&self, j: usize, a: T) -> T {
        (a - self.breaks[j]) * self.curv[j] + self.slope_at[j]
    }
}

struct AltProfile<T> {
    params: AltSplineParams<T>,
}

impl<T: Real> Profile<T> for AltProfile<T> {
    fn value(&self, a: T) -> T {
        self.params.value_on(self.params.segment(a), a)
    }

    fn slope(&self, a: T) -> T {
        self.params.slope_on(self.params.segment(a), a)
    }

    fn curvature(&self, a: T) -> T {
        self.params.curv[self.params.segment(a)]
    }

    fn step(&self, a: T, delta: T) -> T {
        let j = self.params.segment(a);
        if self.params.segment(a + delta) != j {
            return self.value(a + delta) - self.value(a);
        }
        // exact within a parabolic piece
        let slope = self.params.slope_on(j, a);
        delta * (slope + self.params.curv[j] * delta / lit(2.0))
    }
}

impl<T: Real> MomentFunction<T> {
    pub fn alt_spline(params: AltSplineParams<T>) -> Self {
        let profile = AltProfile {
            params: params.clone(),
        };
        Self::from_profile(Kind::AltSpline(params), Arc::new(profile), T::zero(), None)
    }
}

/// `ln f(x) / ln x`, the exponent with `f(x) = x^p_eff`.
pub fn p_eff<T: Real>(params: &AltSplineParams<T>, x: T) -> Result<T> {
    ensure!(x > T::one(), Domain, "p_eff needs x > 1, got {x:?}");
    let f = AltProfile {
        params: params.clone(),
    }
    .value(x);
    Ok(f.ln() / x.ln())
}

/// `2^(1-j) log_q(x + 1)` where `x` lies in `(x_j, x_(j+1)]`, `j >= 1`.
pub fn rho<T: Real>(params: &AltSplineParams<T>, x: T) -> Result<T> {
    ensure!(
        x > params.x1,
        Domain,
        "rho needs x > x1 = {:?}, got {x:?}",
        params.x1
    );
    let l = params.log_q1p(x);
    let two: T = lit(2.0);
    let mut j = l.log2().ceil().to_i32().unwrap_or(1).max(1);
    while l > two.powi(j) {
        j += 1;
    }
    while j > 1 && l <= two.powi(j - 1) {
        j -= 1;
    }
    Ok(l / two.powi(j - 1))
}

/// `max(2 - 2/(3r), 1 + 2/(3r))`.
pub fn tp_eff<T: Real>(r: T) -> T {
    let u = lit::<T>(2.0) / (lit::<T>(3.0) * r);
    (lit::<T>(2.0) - u).max(T::one() + u)
}
