use std::sync::Arc;

use super::{Kind, MomentFunction, Profile};
use crate::error::{ensure, Error, Result};
use crate::numerics::Quadrature;
use crate::scalar::{lit, log_grid, Real};

type Curvature<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

struct IntegratedProfile<T: Real> {
    g: Curvature<T>,
    breaks: Vec<T>,
    quad: Quadrature<T>,
}

impl<T: Real> IntegratedProfile<T> {
    fn panels(&self, a: T) -> Vec<T> {
        self.breaks
            .iter()
            .copied()
            .filter(|&b| b > T::zero() && b < a)
            .collect()
    }

    fn try_slope(&self, a: T) -> Result<T> {
        if a == T::zero() {
            return Ok(T::zero());
        }
        let g = &self.g;
        self.quad
            .integrate_panels(|v| g(v), T::zero(), a, &self.panels(a))
    }

    fn try_value(&self, a: T) -> Result<T> {
        if a == T::zero() {
            return Ok(T::zero());
        }
        let g = &self.g;
        self.quad
            .integrate_panels(|v| (a - v) * g(v), T::zero(), a, &self.panels(a))
    }
}

impl<T: Real> Profile<T> for IntegratedProfile<T> {
    fn value(&self, a: T) -> T {
        self.try_value(a).unwrap_or_else(|_| T::nan())
    }

    fn slope(&self, a: T) -> T {
        self.try_slope(a).unwrap_or_else(|_| T::nan())
    }

    fn curvature(&self, a: T) -> T {
        (self.g)(a)
    }
}

/// Builds `f` from `f'' = g` on `(0, inf)` by `f'(x) = int_0^x g` and
/// `f(x) = int_0^x (x - v) g(v) dv`.
///
/// `breakpoints` mark kinks or jumps of `g`. `g` is sampled on a log grid
/// over `[1e-9, 1e9]` (and next to each breakpoint) to confirm it is
/// nonnegative and nonincreasing.
pub fn from_second_derivative<T, G>(g: G, breakpoints: &[T]) -> Result<MomentFunction<T>>
where
    T: Real,
    G: Fn(T) -> T + Send + Sync + 'static,
{
    let mut breaks: Vec<T> = breakpoints.to_vec();
    ensure!(
        breaks.iter().all(|b| b.is_finite() && *b > T::zero()),
        Construction,
        "breakpoints must be positive and finite"
    );
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breaks.dedup();

    let mut probes = log_grid(lit::<T>(1e-9), lit(1e9), 361);
    for &b in &breaks {
        probes.push(b * (T::one() - lit(1e-9)));
        probes.push(b);
    }
    probes.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let values: Vec<T> = probes.iter().map(|&x| g(x)).collect();
    for (i, &v) in values.iter().enumerate() {
        ensure!(
            v.is_finite() && v >= T::zero(),
            Construction,
            "second derivative must be finite and nonnegative, g({:?}) = {v:?}",
            probes[i]
        );
        if i > 0 {
            let prev = values[i - 1];
            ensure!(
                v <= prev + lit::<T>(1e-12) * prev.max(T::one()),
                Construction,
                "second derivative increases between {:?} and {:?}",
                probes[i - 1],
                probes[i]
            );
        }
    }

    let first = values[0];
    let flat_until = probes
        .iter()
        .zip(&values)
        .take_while(|(_, &v)| v >= first * (T::one() - lit(1e-12)))
        .last()
        .map(|(&x, _)| x)
        .unwrap_or(T::zero());
    let support_start = if flat_until == *probes.last().expect("nonempty") {
        T::infinity()
    } else if flat_until == probes[0] {
        T::zero()
    } else {
        flat_until
    };

    let quad = Quadrature {
        abs_tol: lit(1e-13),
        rel_tol: lit(1e-13),
        max_panels: 4000,
    };
    let profile = IntegratedProfile {
        g: Arc::new(g),
        breaks,
        quad,
    };
    profile.try_slope(T::one()).map_err(|e| {
        Error::Construction(format!("second derivative not integrable near 0: {e}"))
    })?;
    Ok(MomentFunction::from_profile(
        Kind::FromSecondDeriv,
        Arc::new(profile),
        support_start,
        None,
    ))
}
