use rayon::prelude::*;

use super::{ConstantResult, Method};
use crate::error::{ensure, Result};
use crate::momfun::{Kind, MomentFunction};
use crate::numerics::{golden_max, golden_min};
use crate::scalar::{lit, log_grid, pos, Real};

/// `U_f(c, s, a) = c f(s - c + a) + (s - c) f(a - c)`.
pub fn two_point_objective<T: Real>(f: &MomentFunction<T>, c: T, s: T, a: T) -> Result<T> {
    ensure!(
        c > T::zero() && c < s,
        Domain,
        "need 0 < c < s, got c = {c:?}, s = {s:?}"
    );
    Ok(objective(f, c, s, a))
}

#[inline]
fn objective<T: Real>(f: &MomentFunction<T>, c: T, s: T, a: T) -> T {
    c * f.eval(s - c + a) + (s - c) * f.eval(a - c)
}

/// `c - c^k / (c^k + (1-c)^k)`, `k = 1/(p-1)`: the minimizer at `s = 1` for
/// `|.|^p`.
fn power_shift<T: Real>(p: T, c: T) -> T {
    let k = T::one() / (p - T::one());
    let r = ((T::one() - c) / c).powf(k);
    c - T::one() / (T::one() + r)
}

/// Minimizer `a_{f;c,s}` of the convex map `a -> U_f(c, s, a)`, which lies
/// in `[0, c)`.
pub fn centring_shift<T: Real>(f: &MomentFunction<T>, c: T, s: T) -> Result<ConstantResult<T>> {
    ensure!(
        c > T::zero() && lit::<T>(2.0) * c < s && s.is_finite(),
        Domain,
        "need 0 < c < s/2, got c = {c:?}, s = {s:?}"
    );
    let closed = match f.kind() {
        Kind::Extreme(t) => Some(c / (s - c) * pos(s - c - *t)),
        Kind::Power(p) => Some(s * power_shift(*p, c / s)),
        _ => None,
    };
    if let Some(a) = closed {
        return Ok(ConstantResult::exact(a).with_witness("a", a));
    }
    let best = golden_min(|a| objective(f, c, s, a), T::zero(), c, lit::<T>(1e-13) * c);
    let a = best.arg.max(T::zero()).min(c);
    Ok(ConstantResult {
        value: a,
        witness: vec![("a".into(), a)],
        method: Method::GoldenSection,
        abs_tol: lit::<T>(1e-8) * c,
        attained_in_limit: false,
    })
}

/// Outer grid for [`centring_constant`]: `c` values and ratios `s / c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentringGrid<T> {
    pub c_values: Vec<T>,
    pub s_over_c: Vec<T>,
}

impl<T: Real> Default for CentringGrid<T> {
    fn default() -> Self {
        Self {
            c_values: log_grid(lit(1e-3), lit(1e3), 61),
            s_over_c: [2.5, 4.0, 10.0, 100.0, 1000.0]
                .iter()
                .map(|&r| lit(r))
                .collect(),
        }
    }
}

fn ratio_at<T: Real>(f: &MomentFunction<T>, c: T, s: T) -> T {
    match centring_shift(f, c, s) {
        Ok(a) => objective(f, c, s, T::zero()) / objective(f, c, s, a.value),
        Err(_) => T::neg_infinity(),
    }
}

/// `kappa_f = sup U_f(c, s, 0) / min_a U_f(c, s, a)` over the grid, then
/// refined by golden section in `s / c` and in `c` around the best point.
pub fn centring_constant<T: Real>(
    f: &MomentFunction<T>,
    grid: &CentringGrid<T>,
) -> Result<ConstantResult<T>> {
    ensure!(
        !grid.c_values.is_empty() && !grid.s_over_c.is_empty(),
        Configuration,
        "empty centring grid"
    );
    ensure!(
        grid.c_values.iter().all(|c| *c > T::zero()) && grid.s_over_c.iter().all(|r| *r > lit(2.0)),
        Configuration,
        "grid needs c > 0 and s / c > 2"
    );
    let mut cs = grid.c_values.clone();
    let mut rs = grid.s_over_c.clone();
    cs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    rs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

    let points: Vec<(usize, usize)> = (0..cs.len())
        .flat_map(|i| (0..rs.len()).map(move |j| (i, j)))
        .collect();
    let vals: Vec<T> = points
        .par_iter()
        .map(|&(i, j)| ratio_at(f, cs[i], rs[j] * cs[i]))
        .collect();
    let mut k_best = 0;
    for (k, v) in vals.iter().enumerate() {
        if *v > vals[k_best] {
            k_best = k;
        }
    }
    let (i, j) = points[k_best];
    let (mut c_best, mut r_best, mut v_best) = (cs[i], rs[j], vals[k_best]);

    let nb = |v: &[T], k: usize| {
        (
            v[k.saturating_sub(1)].ln(),
            v[(k + 1).min(v.len() - 1)].ln(),
        )
    };
    let (a, b) = nb(&rs, j);
    if a < b {
        let e = golden_max(|u| ratio_at(f, c_best, u.exp() * c_best), a, b, lit(1e-9));
        if e.value > v_best {
            v_best = e.value;
            r_best = e.arg.exp();
        }
    }
    let (a, b) = nb(&cs, i);
    if a < b {
        let e = golden_max(|u| ratio_at(f, u.exp(), r_best * u.exp()), a, b, lit(1e-9));
        if e.value > v_best {
            v_best = e.value;
            c_best = e.arg.exp();
        }
    }
    ensure!(
        v_best >= T::one() - lit(1e-9) && v_best <= lit::<T>(2.0) + lit(1e-9),
        InvariantViolation,
        "centring ratio {v_best:?} outside [1, 2]"
    );
    let boundary = i == 0 || i + 1 == cs.len() || j == 0 || j + 1 == rs.len();
    Ok(ConstantResult {
        value: v_best,
        witness: vec![("c".into(), c_best), ("s".into(), r_best * c_best)],
        method: Method::NestedOpt,
        abs_tol: lit(1e-9),
        attained_in_limit: boundary,
    })
}

/// `(c^(p-1) + (1-c)^(p-1)) (c^(1/(p-1)) + (1-c)^(1/(p-1)))^(p-1)`.
fn tkappa_objective<T: Real>(p: T, c: T) -> T {
    let q = p - T::one();
    let first = c.powf(q) + (T::one() - c).powf(q);
    let second = (T::one() - c) * (T::one() + (c / (T::one() - c)).powf(T::one() / q)).powf(q);
    first * second
}

/// `tkappa_p = max_{c in [0, 1/2]}` of the product above.
pub fn power_centring_constant<T: Real>(p: T) -> Result<ConstantResult<T>> {
    ensure!(
        p > T::one() && p <= lit(2.0),
        Domain,
        "p must lie in (1, 2], got {p:?}"
    );
    if p == lit(2.0) {
        return Ok(ConstantResult::exact(T::one()));
    }
    let half: T = lit(0.5);
    let n = 400;
    let step = half / T::from_usize(n).expect("small");
    let mut k_best = 0;
    let mut v_best = T::neg_infinity();
    for k in 0..=n {
        let v = tkappa_objective(p, T::from_usize(k).expect("small") * step);
        if v > v_best {
            v_best = v;
            k_best = k;
        }
    }
    let lo = T::from_usize(k_best.saturating_sub(1)).expect("small") * step;
    let hi = (T::from_usize(k_best + 1).expect("small") * step).min(half);
    let e = golden_max(|c| tkappa_objective(p, c), lo, hi, lit(1e-15));
    let (c, v) = if e.value > v_best {
        (e.arg, e.value)
    } else {
        (T::from_usize(k_best).expect("small") * step, v_best)
    };
    Ok(ConstantResult {
        value: v,
        witness: vec![("c".into(), c)],
        method: Method::GoldenSection,
        abs_tol: lit(1e-13),
        attained_in_limit: false,
    })
}
