use rayon::prelude::*;

use super::power::power_constant;
use super::{ConstantResult, Method};
use crate::error::{ensure, Result};
use crate::momfun::{Kind, MomentFunction};
use crate::numerics::golden_max;
use crate::scalar::{lit, log_grid, Real};

/// `L_{f;s}(x) = f(x - s) - f(x) + s f'(x)` for `0 < x < s`.
pub fn moment_kernel<T: Real>(f: &MomentFunction<T>, s: T, x: T) -> Result<T> {
    ensure!(
        x > T::zero() && x < s,
        Domain,
        "kernel needs 0 < x < s, got x = {x:?}, s = {s:?}"
    );
    Ok(kernel_unchecked(f, s, x))
}

#[inline]
pub(crate) fn kernel_unchecked<T: Real>(f: &MomentFunction<T>, s: T, x: T) -> T {
    f.eval(s - x) - f.eval(x) + s * f.deriv(x)
}

/// `max_{0<x<s} L_{f;s}(x) / f(s)` by golden section; the kernel is
/// unimodal in `x`.
pub fn normalized_kernel_max<T: Real>(f: &MomentFunction<T>, s: T) -> Result<ConstantResult<T>> {
    ensure!(
        s > T::zero() && s.is_finite(),
        Domain,
        "s must be positive and finite, got {s:?}"
    );
    let fs = f.eval(s);
    ensure!(fs > T::zero(), Domain, "f(s) must be positive, got {fs:?}");
    let tol = lit::<T>(1e-12) * s;
    let best = golden_max(|x| kernel_unchecked(f, s, x) / fs, T::zero(), s, tol);
    Ok(ConstantResult {
        value: best.value,
        witness: vec![("s".into(), s), ("x".into(), best.arg)],
        method: Method::GoldenSection,
        abs_tol: lit(1e-12),
        attained_in_limit: false,
    })
}

/// Outer grid for [`sharp_constant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupGrid<T> {
    pub s_max: T,
    pub n_s: usize,
}

impl<T: Real> Default for SupGrid<T> {
    fn default() -> Self {
        Self {
            s_max: lit(1e4),
            n_s: 200,
        }
    }
}

/// The sharp constant `C_f = sup_{s > s_f} max_x L_{f;s}(x) / f(s)`.
///
/// Closed forms for the extreme functions and the powers. Otherwise the
/// supremum of the normalized kernel max over a log grid of `n_s` points in
/// `(s_f, s_max]`, refined by golden section around the best grid point.
/// That value is an actual evaluation, hence a lower bound for `C_f`.
pub fn sharp_constant<T: Real>(
    f: &MomentFunction<T>,
    grid: SupGrid<T>,
) -> Result<ConstantResult<T>> {
    ensure!(
        grid.n_s >= 8,
        Configuration,
        "need at least 8 grid points, got {}",
        grid.n_s
    );
    if f.is_square() {
        return Ok(ConstantResult::exact(T::one()));
    }
    match f.kind() {
        Kind::Extreme(_) => {
            return Ok(ConstantResult {
                attained_in_limit: true,
                ..ConstantResult::exact(lit(2.0))
            });
        }
        Kind::Power(p) => return power_constant(*p),
        _ => {}
    }
    let s_f = f.support_start();
    if s_f.is_infinite() {
        return Ok(ConstantResult::exact(T::one()));
    }
    let lo = s_f + lit::<T>(1e-6) * (T::one() + s_f);
    ensure!(
        grid.s_max > lo,
        Configuration,
        "s_max = {:?} must exceed {lo:?}",
        grid.s_max
    );

    let ss = log_grid(lo, grid.s_max, grid.n_s);
    let vals: Vec<T> = ss
        .par_iter()
        .map(|&s| normalized_kernel_max(f, s).map(|r| r.value))
        .collect::<Result<Vec<T>>>()?;
    let (mut i_best, mut v_best) = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate() {
        if v > v_best {
            i_best = i;
            v_best = v;
        }
    }
    let mut s_best = ss[i_best];
    let (a, b) = (
        ss[i_best.saturating_sub(1)].ln(),
        ss[(i_best + 1).min(ss.len() - 1)].ln(),
    );
    let refined = golden_max(
        |u| {
            normalized_kernel_max(f, u.exp())
                .map(|r| r.value)
                .unwrap_or(T::neg_infinity())
        },
        a,
        b,
        lit(1e-10),
    );
    if refined.value > v_best {
        v_best = refined.value;
        s_best = refined.arg.exp();
    }
    ensure!(
        v_best >= T::one() - lit(1e-9) && v_best <= lit::<T>(2.0) + lit(1e-9),
        InvariantViolation,
        "normalized kernel sup {v_best:?} outside [1, 2]"
    );
    let x_best = normalized_kernel_max(f, s_best)?
        .witness("x")
        .unwrap_or(T::nan());
    Ok(ConstantResult {
        value: v_best,
        witness: vec![("s".into(), s_best), ("x".into(), x_best)],
        method: Method::GridSup,
        abs_tol: lit(1e-9),
        attained_in_limit: i_best + 1 == ss.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momfun::{from_second_derivative, AltSplineParams};

    #[test]
    fn kernel_examples() {
        let sq = MomentFunction::<f64>::square();
        for (s, x) in [(1.0, 0.3), (5.0, 4.9), (0.2, 0.01)] {
            assert!((moment_kernel(&sq, s, x).unwrap() - s * s).abs() < 1e-12);
        }
        let psi = MomentFunction::<f64>::extreme(1.0).unwrap();
        for (s, x) in [(1.0, 0.3), (0.5, 0.2), (0.9, 0.89)] {
            assert!((moment_kernel(&psi, s, x).unwrap() - psi.eval(s)).abs() < 1e-14);
        }
        let f = MomentFunction::<f64>::power(1.5).unwrap();
        let want = 0.75f64.powf(1.5) - 0.25f64.powf(1.5) + 1.5 * 0.5;
        assert!((moment_kernel(&f, 1.0, 0.25).unwrap() - want).abs() < 1e-15);
        assert!(moment_kernel(&f, 1.0, 1.0).is_err());
        assert!(moment_kernel(&f, 1.0, 0.0).is_err());
    }

    #[test]
    fn normalized_max_examples() {
        let psi = MomentFunction::<f64>::extreme(1.0).unwrap();
        let r = normalized_kernel_max(&psi, 3.0).unwrap();
        assert!((r.value - 1.6).abs() < 1e-11);
        assert!((r.witness("x").unwrap() - 1.0).abs() < 1e-6);
        let sq = MomentFunction::<f64>::square();
        assert!((normalized_kernel_max(&sq, 1.0).unwrap().value - 1.0).abs() < 1e-14);
        let f = MomentFunction::<f64>::power(1.5).unwrap();
        for s in [0.5, 1.0, 7.0] {
            let v = normalized_kernel_max(&f, s).unwrap().value;
            assert!((v - 1.306_562_964_876_376_6).abs() < 1e-10, "s={s}");
        }
    }

    #[test]
    fn closed_forms() {
        let g = SupGrid::default();
        assert_eq!(
            sharp_constant(&MomentFunction::<f64>::square(), g)
                .unwrap()
                .value,
            1.0
        );
        for t in [0.1, 1.0, 5.0, 10.0] {
            let r = sharp_constant(&MomentFunction::<f64>::extreme(t).unwrap(), g).unwrap();
            assert_eq!(r.value, 2.0);
            assert_eq!(r.method, Method::ClosedForm);
        }
        assert!(sharp_constant(
            &MomentFunction::<f64>::square(),
            SupGrid {
                s_max: 10.0,
                n_s: 7
            }
        )
        .is_err());
    }

    #[test]
    fn alt_spline_is_not_monotone_in_s() {
        let f = MomentFunction::<f64>::alt_spline(AltSplineParams::new(0.2).unwrap());
        let a = normalized_kernel_max(&f, 1.06).unwrap().value;
        let b = normalized_kernel_max(&f, 1.07).unwrap().value;
        assert!(b < a, "{a} {b}");
    }

    #[test]
    fn grid_sup_is_between_one_and_two() {
        let f = from_second_derivative(|x: f64| (1.0 + x).powi(-2), &[]).unwrap();
        let r = sharp_constant(
            &f,
            SupGrid {
                s_max: 1e3,
                n_s: 16,
            },
        )
        .unwrap();
        assert!(r.value > 1.0 && r.value <= 2.0, "{r:?}");
        assert_eq!(r.method, Method::GridSup);
    }
}
