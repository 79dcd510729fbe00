use crate::scalar::{lit, Real};

/// Location and value of a located extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub arg: T,
    pub value: T,
    pub evaluations: usize,
}

/// Golden-section maximization of a unimodal (quasi-concave) function on
/// `[lo, hi]`.
///
/// Iterates until the bracket is narrower than `width_tol`, then tries the
/// vertex of the parabola through the three best bracketing points. The
/// returned value is always an actual evaluation of `f`.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, width_tol: T) -> Extremum<T> {
    let inv_phi: T = lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    let max_iter = 400;
    let mut iter = 0;
    while (b - a) > width_tol && iter < max_iter {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        evals += 1;
        iter += 1;
    }
    let (mut best_x, mut best_f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };

    // parabolic refinement through (x1, x2) and the midpoint
    let xm = (x1 + x2) * lit(0.5);
    if xm != x1 && xm != x2 {
        let fm = f(xm);
        evals += 1;
        if fm > best_f {
            best_x = xm;
            best_f = fm;
        }
        let (p, q, r) = (x1, xm, x2);
        let (fp, fq, fr) = (f1, fm, f2);
        let num = (q - p) * (q - p) * (fq - fr) - (q - r) * (q - r) * (fq - fp);
        let den = (q - p) * (fq - fr) - (q - r) * (fq - fp);
        if den != T::zero() {
            let xv = q - lit::<T>(0.5) * num / den;
            if xv.is_finite() && xv > lo && xv < hi {
                let fv = f(xv);
                evals += 1;
                if fv > best_f {
                    best_x = xv;
                    best_f = fv;
                }
            }
        }
    }
    Extremum {
        arg: best_x,
        value: best_f,
        evaluations: evals,
    }
}

/// Golden-section minimization; see [`golden_max`].
pub fn golden_min<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, width_tol: T) -> Extremum<T> {
    let e = golden_max(|x| -f(x), lo, hi, width_tol);
    Extremum {
        value: -e.value,
        ..e
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns `None` when `f(lo)` and `f(hi)` do not have opposite signs.
pub fn bisect_root<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, width_tol: T) -> Option<T> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Some(a);
    }
    if fb == T::zero() {
        return Some(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) || fa.is_nan() || fb.is_nan() {
        return None;
    }
    let neg_at_lo = fa < T::zero();
    for _ in 0..2000 {
        let m = a + (b - a) * lit(0.5);
        if (b - a) <= width_tol || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == T::zero() {
            return Some(m);
        }
        if (fm < T::zero()) == neg_at_lo {
            a = m;
        } else {
            b = m;
        }
    }
    Some(a + (b - a) * lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_max_quadratic() {
        let e = golden_max(|x: f64| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-12);
        assert!((e.arg - 0.3).abs() < 1e-7);
        assert!((e.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn golden_max_kinked() {
        let e = golden_max(|x: f64| 1.0 - (x - 0.71).abs(), 0.0, 1.0, 1e-13);
        assert!((e.arg - 0.71).abs() < 1e-11);
    }

    #[test]
    fn golden_min_convex() {
        let e = golden_min(|x: f64| (x - 2.5).powi(4), 0.0, 10.0, 1e-12);
        assert!((e.arg - 2.5).abs() < 1e-3);
        assert!(e.value < 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect_root(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisect_rejects_no_sign_change() {
        assert!(bisect_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn works_in_f32() {
        let e = golden_max(|x: f32| -(x - 0.25) * (x - 0.25), 0.0, 1.0, 1e-6);
        assert!((e.arg - 0.25).abs() < 1e-3);
    }
}
