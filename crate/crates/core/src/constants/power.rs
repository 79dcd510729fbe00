use super::{ConstantResult, Method};
use crate::error::{ensure, Error, Result};
use crate::numerics::{bisect_root, gamma};
use crate::scalar::{lit, Real};

fn check_open<T: Real>(p: T) -> Result<()> {
    ensure!(
        p > T::one() && p < lit(2.0),
        Domain,
        "p must lie in (1, 2), got {p:?}"
    );
    Ok(())
}

fn check_half_open<T: Real>(p: T) -> Result<()> {
    ensure!(
        p > T::one() && p <= lit(2.0),
        Domain,
        "p must lie in (1, 2], got {p:?}"
    );
    Ok(())
}

/// `ell(p, x) = (1 - x)^p - x^p + p x^(p-1)`, the kernel of `|.|^p` at `s = 1`.
pub fn power_kernel<T: Real>(p: T, x: T) -> Result<T> {
    check_half_open(p)?;
    ensure!(
        x > T::zero() && x < T::one(),
        Domain,
        "x must lie in (0, 1), got {x:?}"
    );
    Ok((T::one() - x).powf(p) - x.powf(p) + p * x.powf(p - T::one()))
}

/// `(1 - x)^(p-1) + x^(p-1) - (p-1) x^(p-2)`.
pub fn power_root_residual<T: Real>(p: T, x: T) -> T {
    let q = p - T::one();
    (T::one() - x).powf(q) + x.powf(q) - q * x.powf(p - lit(2.0))
}

/// The maximizer `x_p` of `ell(p, .)` on `(0, 1)`, by bisection on
/// `((p-1)/5, (p-1)/2)`.
pub fn power_argmax<T: Real>(p: T) -> Result<ConstantResult<T>> {
    check_open(p)?;
    let q = p - T::one();
    let (lo, hi) = (q / lit(5.0), q / lit(2.0));
    // residual times x^(2-p): same sign, no blow-up as x -> 0
    let scaled = |x: T| x.powf(T::one() - q) * (T::one() - x).powf(q) + x - q;
    let tol = lit::<T>(4.0) * T::epsilon() * hi;
    let x = bisect_root(scaled, lo, hi, tol).ok_or_else(|| {
        Error::Internal(format!(
            "no sign change of the x_p equation on ({lo:?}, {hi:?}) at p = {p:?}"
        ))
    })?;
    Ok(ConstantResult {
        value: x,
        witness: vec![("p".into(), p)],
        method: Method::RootFind,
        abs_tol: tol.max(lit(1e-15)),
        attained_in_limit: false,
    })
}

/// `tC_p = max_x ell(p, x)`, the sharp constant for `|.|^p`.
pub fn power_constant<T: Real>(p: T) -> Result<ConstantResult<T>> {
    check_half_open(p)?;
    if p == lit(2.0) {
        return Ok(ConstantResult::exact(T::one()));
    }
    let xp = power_argmax(p)?;
    let value = power_kernel(p, xp.value)?;
    Ok(ConstantResult {
        value,
        witness: vec![("x".into(), xp.value)],
        method: Method::RootFind,
        abs_tol: lit(1e-13),
        attained_in_limit: false,
    })
}

/// `W_p = 2^(2-p)`.
pub fn w_bound<T: Real>(p: T) -> T {
    lit::<T>(2.0).powf(lit::<T>(2.0) - p)
}

/// `tC_p` together with its explicit bracketing bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConstants<T> {
    pub p: T,
    /// Undefined (`NaN`) at `p = 2`.
    pub x_p: T,
    pub tc: T,
    pub lower_1: T,
    pub lower_2: T,
    pub upper_1: T,
    pub upper_2: T,
    pub w: T,
}

impl<T: Real> PowerConstants<T> {
    /// `max(lower) < tC < min(upper) <= upper_2 < W`.
    pub fn chain_holds(&self) -> bool {
        self.lower_1.max(self.lower_2) < self.tc
            && self.tc < self.upper_1.min(self.upper_2)
            && self.upper_2 < self.w
    }
}

pub fn power_bounds<T: Real>(p: T) -> Result<PowerConstants<T>> {
    check_half_open(p)?;
    let c = |v: f64| lit::<T>(v);
    let q = p - T::one();
    let qq = if q == T::zero() { T::one() } else { q.powf(q) };
    let two_p = c(2.0).powf(-p);
    let five_p = c(5.0).powf(-p);
    let lower_1 = two_p * ((c(3.0) - p).powf(p) + qq * (p + T::one()));
    let lower_2 = five_p * ((c(6.0) - p).powf(p) + qq * (c(4.0) * p + T::one()));
    let p2 = p * p;
    let p3 = p2 * p;
    let upper_1 = two_p / (c(50.0) * (c(3.0) - p))
        * (qq * (c(150.0) + c(181.0) * p - c(152.0) * p2 + c(21.0) * p3)
            + (c(3.0) - p).powf(q) * (c(450.0) - c(381.0) * p + c(152.0) * p2 - c(21.0) * p3));
    let upper_2 = five_p / (c(8.0) * (c(6.0) - p))
        * (c(4.0) * qq * (c(12.0) - c(35.0) * p + c(94.0) * p2 - c(21.0) * p3)
            + (c(6.0) - p).powf(q) * (c(288.0) - c(15.0) * p - c(94.0) * p2 + c(21.0) * p3));
    let x_p = if p == c(2.0) {
        T::nan()
    } else {
        power_argmax(p)?.value
    };
    Ok(PowerConstants {
        p,
        x_p,
        tc: power_constant(p)?.value,
        lower_1,
        lower_2,
        upper_1,
        upper_2,
        w: w_bound(p),
    })
}

/// `D(p) = (2/pi)(13/5)^(2-p) Gamma(p) sin(pi p / 2)`, `p in [1, 2]`.
pub fn vbe_d<T: Real>(p: T) -> Result<T> {
    let two: T = lit(2.0);
    ensure!(
        p >= T::one() && p <= two,
        Domain,
        "p must lie in [1, 2], got {p:?}"
    );
    // sin(pi p / 2) = sin(pi (2 - p) / 2), exact zero at p = 2
    let sine = (T::PI() * (two - p) / two).sin();
    Ok(two / T::PI() * lit::<T>(2.6).powf(two - p) * gamma(p) * sine)
}

/// `C_p^vBE = 1 / (1 - D(p))_+`, infinite when `D(p) >= 1`.
pub fn vbe_constant<T: Real>(p: T) -> Result<T> {
    let d = vbe_d(p)?;
    Ok(if d >= T::one() {
        T::infinity()
    } else {
        T::one() / (T::one() - d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        for x in [0.1, 0.5, 0.9] {
            assert!((power_kernel::<f64>(2.0, x).unwrap() - 1.0).abs() < 1e-15);
        }
        let x = (2.0 - 2f64.sqrt()) / 4.0;
        let want = (1.0 + 1.0 / 2f64.sqrt()).sqrt();
        assert!((power_kernel::<f64>(1.5, x).unwrap() - want).abs() < 1e-15);
        let direct = 0.6f64.powf(1.5) - 0.4f64.powf(1.5) + 1.5 * 0.4f64.sqrt();
        assert_eq!(power_kernel::<f64>(1.5, 0.4).unwrap(), direct);
        assert!(power_kernel::<f64>(1.5, 1.0).is_err());
        assert!(power_kernel::<f64>(0.9, 0.5).is_err());
    }

    #[test]
    fn argmax_at_three_halves() {
        let r = power_argmax::<f64>(1.5).unwrap();
        assert!((r.value - 0.146_446_609_406_726_24).abs() < 1e-14);
        assert!(r.value > 0.1 && r.value < 0.25);
        assert!(power_root_residual::<f64>(1.5, r.value).abs() < 1e-12);
        assert!(power_argmax::<f64>(2.0).is_err());
    }

    #[test]
    fn argmax_matches_dense_grid() {
        let p = 1.2;
        let n = 1_000_000;
        let best = (1..n)
            .map(|i| i as f64 / n as f64)
            .max_by(|a, b| {
                power_kernel::<f64>(p, *a)
                    .unwrap()
                    .partial_cmp(&power_kernel::<f64>(p, *b).unwrap())
                    .unwrap()
            })
            .unwrap();
        assert!((power_argmax::<f64>(p).unwrap().value - best).abs() < 1e-6);
    }

    #[test]
    fn sharp_power_values() {
        assert_eq!(power_constant::<f64>(2.0).unwrap().value, 1.0);
        assert!(
            (power_constant::<f64>(1.5).unwrap().value - 1.306_562_964_876_376_6).abs() < 1e-13
        );
        let v = power_constant::<f64>(1.01).unwrap().value;
        assert!(v > 1.9 && v < 2.0);
    }

    #[test]
    fn bounds_bracket_the_constant() {
        let b = power_bounds::<f64>(1.5).unwrap();
        assert!((b.w - 2f64.sqrt()).abs() < 1e-15);
        assert!(b.chain_holds(), "{b:?}");
        let hi = power_bounds::<f64>(1.999).unwrap();
        let lo = power_bounds::<f64>(1.001).unwrap();
        assert!((hi.upper_2 - 1.0).abs() < 1e-2);
        assert!((lo.lower_1 - 2.0).abs() < 1e-2);
        let two = power_bounds::<f64>(2.0).unwrap();
        assert!(two.x_p.is_nan());
        for v in [
            two.lower_1,
            two.lower_2,
            two.upper_1,
            two.upper_2,
            two.w,
            two.tc,
        ] {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn classical_constant_quantities() {
        assert_eq!(vbe_d::<f64>(2.0).unwrap(), 0.0);
        assert_eq!(vbe_constant::<f64>(2.0).unwrap(), 1.0);
        assert!((vbe_d::<f64>(1.0).unwrap() - 26.0 / (5.0 * std::f64::consts::PI)).abs() < 1e-13);
        assert!(vbe_constant::<f64>(1.0).unwrap().is_infinite());
        for i in 0..10 {
            let p = 1.0 + i as f64 / 10.0;
            assert!(vbe_constant::<f64>(p).unwrap() > w_bound(p), "p={p}");
        }
        assert!(vbe_d::<f64>(2.1).is_err());
    }
}
