use crate::constants::reduced_constant;
use crate::error::{ensure, Result};
use crate::momfun::MomentFunction;
use crate::report::CheckReport;
use crate::scalar::{csum, lit, Real};

use super::dist::{convolve_independent, expect_f, two_point, DiscreteDist};

fn require_centred<T: Real>(dists: &[DiscreteDist<T>]) -> Result<()> {
    for (j, d) in dists.iter().enumerate() {
        ensure!(
            d.is_centred(),
            Precondition,
            "difference {} has mean {:?}",
            j + 1,
            d.mean()
        );
    }
    Ok(())
}

/// `E f(X_1 + ... + X_n) <= E f(X_1) + C sum_{j>=2} E f(X_j)` for independent
/// zero-mean differences. A first difference with nonzero mean is only
/// accepted through [`super::MartingaleTree`].
pub fn check_main_inequality<T: Real>(
    f: &MomentFunction<T>,
    diffs: &[DiscreteDist<T>],
    c: T,
) -> Result<CheckReport<T>> {
    ensure!(
        !diffs.is_empty(),
        Precondition,
        "need at least one difference"
    );
    require_centred(diffs)?;
    let lhs = expect_f(&convolve_independent(diffs)?, f);
    let rest = csum(diffs[1..].iter().map(|d| expect_f(d, f)));
    Ok(CheckReport::new(lhs, expect_f(&diffs[0], f) + c * rest, c))
}

/// `E f(X) <= kappa E f(X + a)` for zero-mean `X`.
pub fn check_centring<T: Real>(
    f: &MomentFunction<T>,
    dist: &DiscreteDist<T>,
    a: T,
    kappa: T,
) -> Result<CheckReport<T>> {
    require_centred(std::slice::from_ref(dist))?;
    let lhs = expect_f(dist, f);
    let rhs = kappa * dist.expect(|x| f.eval(x + a));
    Ok(CheckReport::new(lhs, rhs, kappa))
}

/// `E f(S_n) <= K sum_j E f(X_j)` with `K = C - (lambda/n)(C - 1)`, for
/// independent zero-mean differences whose first one carries at least a
/// `lambda / n` share of the total moment.
pub fn check_spread<T: Real>(
    f: &MomentFunction<T>,
    diffs: &[DiscreteDist<T>],
    lambda: T,
    c: T,
) -> Result<CheckReport<T>> {
    ensure!(
        diffs.len() >= 2,
        Precondition,
        "need at least two differences"
    );
    require_centred(diffs)?;
    let n = diffs.len();
    let moments: Vec<T> = diffs.iter().map(|d| expect_f(d, f)).collect();
    let total = csum(moments.iter().copied());
    let share = lambda / T::from_usize(n).expect("fits") * total;
    ensure!(
        moments[0] >= share - lit::<T>(1e-12) * total,
        Precondition,
        "first difference is not lambda-good: {:?} < {share:?}",
        moments[0]
    );
    let k = reduced_constant(c, lambda, n)?;
    let lhs = expect_f(&convolve_independent(diffs)?, f);
    Ok(CheckReport::new(lhs, k * total, k))
}

fn check_gap<T: Real>(c: T, d: T) -> Result<()> {
    ensure!(
        c > T::zero() && d > T::zero(),
        Domain,
        "need c > 0 and d > 0, got c = {c:?}, d = {d:?}"
    );
    Ok(())
}

/// `E f(x + X_{c,d}) - f(x)`, summed as increments.
fn excess<T: Real>(f: &MomentFunction<T>, c: T, d: T, x: T) -> T {
    let s = c + d;
    d / s * f.increment(x, -c) + c / s * f.increment(x, d)
}

/// `J(x) = g(x) / g(0)` with `g(x) = E f(x + X_{c,d}) - f(x)`, for the
/// two-point law given by its atoms `-c` and `d`.
pub fn increment_ratio_gap<T: Real>(f: &MomentFunction<T>, c: T, d: T, x: T) -> Result<T> {
    check_gap(c, d)?;
    let g0 = excess(f, c, d, T::zero());
    ensure!(g0 > T::zero(), Domain, "E f(X) vanishes");
    Ok(excess(f, c, d, x) / g0)
}

/// `J_{f;c,s}(x)` for `0 < c < s`, with the law `X_{c,s-c}`.
pub fn increment_ratio<T: Real>(f: &MomentFunction<T>, c: T, s: T, x: T) -> Result<T> {
    ensure!(
        c > T::zero() && c < s,
        Domain,
        "need 0 < c < s, got c = {c:?}, s = {s:?}"
    );
    increment_ratio_gap(f, c, s - c, x)
}

/// `(E f(X_{a,b} + X_{c,d}) - E f(X_{a,b})) / E f(X_{c,d})` on the exact
/// four-point law.
pub fn near_extremal_probe_gap<T: Real>(
    f: &MomentFunction<T>,
    a: T,
    b: T,
    c: T,
    d: T,
) -> Result<T> {
    check_gap(c, d)?;
    let outer = two_point(a, b)?;
    let g0 = excess(f, c, d, T::zero());
    ensure!(g0 > T::zero(), Domain, "E f(X_cd) vanishes");
    let num = outer.expect(|y| excess(f, c, d, y));
    Ok(num / g0)
}

/// [`near_extremal_probe_gap`] with `d = s - c`.
pub fn near_extremal_probe<T: Real>(f: &MomentFunction<T>, a: T, b: T, c: T, s: T) -> Result<T> {
    ensure!(
        c > T::zero() && c < s,
        Domain,
        "need 0 < c < s, got c = {c:?}, s = {s:?}"
    );
    near_extremal_probe_gap(f, a, b, c, s - c)
}

/// Default tightness schedule `(a, b, c, d)` for the power `|.|^p`: `b` at
/// the kernel maximizer, `c = 1`, a vanishing gap `d` and a far-away `a`.
pub fn probe_schedule<T: Real>(p: T) -> Result<[T; 4]> {
    let b = if p == lit(2.0) {
        lit(0.25)
    } else {
        crate::constants::power_argmax(p)?.value
    };
    Ok([lit(1e8), b, T::one(), lit(1e-40)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{moment_kernel, power_constant};

    const TC15: f64 = 1.306_562_964_876_376_6;

    #[test]
    fn main_inequality_examples() {
        let sq = MomentFunction::<f64>::square();
        let xs = [two_point(1.0, 3.0).unwrap(), two_point(0.2, 0.7).unwrap()];
        let r = check_main_inequality(&sq, &xs, 1.0).unwrap();
        assert!(r.slack.abs() < 1e-12);
        let f = MomentFunction::<f64>::power(1.5).unwrap();
        let xs = [two_point(1.0, 2.0).unwrap(), two_point(0.1, 0.2).unwrap()];
        assert!(check_main_inequality(&f, &xs, TC15).unwrap().passed);
        let one = check_main_inequality(&f, &xs[..1], 123.0).unwrap();
        assert_eq!(one.slack, 0.0);
        let biased = DiscreteDist::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(check_main_inequality(&f, &[biased], 1.0).is_err());
    }

    #[test]
    fn ratio_examples() {
        let f = MomentFunction::<f64>::power(1.5).unwrap();
        assert!((increment_ratio(&f, 0.4, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let sq = MomentFunction::<f64>::square();
        for x in [-2.0, 0.3, 5.0] {
            assert!((increment_ratio(&sq, 0.4, 1.0, x).unwrap() - 1.0).abs() < 1e-13);
        }
        assert!(increment_ratio(&f, 1.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn ratio_limit_for_finite_curvature() {
        let psi = MomentFunction::<f64>::extreme(0.7).unwrap();
        let (s, x) = (1.3, 0.4);
        let j = increment_ratio_gap(&psi, s * (1.0 - 1e-6), s * 1e-6, x).unwrap();
        let l = moment_kernel(&psi, s, x).unwrap() / psi.eval(s);
        assert!((j - l).abs() < 1e-5, "{j} {l}");
    }

    #[test]
    fn probe_sandwich() {
        let sq = MomentFunction::<f64>::square();
        assert!((near_extremal_probe(&sq, 3.0, 0.2, 0.5, 1.0).unwrap() - 1.0).abs() < 1e-12);
        for p in [1.1, 1.5, 1.9] {
            let f = MomentFunction::<f64>::power(p).unwrap();
            let tc = power_constant::<f64>(p).unwrap().value;
            let [a, b, c, d] = probe_schedule(p).unwrap();
            let v = near_extremal_probe_gap(&f, a, b, c, d).unwrap();
            assert!(v >= tc - 1e-2 && v <= tc + 1e-9, "p={p}: {v} vs {tc}");
        }
    }

    #[test]
    fn centring_examples() {
        let f = MomentFunction::<f64>::power(1.5).unwrap();
        let x = two_point(0.3, 0.9).unwrap();
        let r = check_centring(&f, &x, 0.0, 1.0).unwrap();
        assert_eq!(r.slack, 0.0);
        let sq = MomentFunction::<f64>::square();
        let a = 0.4;
        let var = expect_f(&x, &sq);
        let r = check_centring(&sq, &x, a, var / (var + a * a)).unwrap();
        assert!(r.slack.abs() < 1e-14);
        let r = check_centring(&sq, &x, a, 1.0).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn spread_examples() {
        let f = MomentFunction::<f64>::power(1.5).unwrap();
        let x = two_point(1.0, 2.0).unwrap();
        let r = check_spread(&f, &[x.clone(), x.clone(), x.clone()], 1.0, TC15).unwrap();
        assert!(r.passed);
        assert!((r.constant_used - (TC15 - (TC15 - 1.0) / 3.0)).abs() < 1e-15);
        assert!(r.constant_used <= TC15);
        let small = two_point(0.01, 0.02).unwrap();
        assert!(check_spread(&f, &[small, x.clone(), x], 1.0, TC15).is_err());
    }
}
