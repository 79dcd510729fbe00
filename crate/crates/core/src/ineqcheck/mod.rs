//! The piecewise-polynomial inequalities behind the two-point reduction, evaluated
//! exactly and swept over low-discrepancy samples, plus the count of
//! admissible orderings of the kink locations.

mod orderings;
mod sweeps;

pub use orderings::{
    enumerate_orderings, enumerate_orderings_with, grid_orderings, Ordering, OrderingCount,
    CASES_PER_ORDERING,
};
pub use sweeps::{
    j_le_l_families, sweep_b_positive, sweep_concavity, sweep_delta, sweep_j_le_l, sweep_sublemma,
    sweep_u_le_2u, DeltaBand, DeltaSample, DeltaSweep, UT_MAX,
};

use crate::constants::{moment_kernel, two_point_objective};
use crate::error::{ensure, Result};
use crate::momfun::{psi_raw, psi_slope_raw, MomentFunction};
use crate::oracle::increment_ratio;
use crate::report::CheckReport;
use crate::scalar::{lit, Real};

/// `(lambda_t, mu_t, nu_t)` at scale `s`:
/// `lambda_t = c psi_t(x+s-c) + (s-c) psi_t(x-c) - s psi_t(x)`,
/// `mu_t = lambda_t(s; 0, c)`, `nu_t = psi_t(x-s) - psi_t(x) + s psi_t'(x)`.
pub fn lambda_mu_nu<T: Real>(t: T, s: T, x: T, c: T) -> Result<(T, T, T)> {
    ensure!(t > T::zero(), Domain, "need t > 0, got {t:?}");
    ensure!(
        c > T::zero() && c < s,
        Domain,
        "need 0 < c < s, got c = {c:?}, s = {s:?}"
    );
    let lambda = |x: T| c * psi_raw(t, x + s - c) + (s - c) * psi_raw(t, x - c) - s * psi_raw(t, x);
    let nu = psi_raw(t, x - s) - psi_raw(t, x) + s * psi_slope_raw(t, x);
    Ok((lambda(x), lambda(T::zero()), nu))
}

#[inline]
fn big_lambda<T: Real>(t: T, x: T, c: T) -> T {
    c * psi_raw(t, x + T::one() - c) + (T::one() - c) * psi_raw(t, x - c) - psi_raw(t, x)
}

#[inline]
fn big_n<T: Real>(t: T, x: T) -> T {
    psi_raw(t, x - T::one()) - psi_raw(t, x) + psi_slope_raw(t, x)
}

fn check_restrictions<T: Real>(u: T, t: T, x: T, c: T) -> Result<()> {
    ensure!(
        u > T::zero() && t > T::zero(),
        Domain,
        "need u, t > 0, got u = {u:?}, t = {t:?}"
    );
    ensure!(
        x > T::zero() && x < T::one(),
        Domain,
        "need 0 < x < 1, got {x:?}"
    );
    ensure!(
        c > T::zero() && c < T::one(),
        Domain,
        "need 0 < c < 1, got {c:?}"
    );
    Ok(())
}

#[inline]
pub(crate) fn delta_unchecked<T: Real>(u: T, t: T, x: T, c: T) -> T {
    let one = T::one();
    let (lt, lu) = (big_lambda(t, x, c), big_lambda(u, x, c));
    let (mt, mu) = (big_lambda(t, T::zero(), c), big_lambda(u, T::zero(), c));
    let (nt, nu) = (big_n(t, x), big_n(u, x));
    lt * psi_raw(u, one) + lu * psi_raw(t, one) - mt * nu - mu * nt
}

/// `Delta_{u,t}(x, c) = Lambda_t Psi_u + Lambda_u Psi_t - M_t N_u - M_u N_t`
/// with the normalized (`s = 1`) forms; nonpositive for `0 < x, c < 1`.
pub fn delta<T: Real>(u: T, t: T, x: T, c: T) -> Result<T> {
    check_restrictions(u, t, x, c)?;
    Ok(delta_unchecked(u, t, x, c))
}

/// `Lambda_t(x, c) - Lambda_t(x, 1 - c)` for `c in (0, 1/2]`; nonpositive.
pub fn delta_sub<T: Real>(t: T, x: T, c: T) -> Result<T> {
    ensure!(t > T::zero(), Domain, "need t > 0, got {t:?}");
    ensure!(
        x > T::zero() && x < T::one(),
        Domain,
        "need 0 < x < 1, got {x:?}"
    );
    ensure!(
        c > T::zero() && c <= lit(0.5),
        Domain,
        "need 0 < c <= 1/2, got {c:?}"
    );
    Ok(big_lambda(t, x, c) - big_lambda(t, x, T::one() - c))
}

/// `J_{f;c,s}(x) <= L_{f;s}(x) / f(s)`.
pub fn check_j_le_l<T: Real>(f: &MomentFunction<T>, c: T, s: T, x: T) -> Result<CheckReport<T>> {
    let j = increment_ratio(f, c, s, x)?;
    let l = moment_kernel(f, s, x)? / f.eval(s);
    Ok(CheckReport::new(j, l, l))
}

/// `ell(z) = L_{psi_t;1}(1 - sqrt z)`, concave on `(0, 1)`.
pub fn ell_z<T: Real>(t: T, z: T) -> Result<T> {
    ensure!(
        z > T::zero() && z < T::one(),
        Domain,
        "need 0 < z < 1, got {z:?}"
    );
    let f = MomentFunction::extreme(t)?;
    moment_kernel(&f, T::one(), T::one() - z.sqrt())
}

/// Largest second difference of `ell` on the grid (concavity demands
/// `<= 0`) and the number of grid triples above `tol`.
pub fn ell_z_concavity<T: Real>(t: T, z_grid: &[T], tol: T) -> Result<(T, usize)> {
    ensure!(
        t > T::zero() && t < T::one(),
        Domain,
        "need 0 < t < 1, got {t:?}"
    );
    ensure!(z_grid.len() >= 3, Domain, "need at least three grid points");
    let vals = z_grid
        .iter()
        .map(|&z| ell_z(t, z))
        .collect::<Result<Vec<T>>>()?;
    let mut worst = T::neg_infinity();
    let mut bad = 0;
    for i in 1..z_grid.len() - 1 {
        let (z0, z1, z2) = (z_grid[i - 1], z_grid[i], z_grid[i + 1]);
        let (h0, h1) = (z1 - z0, z2 - z1);
        // divided second difference, valid on uneven grids
        let d2 =
            ((vals[i + 1] - vals[i]) / h1 - (vals[i] - vals[i - 1]) / h0) * lit(2.0) / (h0 + h1);
        let scaled = d2 * h0 * h1;
        worst = worst.max(scaled);
        if scaled > tol {
            bad += 1;
        }
    }
    Ok((worst, bad))
}

/// `B(p) = 4 (p-1)^(p-1) - (6-p)^(p-1)`, positive on `(1, 2)`.
pub fn b_positive<T: Real>(p: T) -> Result<T> {
    ensure!(
        p > T::one() && p < lit(2.0),
        Domain,
        "need 1 < p < 2, got {p:?}"
    );
    let q = p - T::one();
    Ok(lit::<T>(4.0) * q.powf(q) - (lit::<T>(6.0) - p).powf(q))
}

/// `2 U(psi_t, c, 1, a) - U(psi_t, c, 1, 0)`, nonnegative for
/// `0 < a < c < 1/2`.
pub fn u_le_2u<T: Real>(t: T, c: T, a: T) -> Result<T> {
    ensure!(
        c > T::zero() && c < lit(0.5),
        Domain,
        "need 0 < c < 1/2, got {c:?}"
    );
    ensure!(a > T::zero() && a < c, Domain, "need 0 < a < c, got {a:?}");
    let f = MomentFunction::extreme(t)?;
    Ok(lit::<T>(2.0) * two_point_objective(&f, c, T::one(), a)?
        - two_point_objective(&f, c, T::one(), T::zero())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::centring_shift;
    use crate::oracle::{expect_f, two_point};

    #[test]
    fn forms_in_square_case() {
        let inf = f64::INFINITY;
        for (s, x, c) in [(1.0, 0.3, 0.4), (2.5, -1.0, 2.0), (0.7, 3.0, 0.1)] {
            let (l, _, _) = lambda_mu_nu(inf, s, x, c).unwrap();
            assert!((l - c * (s - c) * s).abs() < 1e-12);
        }
    }

    #[test]
    fn forms_cross_check() {
        for t in [0.3, 1.0, 4.0] {
            let f = MomentFunction::extreme(t).unwrap();
            let (s, c, x) = (1.7, 0.6, 0.9);
            let (_, mu, nu) = lambda_mu_nu::<f64>(t, s, x, c).unwrap();
            let e = expect_f(&two_point(c, s - c).unwrap(), &f);
            assert!((mu - s * e).abs() < 1e-13);
            assert!((nu - moment_kernel(&f, s, x).unwrap()).abs() < 1e-13);
        }
        assert!(lambda_mu_nu(1.0, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn delta_examples() {
        for (u, t, x) in [(0.3f64, 1.7, 0.4), (2.2, 0.05, 0.9)] {
            assert!(delta(u, t, x, 1.0 - 1e-12).unwrap().abs() < 1e-9);
            assert_eq!(delta(u, t, x, 0.8).unwrap(), delta(t, u, x, 0.8).unwrap());
        }
        assert!(delta(0.3, 1.7, 0.4, 0.8).unwrap() <= 0.0);
        assert!(delta(0.3, 1.7, 1.0, 0.8).is_err());
        assert!(delta(0.0, 1.7, 0.5, 0.8).is_err());
    }

    #[test]
    fn sublemma_examples() {
        assert_eq!(delta_sub(0.7, 0.3, 0.5).unwrap(), 0.0);
        assert!(delta_sub(f64::INFINITY, 0.3, 0.2).unwrap().abs() < 1e-15);
        assert!(delta_sub(0.7, 0.3, 0.6).is_err());
    }

    #[test]
    fn ratio_bound_examples() {
        let sq = MomentFunction::<f64>::square();
        let r = check_j_le_l(&sq, 0.3, 1.0, 0.6).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-13 && (r.rhs - 1.0).abs() < 1e-13);
        let f = MomentFunction::power(1.5).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..6 {
            let gap = 10f64.powi(-k);
            let r = check_j_le_l(&f, 1.0 - gap, 1.0, 0.3).unwrap();
            assert!(r.passed);
            assert!(r.slack < prev);
            prev = r.slack;
        }
    }

    #[test]
    fn concavity_and_margins() {
        let zs: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        for t in [0.1, 0.5, 0.9] {
            let (_, bad) = ell_z_concavity(t, &zs, 1e-10).unwrap();
            assert_eq!(bad, 0);
        }
        assert!(b_positive(1.999).unwrap() > 0.0);
        let b = b_positive(1.5).unwrap();
        assert!((b - (4.0 * 0.5f64.sqrt() - 4.5f64.sqrt())).abs() < 1e-15 && b > 0.0);
        let (t, c) = (0.4, 0.3);
        let f = MomentFunction::extreme(t).unwrap();
        let a: f64 = centring_shift(&f, c, 1.0).unwrap().value;
        assert!(u_le_2u(t, c, a.max(1e-9)).unwrap() >= -1e-12);
        let small: f64 = u_le_2u(t, c, 1e-12).unwrap();
        let base = two_point_objective(&f, c, 1.0, 0.0).unwrap();
        assert!((small - base).abs() < 1e-9);
    }
}
