use proptest::prelude::*;

use vbe_core::constants::{moment_kernel, power_constant};
use vbe_core::ineqcheck::{delta, delta_sub, lambda_mu_nu};
use vbe_core::momfun::{psi, psi_prime, tp_eff, AltSplineParams, MomentFunction};
use vbe_core::oracle::{
    check_main_inequality, convolve_independent, increment_ratio, two_point, DiscreteDist,
};
use vbe_core::report::fmt_real;

fn family() -> impl Strategy<Value = MomentFunction<f64>> {
    prop_oneof![
        (0.05f64..20.0).prop_map(|t| MomentFunction::extreme(t).unwrap()),
        (1.01f64..2.0).prop_map(|p| MomentFunction::power(p).unwrap()),
        (0.05f64..1.0).prop_map(|x1| MomentFunction::alt_spline(AltSplineParams::new(x1).unwrap())),
        Just(MomentFunction::square()),
    ]
}

proptest! {
    #[test]
    fn psi_is_even_and_below_square(t in 1e-3f64..1e3, x in -1e3f64..1e3) {
        let v = psi(t, x).unwrap();
        prop_assert_eq!(v, psi(t, -x).unwrap());
        prop_assert!(v >= 0.0 && v <= x * x * (1.0 + 1e-15));
        let slope = psi_prime(t, x.abs()).unwrap();
        prop_assert!((slope - 2.0 * t.min(x.abs())).abs() <= 1e-12 * (1.0 + t));
    }

    #[test]
    fn increments_match_differences(f in family(), x in -5.0f64..5.0, h in -5.0f64..5.0) {
        let direct = f.eval(x + h) - f.eval(x);
        let scale = 1.0 + f.eval(x).abs() + f.eval(x + h).abs();
        prop_assert!((f.increment(x, h) - direct).abs() <= 1e-12 * scale);
    }

    #[test]
    fn functions_are_even_convex_and_subquadratic(f in family(), x in 0.01f64..50.0, y in 0.01f64..50.0) {
        prop_assert!((f.eval(x) - f.eval(-x)).abs() <= 1e-14 * f.eval(x));
        let m = 0.5 * (x + y);
        prop_assert!(f.eval(m) <= 0.5 * (f.eval(x) + f.eval(y)) * (1.0 + 1e-13));
        if x < y {
            // f(x)/x^2 nonincreasing
            prop_assert!(f.eval(y) / (y * y) <= f.eval(x) / (x * x) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn power_homogeneity(p in 1.01f64..2.0, x in 0.01f64..10.0, lam in 0.1f64..10.0) {
        let f = MomentFunction::power(p).unwrap();
        let lhs = f.eval(lam * x);
        prop_assert!((lhs - lam.powf(p) * f.eval(x)).abs() <= 1e-13 * lhs);
    }

    #[test]
    fn power_kernel_below_constant(p in 1.01f64..2.0, x in 0.0f64..1.0) {
        let f = MomentFunction::power(p).unwrap();
        let l = moment_kernel(&f, 1.0, x).unwrap();
        prop_assert!(l <= power_constant(p).unwrap().value * (1.0 + 1e-12));
    }

    #[test]
    fn ratio_below_kernel(f in family(), s in 0.05f64..20.0, cu in 0.01f64..0.99, xu in 0.01f64..0.99) {
        let (c, x) = (s * cu, s * xu);
        let j = increment_ratio(&f, c, s, x).unwrap();
        let l = moment_kernel(&f, s, x).unwrap() / f.eval(s);
        prop_assert!(j <= l + 1e-12 * l.max(1.0), "J={} L/f={}", j, l);
    }

    #[test]
    fn delta_symmetric_and_nonpositive(u in 1e-3f64..2.5, t in 1e-3f64..2.5, x in 1e-3f64..0.999, c in 1e-3f64..0.999) {
        let d = delta(u, t, x, c).unwrap();
        prop_assert!((d - delta(t, u, x, c).unwrap()).abs() <= 1e-15 * (1.0 + d.abs()));
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn sublemma_nonpositive(t in 1e-3f64..5.0, x in 1e-3f64..0.999, c in 1e-3f64..0.5) {
        prop_assert!(delta_sub(t, x, c).unwrap() <= 1e-12);
    }

    #[test]
    fn square_lambda_is_free_of_x(s in 0.1f64..10.0, cu in 0.01f64..0.99, x in -10.0f64..10.0) {
        let c = s * cu;
        let (l, m, _) = lambda_mu_nu(f64::INFINITY, s, x, c).unwrap();
        let scale = s * (s + x.abs()).powi(2);
        prop_assert!((l - c * (s - c) * s).abs() <= 1e-13 * scale);
        prop_assert!((l - m).abs() <= 1e-13 * scale);
    }

    #[test]
    fn effective_exponent_band(r in 1.0f64..2.0) {
        let v = tp_eff(r);
        prop_assert!((1.5 - 1e-15..=5.0 / 3.0 + 1e-15).contains(&v));
    }

    #[test]
    fn convolution_adds_means_and_keeps_mass(
        a in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 1..4),
        shift in -3.0f64..3.0,
    ) {
        let mut dists: Vec<DiscreteDist<f64>> = a.iter().map(|&(c, d)| two_point(c, d).unwrap()).collect();
        dists[0] = dists[0].shifted(shift);
        let s = convolve_independent(&dists).unwrap();
        let total: f64 = s.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-13);
        prop_assert!((s.mean() - shift).abs() <= 1e-11 * (1.0 + shift.abs() + 10.0));
        prop_assert!(s.support().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn main_inequality_holds_for_two_point_sums(
        p in 1.01f64..2.0,
        a in prop::collection::vec((1e-2f64..1e2, 1e-2f64..1e2), 2..4),
    ) {
        let f = MomentFunction::power(p).unwrap();
        let diffs: Vec<_> = a.iter().map(|&(c, d)| two_point(c, d).unwrap()).collect();
        let r = check_main_inequality(&f, &diffs, power_constant(p).unwrap().value).unwrap();
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn reals_round_trip_through_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
    }
}
