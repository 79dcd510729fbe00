//! Gamma function by the Lanczos approximation.
//!
//! Coefficients are the standard g = 7, n = 9 set (as used by the GNU
//! Scientific Library); relative error stays below 1e-13 on [1, 2] in
//! double precision.

#![allow(clippy::excessive_precision)]

use crate::scalar::{lit, Real};

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// The gamma function `Γ(x)` for real `x` (reflection below 1/2).
pub fn gamma<T: Real>(x: T) -> T {
    let half: T = lit(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc: T = lit(COEF[0]);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (x + T::from_usize(i).unwrap());
    }
    let t = x + lit(G) + half;
    (T::PI() * lit(2.0)).sqrt() * t.powf(x + half) * (-t).exp() * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_values_on_unit_interval() {
        let cases = [
            (1.0, 1.0),
            (2.0, 1.0),
            (1.5, 0.886_226_925_452_758_0),
            (1.25, 0.906_402_477_055_477_1),
            (1.75, 0.919_062_526_848_883_2),
            (1.1, 0.951_350_769_866_873_2),
            (1.9, 0.961_765_831_907_387_4),
        ];
        for (x, g) in cases {
            assert!(rel(gamma(x), g) < 1e-13, "Γ({x}) = {} vs {g}", gamma(x));
        }
    }

    #[test]
    fn recurrence_and_reflection() {
        for i in 1..40 {
            let x = 0.05 + 0.1 * i as f64;
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 1e-13);
        }
        assert!(rel(gamma(0.5), std::f64::consts::PI.sqrt()) < 1e-14);
    }
}
