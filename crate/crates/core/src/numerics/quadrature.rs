//! Adaptive Gauss–Kronrod (7, 15) quadrature.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_panels: usize,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-10),
            rel_tol: lit(1e-12),
            max_panels: 4000,
        }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half: T = (b - a) * lit(0.5);
    let center: T = (a + b) * lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod = kronrod + s * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * lit(WG[j / 2]);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

impl<T: Real> Quadrature<T> {
    pub fn with_abs_tol(abs_tol: T) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> Result<T> {
        if a == b {
            return Ok(T::zero());
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain("quadrature needs finite limits".into()));
        }
        let (v, e) = gk15(&mut f, a, b);
        let mut panels = vec![Panel {
            a,
            b,
            value: v,
            error: e,
        }];
        loop {
            let total: T = panels.iter().map(|p| p.value).sum();
            let err: T = panels.iter().map(|p| p.error).sum();
            if !total.is_finite() || !err.is_finite() {
                return Err(Error::Construction(
                    "integrand is not finite on the interval".into(),
                ));
            }
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(total);
            }
            if panels.len() >= self.max_panels {
                return Err(Error::Construction(format!(
                    "quadrature did not converge: estimate {:?} with error {:?}",
                    total, err
                )));
            }
            let (worst, _) =
                panels
                    .iter()
                    .enumerate()
                    .fold((0, T::neg_infinity()), |acc, (i, p)| {
                        if p.error > acc.1 {
                            (i, p.error)
                        } else {
                            acc
                        }
                    });
            let p = panels.swap_remove(worst);
            let mid = (p.a + p.b) * lit(0.5);
            if mid <= p.a || mid >= p.b {
                // interval can no longer be split; accept its contribution
                panels.push(Panel {
                    error: T::zero(),
                    ..p
                });
                continue;
            }
            let (v1, e1) = gk15(&mut f, p.a, mid);
            let (v2, e2) = gk15(&mut f, mid, p.b);
            panels.push(Panel {
                a: p.a,
                b: mid,
                value: v1,
                error: e1,
            });
            panels.push(Panel {
                a: mid,
                b: p.b,
                value: v2,
                error: e2,
            });
        }
    }

    /// Integrates over `[a, b]` where the integrand may have an integrable
    /// singularity at `a`, through the substitution `t = a + (b - a) u^2`.
    pub fn integrate_singular_left<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> Result<T> {
        let w = b - a;
        let two: T = lit(2.0);
        self.integrate(
            |u| {
                if u == T::zero() {
                    T::zero()
                } else {
                    f(a + w * u * u) * two * w * u
                }
            },
            T::zero(),
            T::one(),
        )
    }

    /// Integrates piecewise across sorted `breakpoints` inside `[a, b]`;
    /// the first panel is treated as possibly singular at `a`.
    pub fn integrate_panels<F: FnMut(T) -> T>(
        &self,
        mut f: F,
        a: T,
        b: T,
        breakpoints: &[T],
    ) -> Result<T> {
        let mut cuts = vec![a];
        cuts.extend(breakpoints.iter().copied().filter(|&t| t > a && t < b));
        cuts.push(b);
        let mut total = T::zero();
        for (i, w) in cuts.windows(2).enumerate() {
            total = total
                + if i == 0 {
                    self.integrate_singular_left(&mut f, w[0], w[1])?
                } else {
                    self.integrate(&mut f, w[0], w[1])?
                };
        }
        Ok(total)
    }
}

/// Integrates `f` over `[a, b]` with default tolerances.
pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T) -> Result<T> {
    Quadrature::default().integrate(f, a, b)
}
