use std::fmt;
use std::sync::Arc;

use super::{psi_raw, Kind, MomentFunction, Profile};
use crate::error::{ensure, Error, Result};
use crate::numerics::Quadrature;
use crate::scalar::{csum, lit, log_grid, Real};

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type MomentsFn<T> = Arc<dyn Fn(T) -> (T, T) + Send + Sync>;

/// A point mass of the mixing measure; `location` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub location: T,
    pub weight: T,
}

#[derive(Clone)]
enum Repr<T: Real> {
    Closure {
        pdf: ScalarFn<T>,
        upper: ScalarFn<T>,
        partial: Option<MomentsFn<T>>,
    },
    Steps {
        edges: Vec<T>,
        values: Vec<T>,
        cum: Vec<[T; 3]>,
    },
}

/// Absolutely continuous part of a mixing measure on `(0, inf)`.
#[derive(Clone)]
pub struct Density<T: Real> {
    repr: Repr<T>,
    breakpoints: Vec<T>,
    support_start: T,
}

impl<T: Real> fmt::Debug for Density<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.repr {
            Repr::Closure { .. } => "closure",
            Repr::Steps { .. } => "steps",
        };
        f.debug_struct("Density")
            .field("repr", &kind)
            .field("breakpoints", &self.breakpoints.len())
            .field("support_start", &self.support_start)
            .finish()
    }
}

impl<T: Real> Density<T> {
    /// A density given by `pdf` together with its tail mass
    /// `upper_mass(x) = int_x^inf pdf`. Partial moments are integrated
    /// numerically, split at `breakpoints`.
    pub fn new<P, U>(pdf: P, upper_mass: U, breakpoints: Vec<T>) -> Self
    where
        P: Fn(T) -> T + Send + Sync + 'static,
        U: Fn(T) -> T + Send + Sync + 'static,
    {
        Self {
            repr: Repr::Closure {
                pdf: Arc::new(pdf),
                upper: Arc::new(upper_mass),
                partial: None,
            },
            breakpoints: sorted(breakpoints),
            support_start: T::zero(),
        }
    }

    /// Mixing density of `|x|^p`, `p in (1, 2)`.
    pub fn power(p: T) -> Result<Self> {
        let two: T = lit(2.0);
        ensure!(
            p > T::one() && p < two,
            Domain,
            "power density needs p in (1, 2), got {p:?}"
        );
        let k = p * (p - T::one()) * (two - p) / two;
        let pdf = move |t: T| {
            if t > T::zero() {
                k * t.powf(p - lit(3.0))
            } else {
                T::zero()
            }
        };
        let upper = move |x: T| p * (p - T::one()) / two * x.powf(p - two);
        let partial = move |x: T| {
            if x <= T::zero() {
                return (T::zero(), T::zero());
            }
            (
                p * (two - p) / two * x.powf(p - T::one()),
                (p - T::one()) * (two - p) / two * x.powf(p),
            )
        };
        Ok(Self {
            repr: Repr::Closure {
                pdf: Arc::new(pdf),
                upper: Arc::new(upper),
                partial: Some(Arc::new(partial)),
            },
            breakpoints: Vec::new(),
            support_start: T::zero(),
        })
    }

    /// Piecewise constant density equal to `values[i]` on
    /// `(edges[i], edges[i + 1]]` and zero outside `(edges[0], edges[last]]`.
    pub fn piecewise_constant(edges: Vec<T>, values: Vec<T>) -> Result<Self> {
        ensure!(
            edges.len() >= 2 && values.len() + 1 == edges.len(),
            Construction,
            "need n + 1 edges for n cell values"
        );
        ensure!(
            edges[0] >= T::zero(),
            Construction,
            "edges must be nonnegative"
        );
        ensure!(
            edges.windows(2).all(|w| w[0] < w[1]),
            Construction,
            "edges must increase strictly"
        );
        ensure!(
            values.iter().all(|v| v.is_finite() && *v >= T::zero()),
            Construction,
            "cell values must be finite and nonnegative"
        );
        let mut cum = vec![[T::zero(); 3]; edges.len()];
        for i in 0..values.len() {
            let (a, b, v) = (edges[i], edges[i + 1], values[i]);
            cum[i + 1] = [
                cum[i][0] + v * (b - a),
                cum[i][1] + v * (b * b - a * a) / lit(2.0),
                cum[i][2] + v * (b * b * b - a * a * a) / lit(3.0),
            ];
        }
        let support_start = values
            .iter()
            .position(|v| *v > T::zero())
            .map(|i| edges[i])
            .unwrap_or(T::infinity());
        Ok(Self {
            breakpoints: edges.clone(),
            repr: Repr::Steps { edges, values, cum },
            support_start,
        })
    }

    pub fn pdf(&self, t: T) -> T {
        match &self.repr {
            Repr::Closure { pdf, .. } => pdf(t),
            Repr::Steps { edges, values, .. } => match cell(edges, t) {
                Some(i) => values[i],
                None => T::zero(),
            },
        }
    }

    /// `int_x^inf pdf`.
    pub fn upper_mass(&self, x: T) -> T {
        match &self.repr {
            Repr::Closure { upper, .. } => upper(x),
            Repr::Steps { cum, .. } => {
                let total = cum.last().expect("nonempty")[0];
                total - self.steps_partial(x)[0]
            }
        }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    /// `(int_0^x t pdf, int_0^x t^2 pdf)`.
    pub fn partial_moments(&self, x: T) -> Result<(T, T)> {
        if x <= T::zero() {
            return Ok((T::zero(), T::zero()));
        }
        match &self.repr {
            Repr::Closure {
                partial: Some(m), ..
            } => Ok(m(x)),
            Repr::Closure { pdf, .. } => {
                let quad = Quadrature {
                    abs_tol: lit(1e-13),
                    rel_tol: lit(1e-12),
                    max_panels: 4000,
                };
                let inner: Vec<T> = self
                    .breakpoints
                    .iter()
                    .copied()
                    .filter(|&b| b > T::zero() && b < x)
                    .collect();
                let m1 = quad.integrate_panels(|t| t * pdf(t), T::zero(), x, &inner)?;
                let m2 = quad.integrate_panels(|t| t * t * pdf(t), T::zero(), x, &inner)?;
                Ok((m1, m2))
            }
            Repr::Steps { .. } => {
                let c = self.steps_partial(x);
                Ok((c[1], c[2]))
            }
        }
    }

    fn steps_partial(&self, x: T) -> [T; 3] {
        let Repr::Steps { edges, values, cum } = &self.repr else {
            unreachable!("steps only")
        };
        if x <= edges[0] {
            return [T::zero(); 3];
        }
        let last = edges.len() - 1;
        if x >= edges[last] {
            return cum[last];
        }
        let i = cell(edges, x).expect("inside");
        let (a, v) = (edges[i], values[i]);
        [
            cum[i][0] + v * (x - a),
            cum[i][1] + v * (x * x - a * a) / lit(2.0),
            cum[i][2] + v * (x * x * x - a * a * a) / lit(3.0),
        ]
    }
}

fn sorted<T: Real>(mut v: Vec<T>) -> Vec<T> {
    v.retain(|b| b.is_finite() && *b > T::zero());
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v.dedup();
    v
}

/// Index of the cell `(edges[i], edges[i + 1]]` containing `t`.
fn cell<T: Real>(edges: &[T], t: T) -> Option<usize> {
    if t <= edges[0] || t > edges[edges.len() - 1] {
        return None;
    }
    Some(edges.partition_point(|&e| e < t) - 1)
}

/// The measure `gamma` on `(0, inf]` with `f = int psi_t gamma(dt)`.
#[derive(Debug, Clone)]
pub struct MixingMeasure<T: Real> {
    atoms: Vec<Atom<T>>,
    density: Option<Density<T>>,
}

impl<T: Real> MixingMeasure<T> {
    /// Validates atom locations and weights and checks
    /// `int (t ^ 1) gamma(dt) < inf`.
    pub fn new(mut atoms: Vec<Atom<T>>, density: Option<Density<T>>) -> Result<Self> {
        for a in &atoms {
            ensure!(
                a.location > T::zero(),
                Construction,
                "atom location must be positive, got {:?}",
                a.location
            );
            ensure!(
                a.weight > T::zero() && a.weight.is_finite(),
                Construction,
                "atom weight must be positive and finite, got {:?}",
                a.weight
            );
        }
        atoms.sort_by(|a, b| a.location.partial_cmp(&b.location).expect("not nan"));
        if let Some(d) = &density {
            for t in log_grid(lit::<T>(1e-6), lit(1e6), 61) {
                let v = d.pdf(t);
                ensure!(
                    v.is_finite() && v >= T::zero(),
                    Construction,
                    "density must be nonnegative, pdf({t:?}) = {v:?}"
                );
            }
            let (m1, _) = d
                .partial_moments(T::one())
                .map_err(|e| Error::Construction(format!("density not integrable near 0: {e}")))?;
            let tail = d.upper_mass(T::one());
            ensure!(
                m1.is_finite() && tail.is_finite(),
                Construction,
                "int (t ^ 1) gamma(dt) is not finite"
            );
        }
        Ok(Self { atoms, density })
    }

    pub fn dirac(location: T) -> Result<Self> {
        Self::new(
            vec![Atom {
                location,
                weight: T::one(),
            }],
            None,
        )
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density<T>> {
        self.density.as_ref()
    }

    /// `gamma((x, inf])`.
    pub fn tail(&self, x: T) -> T {
        let atoms = csum(
            self.atoms
                .iter()
                .filter(|a| a.location > x)
                .map(|a| a.weight),
        );
        atoms + self.density.as_ref().map_or(T::zero(), |d| d.upper_mass(x))
    }

    /// Infimum of the support.
    pub fn support_start(&self) -> T {
        let a = self.atoms.first().map_or(T::infinity(), |a| a.location);
        let d = self
            .density
            .as_ref()
            .map_or(T::infinity(), |d| d.support_start);
        a.min(d)
    }

    fn value(&self, x: T) -> Result<T> {
        let atoms = csum(self.atoms.iter().map(|a| a.weight * psi_raw(a.location, x)));
        let Some(d) = &self.density else {
            return Ok(atoms);
        };
        let (m1, m2) = d.partial_moments(x)?;
        Ok(atoms + lit::<T>(2.0) * x * m1 - m2 + x * x * d.upper_mass(x))
    }

    fn slope(&self, x: T) -> Result<T> {
        let atoms = csum(self.atoms.iter().map(|a| a.weight * a.location.min(x)));
        let Some(d) = &self.density else {
            return Ok(lit::<T>(2.0) * atoms);
        };
        let (m1, _) = d.partial_moments(x)?;
        Ok(lit::<T>(2.0) * (atoms + m1 + x * d.upper_mass(x)))
    }
}

struct MixtureProfile<T: Real> {
    measure: MixingMeasure<T>,
}

impl<T: Real> Profile<T> for MixtureProfile<T> {
    fn value(&self, a: T) -> T {
        self.measure.value(a).unwrap_or_else(|_| T::nan())
    }

    fn slope(&self, a: T) -> T {
        self.measure.slope(a).unwrap_or_else(|_| T::nan())
    }

    fn curvature(&self, a: T) -> T {
        lit::<T>(2.0) * self.measure.tail(a)
    }
}

/// `f(x) = int psi_t(x) gamma(dt)`.
pub fn momfun_of_gamma<T: Real>(measure: MixingMeasure<T>) -> Result<MomentFunction<T>> {
    let start = measure.support_start();
    let profile = MixtureProfile { measure };
    let probe = profile.measure.value(T::one())?;
    ensure!(
        probe.is_finite(),
        Construction,
        "mixture value at 1 is not finite"
    );
    Ok(MomentFunction::from_profile(
        Kind::FromGamma,
        Arc::new(profile),
        start,
        None,
    ))
}

/// Tuning for [`gamma_of`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryOptions<T> {
    /// Drops of `f''/2` inside one cell larger than this are localized and
    /// treated as atoms.
    pub jump_tol: T,
    pub bisection_steps: usize,
}

impl<T: Real> Default for RecoveryOptions<T> {
    fn default() -> Self {
        Self {
            jump_tol: lit(1e-10),
            bisection_steps: 80,
        }
    }
}

/// Recovers the mixing measure of `f` from `gamma((x, inf]) = f''(x)/2`
/// sampled on `grid`.
///
/// Jumps of `f''/2` become atoms (located by bisection inside the cell),
/// the remaining decrease in each cell becomes a constant density. Mass
/// below the grid is replaced by one atom matching its first two moments;
/// mass above the grid by an atom at the last grid point, or at infinity if
/// `f''` has a positive limit.
pub fn gamma_of<T: Real>(
    f: &MomentFunction<T>,
    grid: &[T],
    opts: RecoveryOptions<T>,
) -> Result<MixingMeasure<T>> {
    ensure!(
        grid.len() >= 2,
        Precondition,
        "grid needs at least two points"
    );
    ensure!(grid[0] > T::zero(), Precondition, "grid must be positive");
    ensure!(
        grid.windows(2).all(|w| w[0] < w[1]),
        Precondition,
        "grid must increase strictly"
    );
    ensure!(
        grid.iter().all(|x| x.is_finite()),
        Precondition,
        "grid must be finite"
    );

    let half: T = lit(0.5);
    let tail = |x: T| f.second_deriv(x) * half;
    let t: Vec<T> = grid.iter().map(|&x| tail(x)).collect();
    for i in 1..t.len() {
        ensure!(
            t[i] <= t[i - 1] + lit::<T>(1e-12) * t[i - 1].abs().max(T::one()),
            InvariantViolation,
            "f'' increases between {:?} and {:?}",
            grid[i - 1],
            grid[i]
        );
    }

    let tiny = opts.jump_tol;
    let mut atoms = Vec::new();

    let x0 = grid[0];
    let m1 = f.deriv(x0) * half - x0 * t[0];
    let m2 = lit::<T>(2.0) * x0 * m1 + x0 * x0 * t[0] - f.eval(x0);
    if m1 > tiny && m2 > T::zero() {
        atoms.push(Atom {
            location: m2 / m1,
            weight: m1 * m1 / m2,
        });
    }

    let mut values = Vec::with_capacity(grid.len() - 1);
    for i in 0..grid.len() - 1 {
        let (l, r) = (grid[i], grid[i + 1]);
        let drop = (t[i] - t[i + 1]).max(T::zero());
        let mut continuous = drop;
        if drop > tiny {
            let (mut lo, mut hi) = (l, r);
            let (mut tlo, mut thi) = (t[i], t[i + 1]);
            for _ in 0..opts.bisection_steps {
                let mid = lo + (hi - lo) * half;
                if mid <= lo || mid >= hi {
                    break;
                }
                let tm = tail(mid);
                if tlo - tm >= tm - thi {
                    hi = mid;
                    thi = tm;
                } else {
                    lo = mid;
                    tlo = tm;
                }
            }
            let jump = (tlo - thi).max(T::zero());
            if jump > tiny {
                atoms.push(Atom {
                    location: hi,
                    weight: jump,
                });
                continuous = (drop - jump).max(T::zero());
            }
        }
        values.push(continuous / (r - l));
    }

    let x_max = grid[grid.len() - 1];
    let far1 = tail(x_max * lit(1e6));
    let far2 = tail(x_max * lit(1e12));
    let at_infinity = if far2 > tiny && (far1 - far2).abs() <= lit::<T>(1e-9) * far1 {
        far2
    } else {
        T::zero()
    };
    if at_infinity > T::zero() {
        atoms.push(Atom {
            location: T::infinity(),
            weight: at_infinity,
        });
    }
    let beyond = t[t.len() - 1] - at_infinity;
    if beyond > tiny {
        atoms.push(Atom {
            location: x_max,
            weight: beyond,
        });
    }

    let density = if values.iter().any(|v| *v > T::zero()) {
        Some(Density::piecewise_constant(grid.to_vec(), values)?)
    } else {
        None
    };
    MixingMeasure::new(merge_atoms(atoms), density)
}

fn merge_atoms<T: Real>(mut atoms: Vec<Atom<T>>) -> Vec<Atom<T>> {
    atoms.sort_by(|a, b| a.location.partial_cmp(&b.location).expect("not nan"));
    let mut out: Vec<Atom<T>> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(b) if b.location == a.location => b.weight = b.weight + a.weight,
            _ => out.push(a),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momfun::AltSplineParams;

    fn grid() -> Vec<f64> {
        log_grid(1e-3, 1e3, 601)
    }

    fn max_rel_err(f: &MomentFunction<f64>, g: &MomentFunction<f64>, xs: &[f64]) -> f64 {
        xs.iter()
            .map(|&x| ((f.eval(x) - g.eval(x)) / f.eval(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn dirac_gives_extreme_function() {
        let f = momfun_of_gamma(MixingMeasure::dirac(1.0).unwrap()).unwrap();
        for x in [0.0, 0.3, 1.0, 2.5, -4.0] {
            assert_eq!(f.eval(x), psi_raw(1.0, x));
        }
        assert_eq!(f.support_start(), 1.0);
    }

    #[test]
    fn two_atoms_mix_linearly() {
        let atoms = vec![
            Atom {
                location: 1.0,
                weight: 0.5,
            },
            Atom {
                location: f64::INFINITY,
                weight: 0.5,
            },
        ];
        let f = momfun_of_gamma(MixingMeasure::new(atoms, None).unwrap()).unwrap();
        for x in [0.2, 1.0, 3.0] {
            assert!((f.eval(x) - (0.5 * psi_raw(1.0, x) + 0.5 * x * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn power_density_reproduces_power() {
        let k = 3.0 / 16.0;
        let d = Density::new(
            move |t: f64| k * t.powf(-1.5),
            |x: f64| 0.375 * x.powf(-0.5),
            vec![],
        );
        let f = momfun_of_gamma(MixingMeasure::new(vec![], Some(d)).unwrap()).unwrap();
        let closed = momfun_of_gamma(
            MixingMeasure::new(vec![], Some(Density::power(1.5).unwrap())).unwrap(),
        )
        .unwrap();
        for x in log_grid(0.1, 10.0, 30) {
            assert!((f.eval(x) - x.powf(1.5)).abs() <= 1e-6, "x={x}");
            assert!(
                (closed.eval(x) - x.powf(1.5)).abs() <= 1e-12 * x.powf(1.5),
                "x={x}"
            );
            assert!((f.deriv(x) - 1.5 * x.sqrt()).abs() <= 1e-6);
        }
    }

    #[test]
    fn rejects_bad_measures() {
        assert!(MixingMeasure::<f64>::dirac(0.0).is_err());
        assert!(MixingMeasure::new(
            vec![Atom {
                location: 1.0,
                weight: -1.0
            }],
            None
        )
        .is_err());
        let d = Density::new(|t: f64| t.powf(-2.5), |x: f64| x.powf(-1.5) / 1.5, vec![]);
        assert!(MixingMeasure::new(vec![], Some(d)).is_err());
    }

    #[test]
    fn recovers_single_atoms() {
        let f = MomentFunction::extreme(1.0).unwrap();
        let g = gamma_of(&f, &grid(), RecoveryOptions::default()).unwrap();
        assert!(g.density().is_none());
        assert_eq!(g.atoms().len(), 1);
        assert!((g.atoms()[0].location - 1.0).abs() < 1e-12);
        assert!((g.atoms()[0].weight - 1.0).abs() < 1e-15);

        let sq = MomentFunction::<f64>::square();
        let g = gamma_of(&sq, &grid(), RecoveryOptions::default()).unwrap();
        assert_eq!(
            g.atoms(),
            &[Atom {
                location: f64::INFINITY,
                weight: 1.0
            }]
        );
    }

    #[test]
    fn recovers_power_density() {
        let f = MomentFunction::power(1.5).unwrap();
        let xs = grid();
        let g = gamma_of(&f, &xs, RecoveryOptions::default()).unwrap();
        let d = g.density().expect("density");
        for i in (50..550).step_by(25) {
            let mid = (xs[i] * xs[i + 1]).sqrt();
            let exact = 3.0 / 16.0 * mid.powf(-1.5);
            assert!(((d.pdf(mid) - exact) / exact).abs() < 0.02, "t={mid}");
        }
    }

    #[test]
    fn round_trips() {
        let xs = grid();
        let cases = [
            (MomentFunction::extreme(1.0).unwrap(), 1e-12),
            (MomentFunction::square(), 1e-12),
            (
                MomentFunction::alt_spline(AltSplineParams::new(0.1).unwrap()),
                1e-6,
            ),
            (MomentFunction::power(1.3).unwrap(), 1e-2),
            (MomentFunction::power(1.7).unwrap(), 1e-2),
        ];
        for (f, tol) in cases {
            let g =
                momfun_of_gamma(gamma_of(&f, &xs, RecoveryOptions::default()).unwrap()).unwrap();
            let err = max_rel_err(&f, &g, &xs);
            assert!(err <= tol, "{:?}: {err}", f.kind());
        }
    }

    #[test]
    fn detects_increasing_curvature() {
        let bad = MomentFunction::from_profile(Kind::FromSecondDeriv, Arc::new(Rising), 0.0, None);
        assert!(matches!(
            gamma_of(&bad, &grid(), RecoveryOptions::default()),
            Err(Error::InvariantViolation(_))
        ));
    }

    struct Rising;

    impl Profile<f64> for Rising {
        fn value(&self, a: f64) -> f64 {
            a * a * a
        }
        fn slope(&self, a: f64) -> f64 {
            3.0 * a * a
        }
        fn curvature(&self, a: f64) -> f64 {
            6.0 * a
        }
    }
}
