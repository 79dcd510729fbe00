use crate::constants::{power_centring_constant, power_constant};
use crate::error::{ensure, Result};
use crate::momfun::MomentFunction;
use crate::report::CheckReport;
use crate::scalar::{csum, lit, Real};

use super::dist::DiscreteDist;

pub const MAX_COORDS: usize = 6;
pub const MAX_SUPPORT: usize = 8;

/// The moment function and constant factor on the right-hand side.
#[derive(Debug, Clone, Copy)]
pub enum Moment<'a, T: Real> {
    /// `|.|^p` with factor `tkappa_p tC_p`.
    Power(T),
    /// General `f` with factor `kappa * c`.
    General {
        f: &'a MomentFunction<T>,
        kappa: T,
        c: T,
    },
}

type Cost<'a, T> = Box<dyn Fn(T) -> T + 'a>;

impl<T: Real> Moment<'_, T> {
    fn resolve(&self) -> Result<(Cost<'_, T>, T)> {
        Ok(match *self {
            Moment::Power(p) => {
                let f = MomentFunction::power(p)?;
                let k = power_centring_constant(p)?.value * power_constant(p)?.value;
                (Box::new(move |x| f.eval(x)), k)
            }
            Moment::General { f, kappa, c } => (Box::new(move |x| f.eval(x)), kappa * c),
        })
    }
}

/// Result of [`check_concentration`], with the Doob-expansion diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport<T> {
    pub check: CheckReport<T>,
    /// `E Y`.
    pub mean: T,
    /// `rho_i(x~, x_i)` for each coordinate and support point.
    pub rho: Vec<Vec<T>>,
    /// `max_path |sum_i xi_i - (Y - E Y)|`.
    pub telescoping_error: T,
    /// `max_{i, path} (|eta_i| - rho_i(X_i, x_i))`; at most rounding.
    pub eta_excess: T,
    /// `max |Y|`, the scale for the two diagnostics above.
    pub scale: T,
}

impl<T: Real> ConcentrationReport<T> {
    /// Both diagnostics within `1e-12` relative to `scale`.
    pub fn diagnostics_ok(&self) -> bool {
        let tol = lit::<T>(1e-12) * self.scale.max(T::one());
        self.telescoping_error <= tol && self.eta_excess <= tol
    }
}

fn check_caps<T: Real>(marginals: &[DiscreteDist<T>]) -> Result<()> {
    ensure!(
        !marginals.is_empty(),
        Precondition,
        "need at least one coordinate"
    );
    ensure!(
        marginals.len() <= MAX_COORDS,
        Resource,
        "more than {MAX_COORDS} coordinates"
    );
    ensure!(
        marginals.iter().all(|m| m.len() <= MAX_SUPPORT),
        Resource,
        "a coordinate has more than {MAX_SUPPORT} support points"
    );
    Ok(())
}

/// Sums each block of `m` consecutive entries with weights `probs`.
fn reduce<T: Real>(table: &[T], probs: &[T]) -> Vec<T> {
    table
        .chunks(probs.len())
        .map(|c| csum(c.iter().zip(probs).map(|(v, p)| *v * *p)))
        .collect()
}

/// `E f(Y) <= f(E Y) + kappa C sum_i E f(rho_i(X_i, x_i))` for
/// `Y = g(X_1, ..., X_n)` with independent `X_i` given by `marginals`.
///
/// `rho_i(x~, x_i)` is the smallest admissible cost: the largest change of
/// `g` when coordinate `i` moves from `x_i` (the anchor) to `x~`, over all
/// values of the other coordinates; with `relaxed`, over the first `i - 1`
/// coordinates after averaging out the later ones.
pub fn check_concentration<T, G>(
    g: G,
    marginals: &[DiscreteDist<T>],
    anchors: &[T],
    moment: Moment<'_, T>,
    relaxed: bool,
) -> Result<ConcentrationReport<T>>
where
    T: Real,
    G: Fn(&[T]) -> T,
{
    check_caps(marginals)?;
    let n = marginals.len();
    ensure!(
        anchors.len() == n,
        Precondition,
        "need one anchor per coordinate"
    );
    let sizes: Vec<usize> = marginals.iter().map(|m| m.len()).collect();
    let total: usize = sizes.iter().product();
    // stride[i]: number of entries sharing a prefix of length i + 1
    let mut stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * sizes[i + 1];
    }
    let digit = |k: usize, i: usize| (k / stride[i]) % sizes[i];

    let mut point = vec![T::zero(); n];
    let mut y = Vec::with_capacity(total);
    let mut y_anchor: Vec<Vec<T>> = vec![Vec::with_capacity(total); n];
    for k in 0..total {
        for i in 0..n {
            point[i] = marginals[i].support()[digit(k, i)];
        }
        let v = g(&point);
        ensure!(v.is_finite(), Domain, "g is not finite at {point:?}");
        y.push(v);
        for i in 0..n {
            let keep = point[i];
            point[i] = anchors[i];
            y_anchor[i].push(g(&point));
            point[i] = keep;
        }
    }

    // cond[l]: E[Y | first l coordinates], indexed by the prefix
    let mut cond: Vec<Vec<T>> = vec![Vec::new(); n + 1];
    cond[n] = y.clone();
    for l in (0..n).rev() {
        cond[l] = reduce(&cond[l + 1], marginals[l].probs());
    }
    // E[Y~_i | first i + 1 coordinates]
    let cond_anchor: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut t = y_anchor[i].clone();
            for l in (i + 1..n).rev() {
                t = reduce(&t, marginals[l].probs());
            }
            t
        })
        .collect();

    let mut rho: Vec<Vec<T>> = sizes.iter().map(|&m| vec![T::zero(); m]).collect();
    for i in 0..n {
        if relaxed {
            for (k, (&a, &b)) in cond[i + 1].iter().zip(&cond_anchor[i]).enumerate() {
                let d = k % sizes[i];
                rho[i][d] = rho[i][d].max((a - b).abs());
            }
        } else {
            for k in 0..total {
                let d = digit(k, i);
                rho[i][d] = rho[i][d].max((y[k] - y_anchor[i][k]).abs());
            }
        }
    }

    let mean = cond[0][0];
    let mut tele = T::zero();
    let mut eta_excess = T::neg_infinity();
    for k in 0..total {
        let mut xi_sum = T::zero();
        for i in 0..n {
            let prefix = k / stride[i];
            let prev = if i == 0 { 0 } else { k / stride[i - 1] };
            xi_sum = xi_sum + (cond[i + 1][prefix] - cond[i][prev]);
            let eta = cond[i + 1][prefix] - cond_anchor[i][prefix];
            eta_excess = eta_excess.max(eta.abs() - rho[i][digit(k, i)]);
        }
        tele = tele.max((xi_sum - (y[k] - mean)).abs());
    }

    let (f, factor) = moment.resolve()?;
    let probs: Vec<T> = (0..total)
        .map(|k| (0..n).fold(T::one(), |acc, i| acc * marginals[i].probs()[digit(k, i)]))
        .collect();
    let lhs = csum(y.iter().zip(&probs).map(|(v, p)| *p * f(*v)));
    let rho_terms = csum((0..n).map(|i| {
        csum(
            marginals[i]
                .probs()
                .iter()
                .zip(&rho[i])
                .map(|(p, r)| *p * f(*r)),
        )
    }));
    let rhs = f(mean) + factor * rho_terms;
    let scale = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    Ok(ConcentrationReport {
        check: CheckReport::new(lhs, rhs, factor),
        mean,
        rho,
        telescoping_error: tele,
        eta_excess,
        scale,
    })
}

/// A distribution on finitely many points of `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDist<T> {
    points: Vec<Vec<T>>,
    probs: Vec<T>,
}

impl<T: Real> PointDist<T> {
    pub fn new(points: Vec<Vec<T>>, probs: Vec<T>) -> Result<Self> {
        ensure!(
            !points.is_empty() && points.len() == probs.len(),
            Domain,
            "need matching nonempty points and probs"
        );
        let dim = points[0].len();
        ensure!(dim >= 1, Domain, "points need at least one coordinate");
        ensure!(
            points.iter().all(|p| p.len() == dim),
            Domain,
            "points differ in dimension"
        );
        ensure!(
            probs.iter().all(|p| p.is_finite() && *p >= T::zero()),
            Domain,
            "bad probabilities"
        );
        let total = csum(probs.iter().copied());
        ensure!(
            (total - T::one()).abs() <= lit(1e-14),
            Domain,
            "probabilities sum to {total:?}"
        );
        Ok(Self { points, probs })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }
}

fn lp_norm<T: Real>(v: &[T], p: T) -> T {
    csum(v.iter().map(|x| x.abs().powf(p))).powf(T::one() / p)
}

/// `E ||S_n||^p <= (E ||S_n||)^p + tkappa_p tC_p sum_i E ||X_i - x_i||^p` in
/// the `l_p` norm on `R^dim`, `dim <= 4`.
pub fn check_sum_norm<T: Real>(
    vectors: &[PointDist<T>],
    p: T,
    anchors: &[Vec<T>],
) -> Result<CheckReport<T>> {
    ensure!(
        !vectors.is_empty(),
        Precondition,
        "need at least one vector"
    );
    ensure!(
        vectors.len() <= MAX_COORDS,
        Resource,
        "more than {MAX_COORDS} vectors"
    );
    ensure!(
        vectors.iter().all(|v| v.len() <= MAX_SUPPORT),
        Resource,
        "more than {MAX_SUPPORT} support points"
    );
    let dim = vectors[0].dim();
    ensure!(dim <= 4, Resource, "dimension {dim} exceeds 4");
    ensure!(
        vectors.iter().all(|v| v.dim() == dim),
        Precondition,
        "vectors differ in dimension"
    );
    ensure!(
        anchors.len() == vectors.len() && anchors.iter().all(|a| a.len() == dim),
        Precondition,
        "need one anchor of dimension {dim} per vector"
    );
    let factor = power_centring_constant(p)?.value * power_constant(p)?.value;

    let mut sums: Vec<(Vec<T>, T)> = vec![(vec![T::zero(); dim], T::one())];
    for v in vectors {
        let mut next = Vec::with_capacity(sums.len() * v.len());
        for (s, q) in &sums {
            for (pt, pr) in v.points().iter().zip(v.probs()) {
                let t: Vec<T> = s.iter().zip(pt).map(|(a, b)| *a + *b).collect();
                next.push((t, *q * *pr));
            }
        }
        sums = next;
    }
    let lhs = csum(sums.iter().map(|(s, q)| *q * lp_norm(s, p).powf(p)));
    let mean_norm = csum(sums.iter().map(|(s, q)| *q * lp_norm(s, p)));
    let spread = csum(vectors.iter().zip(anchors).map(|(v, a)| {
        csum(v.points().iter().zip(v.probs()).map(|(pt, pr)| {
            let diff: Vec<T> = pt.iter().zip(a).map(|(x, y)| *x - *y).collect();
            *pr * lp_norm(&diff, p).powf(p)
        }))
    }));
    Ok(CheckReport::new(
        lhs,
        mean_norm.powf(p) + factor * spread,
        factor,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::two_point;

    fn signs(n: usize) -> Vec<DiscreteDist<f64>> {
        vec![two_point(1.0, 1.0).unwrap(); n]
    }

    #[test]
    fn sum_of_signs_in_square_case() {
        let n = 4;
        let r = check_concentration(
            |x: &[f64]| x.iter().sum(),
            &signs(n),
            &vec![0.0; n],
            Moment::Power(2.0),
            false,
        )
        .unwrap();
        assert!((r.check.lhs - n as f64).abs() < 1e-13);
        assert!((r.check.rhs - n as f64).abs() < 1e-13);
        assert!(r.check.passed);
        assert!(r.rho.iter().flatten().all(|v| (*v - 1.0).abs() < 1e-15));
        assert!(r.diagnostics_ok());
    }

    #[test]
    fn absolute_sum_power() {
        let r = check_concentration(
            |x: &[f64]| (x[0] + x[1]).abs(),
            &signs(2),
            &[0.0, 0.0],
            Moment::Power(1.5),
            false,
        )
        .unwrap();
        assert!(r.check.passed);
        assert!(r.diagnostics_ok());
        assert!(r.telescoping_error < 1e-15);
    }

    #[test]
    fn relaxed_costs_are_smaller() {
        let ms = vec![
            DiscreteDist::new(vec![0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap(),
            DiscreteDist::new(vec![-1.0, 2.0], vec![0.6, 0.4]).unwrap(),
            two_point(0.5, 1.5).unwrap(),
        ];
        let g = |x: &[f64]| (x[0] * x[1]).sin() + x[2] * x[0].max(x[1]);
        let anchors = [1.0, 0.0, 0.25];
        let strict = check_concentration(g, &ms, &anchors, Moment::Power(1.3), false).unwrap();
        let relaxed = check_concentration(g, &ms, &anchors, Moment::Power(1.3), true).unwrap();
        for (a, b) in strict
            .rho
            .iter()
            .flatten()
            .zip(relaxed.rho.iter().flatten())
        {
            assert!(b <= a);
        }
        assert!(strict.check.passed && relaxed.check.passed);
        assert!(strict.diagnostics_ok() && relaxed.diagnostics_ok());
    }

    #[test]
    fn caps_are_enforced() {
        let wide =
            DiscreteDist::new((0..9).map(|i| i as f64).collect(), vec![1.0 / 9.0; 9]).unwrap();
        let r = check_concentration(|x: &[f64]| x[0], &[wide], &[0.0], Moment::Power(1.5), false);
        assert!(matches!(r, Err(crate::Error::Resource(_))));
        let r = check_concentration(
            |x: &[f64]| x[0],
            &signs(7),
            &[0.0; 7],
            Moment::Power(1.5),
            false,
        );
        assert!(matches!(r, Err(crate::Error::Resource(_))));
    }

    #[test]
    fn sum_norm_checks() {
        let line = |c: f64, d: f64| {
            let t = two_point(c, d).unwrap();
            PointDist::new(
                t.support().iter().map(|x| vec![*x]).collect(),
                t.probs().to_vec(),
            )
            .unwrap()
        };
        let vs = vec![line(1.0, 2.0), line(0.5, 0.5), line(2.0, 1.0)];
        let r = check_sum_norm(&vs, 1.5, &[vec![0.0], vec![0.0], vec![0.0]]).unwrap();
        assert!(r.passed);
        let ms: Vec<DiscreteDist<f64>> = [(1.0, 2.0), (0.5, 0.5), (2.0, 1.0)]
            .iter()
            .map(|&(c, d)| two_point(c, d).unwrap())
            .collect();
        let c = check_concentration(
            |x: &[f64]| x.iter().sum::<f64>().abs(),
            &ms,
            &[0.0; 3],
            Moment::Power(1.5),
            false,
        )
        .unwrap();
        assert!((c.check.lhs - r.lhs).abs() < 1e-13);
        assert!(c.check.rhs <= r.rhs + 1e-13);

        let unit = |s: f64| {
            PointDist::new(
                vec![vec![s, 0.0], vec![-s, 0.0], vec![0.0, s], vec![0.0, -s]],
                vec![0.25; 4],
            )
            .unwrap()
        };
        let vs = vec![unit(1.0), unit(2.0), unit(0.5)];
        let zero = vec![vec![0.0, 0.0]; 3];
        assert!(check_sum_norm(&vs, 1.5, &zero).unwrap().passed);
        let medians = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, -0.5]];
        assert!(check_sum_norm(&vs, 1.5, &medians).unwrap().passed);
    }
}
