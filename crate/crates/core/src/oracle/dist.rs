use crate::error::{ensure, Result};
use crate::momfun::MomentFunction;
use crate::scalar::{csum, lit, Real};

/// Support points closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Cap on the product of support sizes in [`convolve_independent`].
pub const CONVOLUTION_CAP: usize = 10_000_000;

/// A probability distribution with finite support, kept sorted with
/// strictly increasing support points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist<T> {
    support: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> DiscreteDist<T> {
    /// Validates and canonicalizes (sorts, merges near-duplicates, drops
    /// zero-probability points).
    pub fn new(support: Vec<T>, probs: Vec<T>) -> Result<Self> {
        ensure!(!support.is_empty(), Domain, "empty support");
        ensure!(
            support.len() == probs.len(),
            Domain,
            "support and probabilities differ in length"
        );
        ensure!(
            support.iter().all(|x| x.is_finite()),
            Domain,
            "support points must be finite"
        );
        ensure!(
            probs.iter().all(|p| p.is_finite() && *p >= T::zero()),
            Domain,
            "probabilities must be finite and nonnegative"
        );
        let total = csum(probs.iter().copied());
        let n = T::from_usize(probs.len()).expect("length fits");
        let tol = lit::<T>(1e-14).max(n * T::epsilon());
        ensure!(
            (total - T::one()).abs() <= tol,
            Domain,
            "probabilities sum to {total:?}"
        );
        Ok(Self::canonical(support.into_iter().zip(probs).collect()))
    }

    pub(crate) fn canonical(mut pairs: Vec<(T, T)>) -> Self {
        pairs.retain(|(_, p)| *p > T::zero());
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let merge: T = lit(MERGE_TOL);
        let mut support: Vec<T> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<T> = Vec::with_capacity(pairs.len());
        for (x, p) in pairs {
            match support.last() {
                Some(&y) if x - y <= merge => {
                    let last = probs.last_mut().expect("paired");
                    *last = *last + p;
                }
                _ => {
                    support.push(x);
                    probs.push(p);
                }
            }
        }
        Self { support, probs }
    }

    pub fn point_mass(x: T) -> Self {
        Self {
            support: vec![x],
            probs: vec![T::one()],
        }
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    /// `E h(X)` with compensated summation.
    pub fn expect<H: Fn(T) -> T>(&self, h: H) -> T {
        csum(self.iter().map(|(x, p)| p * h(x)))
    }

    pub fn mean(&self) -> T {
        self.expect(|x| x)
    }

    /// `E |X|`.
    pub fn abs_mean(&self) -> T {
        self.expect(|x| x.abs())
    }

    /// `|E X| <= 1e-12 E|X|` (or `E X = 0` exactly).
    pub fn is_centred(&self) -> bool {
        self.mean().abs() <= lit::<T>(1e-12) * self.abs_mean()
    }

    /// Law of `X + a`.
    pub fn shifted(&self, a: T) -> Self {
        Self::canonical(self.iter().map(|(x, p)| (x + a, p)).collect())
    }
}

/// `X_{c,d}`: `P(X = -c) = d/(c+d)`, `P(X = d) = c/(c+d)`.
pub fn two_point<T: Real>(c: T, d: T) -> Result<DiscreteDist<T>> {
    ensure!(
        c > T::zero() && c.is_finite(),
        Domain,
        "c must be positive, got {c:?}"
    );
    ensure!(
        d > T::zero() && d.is_finite(),
        Domain,
        "d must be positive, got {d:?}"
    );
    let s = c + d;
    Ok(DiscreteDist {
        support: vec![-c, d],
        probs: vec![d / s, c / s],
    })
}

/// Exact law of the sum of independent variables.
pub fn convolve_independent<T: Real>(dists: &[DiscreteDist<T>]) -> Result<DiscreteDist<T>> {
    ensure!(!dists.is_empty(), Domain, "need at least one distribution");
    let mut size: usize = 1;
    for d in dists {
        size = size.saturating_mul(d.len());
        ensure!(
            size <= CONVOLUTION_CAP,
            Resource,
            "product of support sizes exceeds {CONVOLUTION_CAP}"
        );
    }
    let mut acc = dists[0].clone();
    for d in &dists[1..] {
        let mut pairs = Vec::with_capacity(acc.len() * d.len());
        for (x, p) in acc.iter() {
            for (y, q) in d.iter() {
                pairs.push((x + y, p * q));
            }
        }
        acc = DiscreteDist::canonical(pairs);
    }
    Ok(acc)
}

/// `E f(X)`.
pub fn expect_f<T: Real>(dist: &DiscreteDist<T>, f: &MomentFunction<T>) -> T {
    dist.expect(|x| f.eval(x))
}
