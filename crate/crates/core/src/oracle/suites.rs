//! Seeded random verification suites. Instance `i` draws from its own
//! ChaCha stream, so results do not depend on thread scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::{power_constant, sharp_constant, SupGrid};
use crate::error::Result;
use crate::momfun::MomentFunction;
use crate::report::{CheckReport, SweepReport};

use super::concentration::{check_concentration, Moment};
use super::dist::{two_point, DiscreteDist};
use super::tree::{check_tree_inequality, Branch, MartingaleTree, Node};
use super::{check_centring, check_main_inequality};

pub(crate) fn stream(seed: u64, i: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i);
    r
}

pub(crate) fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Probabilities from uniform weights, summing to one.
fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / total).collect();
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

struct Outcome {
    deficit: f64,
    passed: bool,
    point: Vec<(String, f64)>,
}

fn summarize(sweep: &str, seed: u64, outcomes: Vec<Outcome>, tolerance: f64) -> SweepReport {
    let n = outcomes.len() as u64;
    let violations = outcomes.iter().filter(|o| !o.passed).count() as u64;
    let worst = outcomes
        .into_iter()
        .reduce(|a, b| if b.deficit > a.deficit { b } else { a });
    let (max_violation, argmax_point) = worst
        .map(|o| (o.deficit, o.point))
        .unwrap_or((f64::NEG_INFINITY, Vec::new()));
    SweepReport {
        sweep: sweep.into(),
        n,
        seed,
        max_violation,
        argmax_point,
        violations,
        tolerance,
        extra: vec![("min_relative_slack".into(), -max_violation)],
    }
}

fn from_check(r: &CheckReport<f64>, point: Vec<(String, f64)>) -> Outcome {
    Outcome {
        deficit: -r.relative_slack(),
        passed: r.passed,
        point,
    }
}

/// Random independent two-point differences checked against `C = tC_p`:
/// `p` uniform in `(1.01, 2]`, `n in {2, 3, 4}`, atoms and scales
/// log-uniform in `[1e-3, 1e3]`.
pub fn main_inequality_suite(n: u64, seed: u64) -> Result<SweepReport> {
    let outcomes = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let p = rng.gen_range(1.01..=2.0);
            let k = rng.gen_range(2..=4usize);
            let scale = log_uniform(&mut rng, 1e-3, 1e3);
            let diffs = (0..k)
                .map(|_| {
                    let c = log_uniform(&mut rng, 1e-3, 1e3);
                    let d = log_uniform(&mut rng, 1e-3, 1e3);
                    two_point(scale * c, scale * d)
                })
                .collect::<Result<Vec<_>>>()?;
            let f = MomentFunction::power(p)?;
            let tc = power_constant(p)?.value;
            let r = check_main_inequality(&f, &diffs, tc)?;
            Ok(from_check(
                &r,
                vec![
                    ("index".into(), i as f64),
                    ("p".into(), p),
                    ("n".into(), k as f64),
                ],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("oracle", seed, outcomes, 1e-12))
}

/// A family for [`tree_suite`]: the function and the constant to test.
#[derive(Debug, Clone)]
pub struct TreeFamily {
    pub name: String,
    pub f: MomentFunction<f64>,
    pub c: f64,
}

/// `psi_1`, `|.|^1.3`, `|.|^1.7` (and optionally the alternating spline with
/// `x1 = 0.1`), each with its computed `C_f` plus `allowance`.
pub fn tree_families(include_spline: bool, allowance: f64) -> Result<Vec<TreeFamily>> {
    let mut fams = vec![
        ("psi_1".to_string(), MomentFunction::extreme(1.0)?),
        ("power_1.3".to_string(), MomentFunction::power(1.3)?),
        ("power_1.7".to_string(), MomentFunction::power(1.7)?),
    ];
    if include_spline {
        let params = crate::momfun::AltSplineParams::new(0.1)?;
        fams.push(("alt_0.1".to_string(), MomentFunction::alt_spline(params)));
    }
    fams.into_iter()
        .map(|(name, f)| {
            let c = sharp_constant(&f, SupGrid::default())?.value + allowance;
            Ok(TreeFamily { name, f, c })
        })
        .collect()
}

fn random_node(rng: &mut ChaCha8Rng, level: usize, depth: usize) -> Node<f64> {
    if level == depth {
        return Node::leaf();
    }
    let scale = log_uniform(rng, 1e-2, 1e2);
    let values: Vec<(f64, f64)> = if level == 0 {
        let k = rng.gen_range(1..=3usize);
        let probs = random_probs(rng, k);
        (0..k)
            .map(|j| (scale * rng.gen_range(-2.0..2.0), probs[j]))
            .collect()
    } else {
        let a = -scale * log_uniform(rng, 0.05, 5.0);
        let b = scale * log_uniform(rng, 0.05, 5.0);
        if rng.gen_bool(0.5) {
            let pb = -a / (b - a);
            vec![(a, 1.0 - pb), (b, pb)]
        } else {
            let w = rng.gen_range(a..b);
            // keep the mean of the remaining two atoms inside (a, b)
            let q_max = if w > 0.0 { -a / (w - a) } else { b / (b - w) };
            let q = rng.gen_range(0.05..0.9) * q_max.min(0.5);
            let pb = (-q * w - (1.0 - q) * a) / (b - a);
            vec![(a, 1.0 - q - pb), (b, pb), (w, q)]
        }
    };
    Node {
        children: values
            .into_iter()
            .map(|(diff, prob)| Branch {
                diff,
                prob,
                node: random_node(rng, level + 1, depth),
            })
            .collect(),
    }
}

/// Random v-martingale trees of depth at most 3 and branching at most 3.
/// Tree `i` is checked against family `i mod families.len()`.
pub fn tree_suite(n: u64, seed: u64, families: &[TreeFamily]) -> Result<SweepReport> {
    let outcomes = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let depth = rng.gen_range(1..=3usize);
            let tree = MartingaleTree::new(random_node(&mut rng, 0, depth))?;
            let fam = &families[(i as usize) % families.len()];
            let r = check_tree_inequality(&fam.f, &tree, fam.c);
            Ok(from_check(
                &r,
                vec![
                    ("index".into(), i as f64),
                    ("family".into(), (i as usize % families.len()) as f64),
                ],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("tree", seed, outcomes, 1e-12))
}

fn random_support(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(k);
    while v.len() < k {
        let x = (rng.gen_range(-3.0..3.0f64) * 64.0).round() / 64.0;
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v
}

/// Random product-space instances (`n <= 4` coordinates, supports of size
/// at most 4) for the power concentration inequality. Odd instances use the
/// relaxed costs. An instance fails if the inequality or either Doob
/// diagnostic fails.
pub fn concentration_suite(n: u64, seed: u64) -> Result<SweepReport> {
    let outcomes = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let coords = rng.gen_range(1..=4usize);
            let mut marginals = Vec::with_capacity(coords);
            for _ in 0..coords {
                let k = rng.gen_range(1..=4usize);
                let probs = random_probs(&mut rng, k);
                marginals.push(DiscreteDist::new(random_support(&mut rng, k), probs)?);
            }
            let p = rng.gen_range(1.01..=2.0);
            let kind = rng.gen_range(0..4u32);
            let table: Vec<f64> = (0..256).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let anchors: Vec<f64> = marginals
                .iter()
                .map(|m| {
                    if kind == 0 {
                        m.support()[rng.gen_range(0..m.len())]
                    } else {
                        rng.gen_range(-3.0..3.0)
                    }
                })
                .collect();
            let supports: Vec<Vec<f64>> = marginals.iter().map(|m| m.support().to_vec()).collect();
            let g = |x: &[f64]| -> f64 {
                match kind {
                    0 => {
                        let mut idx = 0usize;
                        for (v, s) in x.iter().zip(&supports) {
                            idx = idx * 4 + s.iter().position(|u| u == v).expect("support point");
                        }
                        table[idx]
                    }
                    1 => x.iter().sum(),
                    2 => x.iter().sum::<f64>().abs(),
                    _ => x.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)),
                }
            };
            let relaxed = i % 2 == 1;
            let r = check_concentration(g, &marginals, &anchors, Moment::Power(p), relaxed)?;
            let mut o = from_check(
                &r.check,
                vec![
                    ("index".into(), i as f64),
                    ("p".into(), p),
                    ("coords".into(), coords as f64),
                ],
            );
            o.passed &= r.diagnostics_ok();
            Ok(o)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("concentration", seed, outcomes, 1e-12))
}

/// Random zero-mean laws (mixtures of up to three two-point laws) and
/// shifts `a`, checked against `E f(X) <= kappa E f(X + a)`.
pub fn centring_suite(
    n: u64,
    seed: u64,
    f: &MomentFunction<f64>,
    kappa: f64,
) -> Result<SweepReport> {
    let outcomes = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let m = rng.gen_range(1..=3usize);
            let weights = random_probs(&mut rng, m);
            let scale = log_uniform(&mut rng, 1e-2, 1e2);
            let mut support = Vec::new();
            let mut probs = Vec::new();
            for w in weights {
                let t = two_point(
                    scale * log_uniform(&mut rng, 1e-2, 1e2),
                    scale * log_uniform(&mut rng, 1e-2, 1e2),
                )?;
                for (x, p) in t.iter() {
                    support.push(x);
                    probs.push(w * p);
                }
            }
            let dist = DiscreteDist::new(support, probs)?;
            let a = scale * rng.gen_range(-2.0..2.0);
            let r = check_centring(f, &dist, a, kappa)?;
            Ok(from_check(
                &r,
                vec![("index".into(), i as f64), ("a".into(), a)],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("centring", seed, outcomes, 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_deterministic() {
        let a = main_inequality_suite(200, 7).unwrap();
        let b = main_inequality_suite(200, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.passed(), "{a:?}");
        assert_ne!(a, main_inequality_suite(200, 8).unwrap());
    }

    #[test]
    fn small_suites_pass() {
        let fams = tree_families(false, 1e-3).unwrap();
        assert!(tree_suite(60, 1, &fams).unwrap().passed());
        assert!(concentration_suite(40, 1).unwrap().passed());
        let f = MomentFunction::<f64>::power(1.5).unwrap();
        assert!(centring_suite(100, 1, &f, 1.147).unwrap().passed());
    }
}
