//! Orderings of the kink locations `z = (1, x, 1+x-c, |x-c|, 1-c, c, 1-x)`
//! of the normalized forms, for `0 < x < 1` and `1/2 < c < 1`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::oracle::suites::stream;

/// Ways for `(u, t)` to fall in the 8 intervals cut out by the 7 kinks,
/// counting unordered pairs: `8 * 9 / 2`.
pub const CASES_PER_ORDERING: usize = 36;

const LABELS: [&str; 7] = ["1", "x", "1 + x - c", "|x - c|", "1 - c", "c", "1 - x"];

/// Samples closer than this (relative) are treated as ties and skipped.
const TIE_GAP: f64 = 1e-9;

fn kinks(x: f64, c: f64) -> [f64; 7] {
    [1.0, x, 1.0 + x - c, (x - c).abs(), 1.0 - c, c, 1.0 - x]
}

/// The permutation sorting the kinks ascending, or `None` at a near tie.
fn sorting_permutation(x: f64, c: f64) -> Option<[usize; 7]> {
    let z = kinks(x, c);
    let mut perm = [0, 1, 2, 3, 4, 5, 6];
    perm.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    let distinct = perm
        .windows(2)
        .all(|w| z[w[1]] - z[w[0]] > TIE_GAP * z[w[1]].max(1e-300));
    distinct.then_some(perm)
}

/// Lexicographic rank in `0..5040` of a permutation of `0..7`.
fn rank(perm: &[usize; 7]) -> usize {
    let mut r = 0;
    for i in 0..7 {
        let smaller = perm[i + 1..].iter().filter(|&&q| q < perm[i]).count();
        r = r * (7 - i) + smaller;
    }
    r
}

/// Rank of the sorting permutation of the kinks at `(x, c)`; ties are
/// broken by kink index.
pub(crate) fn ordering_id(x: f64, c: f64) -> usize {
    let z = kinks(x, c);
    let mut perm = [0, 1, 2, 3, 4, 5, 6];
    perm.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    rank(&perm)
}

/// A feasible strict ordering with a witness `(x, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    /// Kink indices from smallest to largest.
    pub permutation: [usize; 7],
    pub x_below_c: bool,
    pub witness: (f64, f64),
}

impl Ordering {
    pub fn id(&self) -> usize {
        rank(&self.permutation)
    }

    /// The chain, e.g. `x - c < 1 - x < ... < 1 + x - c`.
    pub fn describe(&self) -> String {
        self.permutation
            .iter()
            .map(|&k| match (k, self.x_below_c) {
                (3, true) => "c - x",
                (3, false) => "x - c",
                _ => LABELS[k],
            })
            .collect::<Vec<_>>()
            .join(" < ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCount {
    pub x_below_c: usize,
    pub x_above_c: usize,
    /// `(x_below_c + x_above_c) * CASES_PER_ORDERING`.
    pub cases: usize,
    pub orderings: Vec<Ordering>,
}

impl OrderingCount {
    pub fn triple(&self) -> (usize, usize, usize) {
        (self.x_below_c, self.x_above_c, self.cases)
    }

    fn from_map(map: BTreeMap<[usize; 7], (bool, (f64, f64))>) -> Self {
        let mut orderings: Vec<Ordering> = map
            .into_iter()
            .map(|(permutation, (x_below_c, witness))| Ordering {
                permutation,
                x_below_c,
                witness,
            })
            .collect();
        orderings.sort_by_key(|o| (!o.x_below_c, o.id()));
        let below = orderings.iter().filter(|o| o.x_below_c).count();
        let above = orderings.len() - below;
        Self {
            x_below_c: below,
            x_above_c: above,
            cases: (below + above) * CASES_PER_ORDERING,
            orderings,
        }
    }
}

fn insert(map: &mut BTreeMap<[usize; 7], (bool, (f64, f64))>, x: f64, c: f64) {
    if x == c {
        return;
    }
    if let Some(perm) = sorting_permutation(x, c) {
        map.entry(perm).or_insert((x < c, (x, c)));
    }
}

const CHUNKS: u64 = 64;

/// Distinct strict orderings over `samples` uniform draws of `(x, c)` in
/// `(0, 1) x (0, 1)`, rejecting `c <= 1/2`. Witnesses are the first hit in
/// draw order, so the result depends only on `(samples, seed)`.
pub fn enumerate_orderings_with(samples: u64, seed: u64) -> OrderingCount {
    let per = samples.div_ceil(CHUNKS);
    let maps: Vec<_> = (0..CHUNKS)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let mut map = BTreeMap::new();
            let count = per.min(samples.saturating_sub(k * per));
            for _ in 0..count {
                let x: f64 = rng.gen();
                let c: f64 = rng.gen();
                if c > 0.5 && x > 0.0 {
                    insert(&mut map, x, c);
                }
            }
            map
        })
        .collect();
    let mut all = BTreeMap::new();
    for m in maps {
        for (k, v) in m {
            all.entry(k).or_insert(v);
        }
    }
    OrderingCount::from_map(all)
}

/// [`enumerate_orderings_with`] at `10^6` draws and a fixed seed.
pub fn enumerate_orderings() -> OrderingCount {
    enumerate_orderings_with(1_000_000, 0)
}

/// Exhaustive scan of cell centres of an `m x m` grid over
/// `(0, 1) x (1/2, 1)`.
pub fn grid_orderings(m: usize) -> OrderingCount {
    let maps: Vec<_> = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) / m as f64;
            let mut map = BTreeMap::new();
            for j in 0..m {
                let c = 0.5 + 0.5 * (j as f64 + 0.5) / m as f64;
                insert(&mut map, x, c);
            }
            map
        })
        .collect();
    let mut all = BTreeMap::new();
    for m in maps {
        for (k, v) in m {
            all.entry(k).or_insert(v);
        }
    }
    OrderingCount::from_map(all)
}
