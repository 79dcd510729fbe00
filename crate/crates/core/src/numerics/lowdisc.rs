//! Additive-recurrence (Kronecker) low-discrepancy sequence with a seeded
//! Cranley–Patterson rotation.
//!
//! The generator for dimension `d` uses `alpha_k = phi_d^{-k}` where `phi_d`
//! is the positive root of `x^{d+1} = x + 1`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct KroneckerSequence {
    alpha: Vec<f64>,
    shift: Vec<f64>,
}

fn generalized_golden(dim: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..200 {
        x = (1.0 + x).powf(1.0 / (dim as f64 + 1.0));
    }
    x
}

impl KroneckerSequence {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1);
        let phi = generalized_golden(dim);
        let alpha = (1..=dim).map(|k| phi.powi(-(k as i32)).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        Self { alpha, shift }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// The `i`-th point, every coordinate in `[0, 1)`.
    pub fn point(&self, i: u64) -> Vec<f64> {
        let n = (i + 1) as f64;
        self.alpha
            .iter()
            .zip(&self.shift)
            .map(|(&a, &s)| {
                let v = (s + (n * a).fract()).fract();
                if v < 0.0 {
                    v + 1.0
                } else {
                    v
                }
            })
            .collect()
    }

    /// The `i`-th point mapped to the open box `prod (lo_k, hi_k)`.
    pub fn point_in(&self, i: u64, bounds: &[(f64, f64)]) -> Vec<f64> {
        debug_assert_eq!(bounds.len(), self.dim());
        self.point(i)
            .into_iter()
            .zip(bounds)
            .map(|(u, &(lo, hi))| {
                // keep strictly inside the open box
                let u = u.clamp(f64::EPSILON, 1.0 - f64::EPSILON);
                lo + (hi - lo) * u
            })
            .collect()
    }
}
