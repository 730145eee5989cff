//! Seeded random instances used by tests, benches and the CLI generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matfun::{RMat, SkewSymmetricReal};
use crate::rpext::RTauElement;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random skew matrix with operator norm `norm` (zero matrix if `n < 2`).
pub fn random_skew<R: Rng>(rng: &mut R, n: usize, norm: f64) -> SkewSymmetricReal {
    let m = RMat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let skew = (&m - m.transpose()).scale(0.5);
    let s = SkewSymmetricReal::new(skew).expect("skew by construction");
    let current = s.norm();
    if current == 0.0 {
        return s;
    }
    SkewSymmetricReal::new(s.matrix().scale(norm / current)).expect("skew by construction")
}

/// A random skew contraction with norm drawn uniformly from `[lo, hi]`.
pub fn random_contraction<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> SkewSymmetricReal {
    let norm = rng.gen_range(lo..=hi);
    random_skew(rng, n, norm)
}

/// A random injective skew contraction on ℝ^{2k} built from `k` rotation
/// blocks with singular values in `[lo, hi]`, conjugated by a random
/// orthogonal matrix.
pub fn random_injective_contraction<R: Rng>(
    rng: &mut R,
    k: usize,
    lo: f64,
    hi: f64,
) -> SkewSymmetricReal {
    let n = 2 * k;
    let mut block = RMat::zeros(n, n);
    for b in 0..k {
        let s = rng.gen_range(lo..=hi);
        block[(2 * b, 2 * b + 1)] = -s;
        block[(2 * b + 1, 2 * b)] = s;
    }
    let g = RMat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    let m = &q * block * q.transpose();
    SkewSymmetricReal::new((&m - m.transpose()).scale(0.5)).expect("skew by construction")
}

/// `count` elements of ℝ_τ with translation part drawn from a seeded grid in
/// `[−β, β]` and alternating reflection flags.
pub fn rtau_sample<R: Rng>(rng: &mut R, beta: f64, count: usize) -> Vec<RTauElement> {
    (0..count)
        .map(|k| {
            let step = rng.gen_range(-40i32..=40) as f64 / 40.0;
            RTauElement::new(step * beta, k % 2 == 1)
        })
        .collect()
}
