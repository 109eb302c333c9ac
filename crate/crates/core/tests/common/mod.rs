#![allow(dead_code)]

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use infodim::ProbDist;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point in [0, 1) drawn from a binomial cascade: at each level the right
/// half is taken with probability `m1`, then uniform within the leaf.
pub fn cascade_point(rng: &mut impl Rng, m1: f64, depth: u32) -> f64 {
    let (mut lo, mut width) = (0.0, 1.0);
    for _ in 0..depth {
        width /= 2.0;
        if rng.gen::<f64>() < m1 {
            lo += width;
        }
    }
    lo + rng.gen::<f64>() * width
}

/// Strictly positive distribution of size `n`, uniform on the simplex.
pub fn random_dist(rng: &mut impl Rng, n: usize) -> ProbDist {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-300).collect();
    ProbDist::from_weights(w).unwrap()
}

/// Writes a `time,magnitude` catalog.
pub fn write_catalog(path: &Path, events: &[(f64, f64)]) {
    let mut text = String::from("time,magnitude\n");
    for (t, m) in events {
        text.push_str(&format!("{t},{m}\n"));
    }
    std::fs::write(path, text).unwrap();
}

/// 10,000-event catalog over `[0, span)` sampled from a (0.3, 0.7)
/// cascade of depth 12, magnitudes uniform in [1, 4).
pub fn cascade_catalog(seed: u64, n: usize, span: f64) -> Vec<(f64, f64)> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let t = cascade_point(&mut r, 0.7, 12) * span;
            let m = 1.0 + 3.0 * r.gen::<f64>();
            (t, m)
        })
        .collect()
}
