#![allow(dead_code)]

use mixedmop::{MultiIndex, MultiIndexPair, WeightFamily};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random normal configuration: one common variance per family, distinct centers.
#[derive(Debug, Clone)]
pub struct GaussianConfig {
    pub w1: WeightFamily,
    pub w2: WeightFamily,
    pub pair: MultiIndexPair,
    pub centers1: Vec<f64>,
    pub centers2: Vec<f64>,
}

impl GaussianConfig {
    pub fn label(&self) -> String {
        format!("{} centers {:?} / {:?}", self.pair, self.centers1, self.centers2)
    }

    /// Interval where the kernel is not negligible.
    pub fn window(&self) -> (f64, f64) {
        let (a, b) = self.w1.effective_interval(2.5);
        let (c, d) = self.w2.effective_interval(2.5);
        (a.min(c), b.max(d))
    }
}

pub fn partition(rng: &mut ChaCha8Rng, total: usize, parts: usize) -> Vec<usize> {
    let mut out = vec![1; parts];
    for _ in parts..total {
        let k = rng.random_range(0..parts);
        out[k] += 1;
    }
    out
}

pub fn centers(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    loop {
        let mut c: Vec<f64> = (0..count).map(|_| rng.random_range(-1.5..1.5)).collect();
        c.sort_by(f64::total_cmp);
        if c.windows(2).all(|w| w[1] - w[0] > 0.3) {
            return c.into_iter().map(|x: f64| (x * 100.0).round() / 100.0).collect();
        }
    }
}

pub fn family(rng: &mut ChaCha8Rng, centers: &[f64], variance: f64) -> WeightFamily {
    let specs: Vec<(f64, f64, f64)> = centers
        .iter()
        .map(|&c| (c, variance, rng.random_range(0.5..2.0)))
        .collect();
    WeightFamily::gaussians(&specs).unwrap()
}

/// Balanced pair with `p, q ∈ 1..=3` and `|n| = |m| ∈ min_total..=max_total`.
pub fn random_balanced(rng: &mut ChaCha8Rng, min_total: usize, max_total: usize) -> GaussianConfig {
    let p = rng.random_range(1..=3);
    let q = rng.random_range(1..=3);
    let lo = min_total.max(p).max(q);
    let total = rng.random_range(lo..=max_total.max(lo));
    let n = partition(rng, total, p);
    let m = partition(rng, total, q);
    let centers1 = centers(rng, p);
    let centers2 = centers(rng, q);
    let v1 = rng.random_range(0.2..0.6);
    let v2 = rng.random_range(0.2..0.6);
    GaussianConfig {
        w1: family(rng, &centers1, v1),
        w2: family(rng, &centers2, v2),
        pair: MultiIndexPair::rh_balanced(MultiIndex::new(n).unwrap(), MultiIndex::new(m).unwrap()).unwrap(),
        centers1,
        centers2,
    }
}

/// All compositions of `total` into `parts` positive integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
