//! Shared fixtures for the benchmarks in `benches/`.

use mixedmop::{MultiIndex, MultiIndexPair, WeightFamily};

/// Two Gaussians against one, balanced pair with `|n| = |m| = 2 * half`.
pub fn balanced_fixture(half: usize) -> (WeightFamily, WeightFamily, MultiIndexPair) {
    let w1 = WeightFamily::gaussians(&[(-1.0, 0.4, 1.0), (1.0, 0.4, 1.3)]).unwrap();
    let w2 = WeightFamily::gaussians(&[(0.2, 0.5, 0.8)]).unwrap();
    let pair = MultiIndexPair::rh_balanced(
        MultiIndex::new(vec![half, half]).unwrap(),
        MultiIndex::new(vec![2 * half]).unwrap(),
    )
    .unwrap();
    (w1, w2, pair)
}
