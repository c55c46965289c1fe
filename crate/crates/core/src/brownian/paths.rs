//! Rejection sampling of non-intersecting bridges on a time grid.
//!
//! Non-intersection is only checked at grid times, so this is an
//! approximation of the continuous-time conditioning; it is biased towards
//! bundles that cross between grid points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::config::BrownianConfig;
use super::density::MAX_QUADRATURE_PATHS;
use crate::error::{Error, Result};

pub const MIN_TIME_STEPS: usize = 64;

/// Below this acceptance rate sampling is abandoned.
const MIN_ACCEPTANCE: f64 = 1e-5;
/// Attempts made before the acceptance rate is judged.
const JUDGE_AFTER: usize = 200_000;
/// Independent RNG streams; stream `w` of `seed` feeds worker `w`.
const WORKERS: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct PathBundles {
    pub times: Vec<f64>,
    /// `bundles[b][path][time]`.
    pub bundles: Vec<Vec<Vec<f64>>>,
    pub attempts: usize,
    pub acceptance_rate: f64,
    /// Index of the observation time `t` in `times`.
    pub t_index: usize,
}

impl PathBundles {
    /// Positions of every accepted path at time `t`.
    pub fn positions_at_t(&self) -> Vec<f64> {
        self.bundles
            .iter()
            .flat_map(|b| b.iter().map(|p| p[self.t_index]))
            .collect()
    }

    /// `time,path_index,position` rows for every bundle, with a bundle column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bundle,time,path_index,position\n");
        for (b, bundle) in self.bundles.iter().enumerate() {
            for (j, path) in bundle.iter().enumerate() {
                for (t, x) in self.times.iter().zip(path) {
                    out.push_str(&format!("{},{:.16e},{},{:.16e}\n", b + 1, t, j + 1, x));
                }
            }
        }
        out
    }
}

fn time_grid(steps: usize, t: f64) -> (Vec<f64>, usize) {
    let mut times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let idx = times.partition_point(|&s| s < t);
    if (times[idx] - t).abs() > 1e-12 {
        times.insert(idx, t);
    } else {
        times[idx] = t;
    }
    (times, idx)
}

fn bridge_bundle(cfg: &BrownianConfig, times: &[f64], starts: &[f64], ends: &[f64], rng: &mut ChaCha8Rng) -> Option<Vec<Vec<f64>>> {
    let n = starts.len();
    let scale = f64::from(cfg.variance_scale());
    let mut paths: Vec<Vec<f64>> = starts.iter().map(|&a| vec![a; times.len()]).collect();
    for i in 0..times.len() - 1 {
        let (ti, tn) = (times[i], times[i + 1]);
        let dt = tn - ti;
        for j in 0..n {
            let x = paths[j][i];
            let remain = 1.0 - ti;
            let mean = x + (ends[j] - x) * dt / remain;
            let var = dt * (1.0 - tn) / remain / scale;
            let z: f64 = rng.sample(StandardNormal);
            paths[j][i + 1] = mean + var.max(0.0).sqrt() * z;
        }
        // strict ordering at interior times
        if i + 1 < times.len() - 1 && (1..n).any(|j| paths[j][i + 1] <= paths[j - 1][i + 1]) {
            return None;
        }
    }
    Some(paths)
}

/// Accepted bundles of `n` bridges on a grid of at least `steps` steps that contains `t`.
pub fn sample_paths(cfg: &BrownianConfig, steps: usize, count: usize, seed: u64) -> Result<PathBundles> {
    cfg.validate()?;
    if !cfg.is_distinct() {
        return Err(Error::InvalidInput("path sampling needs distinct start and end points".into()));
    }
    if cfg.n() > MAX_QUADRATURE_PATHS {
        return Err(Error::InvalidInput("path sampling supports at most 4 paths".into()));
    }
    if steps < MIN_TIME_STEPS {
        return Err(Error::InvalidInput(format!("time grid needs at least {MIN_TIME_STEPS} steps, got {steps}")));
    }
    let (times, t_index) = time_grid(steps, cfg.t);
    let starts = cfg.start_points();
    let ends = cfg.end_points();
    let results: Vec<Result<(Vec<Vec<Vec<f64>>>, usize)>> = (0..WORKERS)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let want = count / WORKERS + usize::from(w < count % WORKERS);
            let mut got = Vec::with_capacity(want);
            let mut attempts = 0usize;
            while got.len() < want {
                attempts += 1;
                if let Some(b) = bridge_bundle(cfg, &times, &starts, &ends, &mut rng) {
                    got.push(b);
                }
                if attempts >= JUDGE_AFTER && (got.len() as f64) < MIN_ACCEPTANCE * attempts as f64 {
                    return Err(Error::Accuracy {
                        context: "non-intersection rejection sampling (points too close; separate the start/end points)".into(),
                        achieved: got.len() as f64 / attempts as f64,
                        requested: MIN_ACCEPTANCE,
                    });
                }
            }
            Ok((got, attempts))
        })
        .collect();
    let mut bundles = Vec::with_capacity(count);
    let mut attempts = 0;
    for r in results {
        let (b, a) = r?;
        bundles.extend(b);
        attempts += a;
    }
    Ok(PathBundles {
        acceptance_rate: if attempts == 0 { 1.0 } else { bundles.len() as f64 / attempts as f64 },
        times,
        bundles,
        attempts,
        t_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path_always_accepted() {
        let cfg = BrownianConfig::distinct(&[0.0], &[1.0], 0.3, false).unwrap();
        let out = sample_paths(&cfg, 64, 100, 1).unwrap();
        assert_eq!(out.acceptance_rate, 1.0);
        assert_eq!(out.times[out.t_index], 0.3);
        for b in &out.bundles {
            assert_eq!(b[0][0], 0.0);
            assert!((b[0].last().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn accepted_bundles_are_ordered() {
        let cfg = BrownianConfig::distinct(&[-1.0, 1.0], &[-1.0, 1.0], 0.5, false).unwrap();
        let out = sample_paths(&cfg, 64, 200, 3).unwrap();
        assert!(out.acceptance_rate > 0.0 && out.acceptance_rate < 1.0);
        for b in &out.bundles {
            for i in 0..out.times.len() {
                assert!(b[1][i] > b[0][i]);
            }
        }
        assert!(sample_paths(&cfg, 10, 5, 3).is_err());
    }

    #[test]
    fn hopeless_configurations_abort() {
        let cfg = BrownianConfig::distinct(&[0.0, 1e-9, 2e-9, 3e-9], &[0.0, 1e-9, 2e-9, 3e-9], 0.5, false).unwrap();
        assert!(matches!(sample_paths(&cfg, 64, 10, 3), Err(Error::Accuracy { .. })));
    }
}
