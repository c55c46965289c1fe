//! Metropolis sampling from the Karlin-McGregor density.
//!
//! Chain `c` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `c`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::density::{CorrelationFunctions, KarlinMcGregorDensity};
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerOptions {
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: usize,
    pub target_acceptance: (f64, f64),
    /// R-hat above this sets the warning flag.
    pub rhat_threshold: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            burn_in: 10_000,
            thinning: 10,
            chains: 4,
            target_acceptance: (0.23, 0.40),
            rhat_threshold: 1.05,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    /// One position vector per draw, coordinates in random order.
    pub draws: Vec<Vec<f64>>,
    pub seed: u64,
    pub options: SamplerOptions,
    pub acceptance: Vec<f64>,
    pub proposal_scales: Vec<f64>,
    /// Largest split-chain potential scale reduction over the monitored statistics.
    pub rhat: f64,
    pub warning: bool,
}

impl SampleSet {
    /// Every coordinate of every draw.
    pub fn positions(&self) -> Vec<f64> {
        self.draws.iter().flatten().copied().collect()
    }
}

const ADAPT_WINDOW: usize = 100;

struct Chain {
    draws: Vec<Vec<f64>>,
    acceptance: f64,
    scale: f64,
}

fn run_chain(density: &KarlinMcGregorDensity, count: usize, seed: u64, stream: u64, opts: &SamplerOptions) -> Chain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = density.n();
    let cfg = &density.config;
    let ends = cfg.end_points();
    let mut x: Vec<f64> = cfg
        .start_points()
        .iter()
        .zip(&ends)
        .map(|(a, b)| (1.0 - cfg.t) * a + cfg.t * b)
        .collect();
    x.sort_by(f64::total_cmp);
    // Overlapping means would start on the zero set.
    for k in 1..n {
        if x[k] <= x[k - 1] {
            x[k] = x[k - 1] + 0.1 * cfg.bridge_sd();
        }
    }
    let mut logp = density.log_eval(&x);
    let mut scale = cfg.bridge_sd();
    let mut proposal = vec![0.0; n];
    let mut step = |x: &mut Vec<f64>, logp: &mut f64, scale: f64, rng: &mut ChaCha8Rng| -> bool {
        for (p, xi) in proposal.iter_mut().zip(x.iter()) {
            let z: f64 = rng.sample(StandardNormal);
            *p = xi + scale * z;
        }
        let lp = density.log_eval(&proposal);
        let accept = lp > f64::NEG_INFINITY && rng.random::<f64>().ln() < lp - *logp;
        if accept {
            x.copy_from_slice(&proposal);
            *logp = lp;
        }
        accept
    };
    let (lo, hi) = opts.target_acceptance;
    let mut window = 0;
    for i in 0..opts.burn_in {
        window += usize::from(step(&mut x, &mut logp, scale, &mut rng));
        if (i + 1) % ADAPT_WINDOW == 0 {
            let rate = window as f64 / ADAPT_WINDOW as f64;
            if rate < lo {
                scale *= 0.8;
            } else if rate > hi {
                scale *= 1.25;
            }
            window = 0;
        }
    }
    let mut accepted = 0usize;
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..opts.thinning {
            accepted += usize::from(step(&mut x, &mut logp, scale, &mut rng));
        }
        let mut d = x.clone();
        d.shuffle(&mut rng);
        draws.push(d);
    }
    Chain {
        draws,
        acceptance: accepted as f64 / (count * opts.thinning).max(1) as f64,
        scale,
    }
}

/// Split-chain `R-hat` of one scalar statistic.
fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[h..2 * h]]
        })
        .filter(|h| h.len() > 1)
        .collect();
    if halves.len() < 2 {
        return f64::NAN;
    }
    let len = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|h| h.iter().sum::<f64>() / h.len() as f64).collect();
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let between = len / (means.len() as f64 - 1.0) * means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let within = halves
        .iter()
        .zip(&means)
        .map(|(h, m)| h.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (h.len() as f64 - 1.0))
        .sum::<f64>()
        / halves.len() as f64;
    let var = (len - 1.0) / len * within + between / len;
    (var / within).sqrt()
}

/// Draws `count` position vectors with `opts.chains` independent chains.
pub fn sample_positions(
    density: &KarlinMcGregorDensity,
    count: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<SampleSet> {
    if density.n() > super::density::MAX_QUADRATURE_PATHS {
        return Err(Error::InvalidInput("position sampling supports at most 4 paths".into()));
    }
    if opts.chains == 0 || opts.thinning == 0 {
        return Err(Error::InvalidInput("sampler needs at least one chain and thinning ≥ 1".into()));
    }
    let per = count / opts.chains;
    let extra = count % opts.chains;
    let chains: Vec<Chain> = (0..opts.chains)
        .into_par_iter()
        .map(|c| run_chain(density, per + usize::from(c < extra), seed, c as u64, opts))
        .collect();
    let n = density.n();
    let mut rhat = 0.0f64;
    // order statistics and the centroid
    let stats: Vec<Box<dyn Fn(&[f64]) -> f64>> = (0..n)
        .map(|k| {
            Box::new(move |d: &[f64]| {
                let mut s = d.to_vec();
                s.sort_by(f64::total_cmp);
                s[k]
            }) as Box<dyn Fn(&[f64]) -> f64>
        })
        .chain(std::iter::once(Box::new(|d: &[f64]| d.iter().sum::<f64>() / d.len() as f64) as Box<dyn Fn(&[f64]) -> f64>))
        .collect();
    for stat in &stats {
        let series: Vec<Vec<f64>> = chains.iter().map(|c| c.draws.iter().map(|d| stat(d)).collect()).collect();
        let r = split_rhat(&series);
        if r.is_finite() {
            rhat = rhat.max(r);
        }
    }
    Ok(SampleSet {
        acceptance: chains.iter().map(|c| c.acceptance).collect(),
        proposal_scales: chains.iter().map(|c| c.scale).collect(),
        draws: chains.into_iter().flat_map(|c| c.draws).collect(),
        seed,
        options: *opts,
        rhat,
        warning: !(rhat <= opts.rhat_threshold),
    })
}

/// Mean and batch-means standard error.
pub fn batch_means(values: &[f64], batches: usize) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let size = n / batches.max(2);
    if size == 0 {
        return (mean, f64::NAN);
    }
    let bm: Vec<f64> = values
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let k = bm.len() as f64;
    let bmean = bm.iter().sum::<f64>() / k;
    let var = bm.iter().map(|b| (b - bmean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Interior bin edges; the outer bins extend to infinity.
    pub edges: Vec<f64>,
    pub observed: Vec<usize>,
    pub expected: Vec<f64>,
}

/// Pearson test of pooled positions against the density `r1 / n`, with
/// `bins` nearly equiprobable bins.
pub fn chi_square_r1(cf: &CorrelationFunctions, positions: &[f64], bins: usize) -> Result<ChiSquareReport> {
    if bins < 2 || positions.is_empty() {
        return Err(Error::InvalidInput("chi-square test needs two bins and some samples".into()));
    }
    let n = cf.n() as f64;
    let (lo, hi) = cf.support();
    let density = |x: f64| cf.r1(x) / n;
    // cumulative distribution on a fine grid, then interpolated edges
    let cells = 4000;
    let h = (hi - lo) / cells as f64;
    let mut cdf = vec![0.0; cells + 1];
    for i in 0..cells {
        let a = lo + i as f64 * h;
        cdf[i + 1] = cdf[i] + integrate_adaptive(density, a, a + h, 1, 1e-16, 1e-12, 50).value;
    }
    let total = cdf[cells];
    let mut edges = Vec::with_capacity(bins - 1);
    let mut cell = 0;
    for b in 1..bins {
        let target = total * b as f64 / bins as f64;
        while cdf[cell + 1] < target {
            cell += 1;
        }
        let frac = (target - cdf[cell]) / (cdf[cell + 1] - cdf[cell]);
        edges.push(lo + (cell as f64 + frac) * h);
    }
    let mut probs = Vec::with_capacity(bins);
    let bounds: Vec<f64> = std::iter::once(lo).chain(edges.iter().copied()).chain(std::iter::once(hi)).collect();
    for w in bounds.windows(2) {
        probs.push(integrate_adaptive(density, w[0], w[1], 4, 1e-16, 1e-13, 2000).value);
    }
    let mass: f64 = probs.iter().sum();
    let mut observed = vec![0usize; bins];
    for &x in positions {
        observed[edges.partition_point(|&e| e <= x)] += 1;
    }
    let count = positions.len() as f64;
    let expected: Vec<f64> = probs.iter().map(|p| p / mass * count).collect();
    let statistic = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum::<f64>();
    let df = bins - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(ChiSquareReport {
        statistic,
        degrees_of_freedom: df,
        p_value: dist.sf(statistic),
        edges,
        observed,
        expected,
    })
}
