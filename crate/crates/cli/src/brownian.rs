use std::fmt::Write as _;
use std::path::Path;

use mixedmop::brownian::{
    chi_square_r1, config_to_weights, correlation_kernel, sample_paths, sample_positions, BrownianConfig,
    ChiSquareReport, CorrelationFunctions, KarlinMcGregorDensity, SamplerOptions, ZEstimate,
    MAX_QUADRATURE_PATHS,
};
use mixedmop::quadrature::integrate_adaptive;
use mixedmop::{DoubleDouble, Precision};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{csv, finish, num, Artifacts, Check};
use crate::failure::Failure;
use crate::input::{self, GridSpec};
use crate::kernel::{kernel_table, routes, DEFAULT_COUNT, ROUTE_TOL};
use crate::{Context, SampleArgs};

const R1_MASS_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-6;
const Z_TOL: f64 = 1e-8;
const IDENTITY_POINTS: usize = 200;
/// Window half-width beyond the extreme endpoints, in bridge standard deviations.
const WINDOW_SDS: f64 = 5.0;
const MAX_BINS: usize = 40;
/// Expected count per bin when fewer than `MAX_BINS` bins are affordable.
const PER_BIN: usize = 50;

fn load(path: &Path, ctx: &mut Context) -> Result<BrownianConfig, Failure> {
    let cfg: BrownianConfig = input::load(path, ctx)?;
    cfg.validate()?;
    Ok(cfg)
}

fn window(cfg: &BrownianConfig) -> (f64, f64) {
    let pts: Vec<f64> = cfg.start_points().into_iter().chain(cfg.end_points()).collect();
    let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = WINDOW_SDS * cfg.bridge_sd();
    (lo - pad, hi + pad)
}

fn correlations(cfg: &BrownianConfig, precision: Precision) -> Result<CorrelationFunctions, Failure> {
    Ok(match precision {
        Precision::Double => correlation_kernel::<f64>(cfg)?,
        Precision::Extended => correlation_kernel::<DoubleDouble>(cfg)?,
    })
}

fn density_csv(cf: &CorrelationFunctions, grid: &GridSpec) -> String {
    csv("x,r1", grid.points().into_iter().map(|x| vec![x, cf.r1(x)]))
}

pub fn kernel(path: &Path, ctx: &mut Context) -> Result<Artifacts, Failure> {
    let cfg = load(path, ctx)?;
    let (w1, w2, pair) = config_to_weights(&cfg)?;
    let routes = routes(&w1, &w2, &pair, ctx.precision)?;
    let (lo, hi) = window(&cfg);
    let grid = input::grid_or(ctx, lo, hi, DEFAULT_COUNT);
    let (table, summary, checks) = kernel_table(&routes, &grid, ctx.tol.unwrap_or(ROUTE_TOL));
    let r1 = csv(
        "x,r1",
        grid.points().into_iter().map(|x| vec![x, routes.bio.kernel(x, x)]),
    );
    let mut artifacts = Artifacts::new();
    artifacts.text("kernel_grid.csv", table);
    artifacts.text("density_grid.csv", r1);
    finish(artifacts, "kernel_report.json", ctx, Some(grid), None, &checks, &summary)
}

#[derive(Serialize)]
struct DensityResults {
    n: usize,
    r1_mass: f64,
    r1_mass_quadrature_error: f64,
    /// Absent for more than four paths, where `Z_n` is not computed.
    z: Option<ZEstimate>,
    max_identity_gap: Option<f64>,
    identity_points: usize,
}

pub fn density(path: &Path, ctx: &mut Context) -> Result<Artifacts, Failure> {
    let cfg = load(path, ctx)?;
    let cf = correlations(&cfg, ctx.precision)?;
    let (lo, hi) = window(&cfg);
    let grid = input::grid_or(ctx, lo, hi, DEFAULT_COUNT);
    let n = cfg.n();
    let (slo, shi) = cf.support();
    let mass = integrate_adaptive(|x| cf.r1(x), slo, shi, 32, 0.0, 1e-13, 4000);
    let mut checks = vec![Check::below("r1_mass_error", (mass.value - n as f64).abs(), R1_MASS_TOL)];

    let (mut z, mut gap) = (None, None);
    if n <= MAX_QUADRATURE_PATHS {
        let density = KarlinMcGregorDensity::new(&cfg)?;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let mut worst = 0.0f64;
        for _ in 0..IDENTITY_POINTS {
            let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
            x.sort_by(f64::total_cmp);
            let lhs = fact * density.eval(&x);
            worst = worst.max((lhs - cf.r(&x)).abs() / (1.0 + lhs));
        }
        checks.push(Check::below("z_relative_error", density.z.relative_error(), Z_TOL));
        checks.push(Check::below("max_identity_gap", worst, IDENTITY_TOL));
        z = Some(density.z);
        gap = Some(worst);
    }
    let results = DensityResults {
        n,
        r1_mass: mass.value,
        r1_mass_quadrature_error: mass.error,
        z,
        max_identity_gap: gap,
        identity_points: if gap.is_some() { IDENTITY_POINTS } else { 0 },
    };
    let mut artifacts = Artifacts::new();
    artifacts.text("density_grid.csv", density_csv(&cf, &grid));
    finish(artifacts, "density_report.json", ctx, Some(grid), None, &checks, &results)
}

#[derive(Serialize)]
struct SampleSummary {
    draws: usize,
    options: SamplerOptions,
    acceptance: Vec<f64>,
    proposal_scales: Vec<f64>,
    rhat: f64,
    rhat_warning: bool,
    chi_square: ChiSquareReport,
}

#[derive(Serialize)]
struct PathSummary {
    bundles: usize,
    steps: usize,
    attempts: usize,
    acceptance_rate: f64,
    /// Non-intersection is enforced on the time grid only, which biases the
    /// bundles slightly; the position sampler is the reference.
    grid_bias_note: &'static str,
    chi_square: Option<ChiSquareReport>,
}

#[derive(Serialize)]
struct SampleResults {
    positions: SampleSummary,
    paths: Option<PathSummary>,
}

fn bins_for(count: usize) -> usize {
    (count / PER_BIN).clamp(2, MAX_BINS)
}

pub fn sample(path: &Path, ctx: &mut Context, args: &SampleArgs) -> Result<Artifacts, Failure> {
    let cfg = load(path, ctx)?;
    if args.draws == 0 {
        return Err(Failure::validation("--draws must be positive"));
    }
    let density = KarlinMcGregorDensity::new(&cfg)?;
    let cf = correlations(&cfg, ctx.precision)?;
    let opts = SamplerOptions::default();
    let set = sample_positions(&density, args.draws, ctx.seed, &opts)?;
    let positions = set.positions();
    let chi = chi_square_r1(&cf, &positions, bins_for(positions.len()))?;

    let mut samples = String::from("draw");
    for j in 1..=cfg.n() {
        let _ = write!(samples, ",x_{j}");
    }
    samples.push('\n');
    for (i, d) in set.draws.iter().enumerate() {
        let _ = write!(samples, "{}", i + 1);
        for &x in d {
            let _ = write!(samples, ",{}", num(x));
        }
        samples.push('\n');
    }
    let mut artifacts = Artifacts::new();
    artifacts.text("samples.csv", samples);

    let mut paths = None;
    if args.paths > 0 {
        let bundles = sample_paths(&cfg, args.steps, args.paths, ctx.seed.wrapping_add(1))?;
        let at_t = bundles.positions_at_t();
        let chi = if at_t.len() >= 2 * PER_BIN {
            Some(chi_square_r1(&cf, &at_t, bins_for(at_t.len()))?)
        } else {
            None
        };
        artifacts.text("paths.csv", bundles.to_csv());
        paths = Some(PathSummary {
            bundles: bundles.bundles.len(),
            steps: bundles.times.len() - 1,
            attempts: bundles.attempts,
            acceptance_rate: bundles.acceptance_rate,
            grid_bias_note: "non-intersection is checked on the time grid only",
            chi_square: chi,
        });
    }
    let results = SampleResults {
        positions: SampleSummary {
            draws: set.draws.len(),
            options: set.options,
            acceptance: set.acceptance,
            proposal_scales: set.proposal_scales,
            rhat: set.rhat,
            rhat_warning: set.warning,
            chi_square: chi,
        },
        paths,
    };
    let extra = json!({ "draws": args.draws, "paths": args.paths, "steps": args.steps });
    finish(artifacts, "sample_report.json", ctx, None, Some(&extra), &[], &results)
}
