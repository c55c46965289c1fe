use std::path::Path;

use mixedmop::{
    build_biorthogonal, build_cd_data, linspace, BiorthogonalSystem, CdKernelData, DoubleDouble,
    MomentSystem, MultiIndexPair, PairRelation, Precision, Real, WeightFamily,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{csv, finish, Artifacts, Check};
use crate::failure::Failure;
use crate::input::{self, GridSpec, Problem, ProblemConfig};
use crate::Context;

/// Default relative tolerance for route agreement, `|a - b| / (1 + |K_direct|)`.
pub const ROUTE_TOL: f64 = 1e-7;
pub const TRACE_TOL: f64 = 1e-8;
pub const IDEMPOTENCE_TOL: f64 = 1e-6;
/// Grid points per axis used for the idempotence quadrature.
const IDEMPOTENCE_POINTS: usize = 30;
pub const DEFAULT_COUNT: usize = 101;

/// Both kernel routes for one problem.
pub struct Routes {
    pub bio: BiorthogonalSystem,
    pub cd: CdKernelData,
}

pub fn build_routes<T: Real>(w1: &WeightFamily, w2: &WeightFamily, pair: &MultiIndexPair) -> Result<Routes, Failure> {
    let sys = MomentSystem::<T>::for_pair(w1.clone(), w2.clone(), pair)?;
    let bio = build_biorthogonal(pair, &sys)?;
    let cd = build_cd_data(pair, &sys)?;
    Ok(Routes { bio, cd })
}

pub fn routes(w1: &WeightFamily, w2: &WeightFamily, pair: &MultiIndexPair, precision: Precision) -> Result<Routes, Failure> {
    match precision {
        Precision::Double => build_routes::<f64>(w1, w2, pair),
        Precision::Extended => build_routes::<DoubleDouble>(w1, w2, pair),
    }
}

fn rel(a: f64, b: f64, reference: f64) -> f64 {
    (a - b).abs() / (1.0 + reference.abs())
}

#[derive(Debug, Serialize)]
pub struct KernelSummary {
    pub dimension: usize,
    pub gram_condition: f64,
    pub biorthogonality_defect: f64,
    pub trace: f64,
    pub trace_quadrature_error: f64,
    pub trace_error: f64,
    pub idempotence_residual: f64,
    pub idempotence_quadrature_spread: f64,
    pub max_abs_diff: f64,
    pub max_route_discrepancy: f64,
    pub cd_solves: usize,
    pub cd_max_residual: f64,
}

/// The `(x, y, K_direct, K_cd, abs_diff)` grid with projection-law checks.
pub fn kernel_table(routes: &Routes, grid: &GridSpec, tol: f64) -> (String, KernelSummary, Vec<Check>) {
    let xs = grid.points();
    let direct = routes.bio.kernel_grid(&xs, &xs);
    let cd: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| xs.iter().map(|&y| routes.cd.kernel_any(x, y)).collect())
        .collect();
    let mut rows = Vec::with_capacity(xs.len() * xs.len());
    let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            let (d, c) = (direct[i][j], cd[i][j]);
            max_abs = max_abs.max((d - c).abs());
            max_rel = max_rel.max(rel(c, d, d));
            rows.push(vec![x, y, d, c, (d - c).abs()]);
        }
    }
    let trace = routes.bio.trace();
    let size = routes.bio.dim() as f64;
    let sub = linspace(grid.min, grid.max, grid.count.min(IDEMPOTENCE_POINTS));
    let (idem, spread) = routes.bio.idempotence_residual(&sub, &sub);
    let summary = KernelSummary {
        dimension: routes.bio.dim(),
        gram_condition: routes.bio.condition,
        biorthogonality_defect: routes.bio.biorthogonality_defect(),
        trace: trace.value,
        trace_quadrature_error: trace.error,
        trace_error: (trace.value - size).abs(),
        idempotence_residual: idem,
        idempotence_quadrature_spread: spread,
        max_abs_diff: max_abs,
        max_route_discrepancy: max_rel,
        cd_solves: routes.cd.solve_count(),
        cd_max_residual: routes.cd.max_residual(),
    };
    let checks = vec![
        Check::below("max_route_discrepancy", max_rel, tol),
        Check::below("trace_error", summary.trace_error, TRACE_TOL),
        Check::below("idempotence_residual", idem, IDEMPOTENCE_TOL),
    ];
    (csv("x,y,K_direct,K_cd,abs_diff", rows), summary, checks)
}

pub fn grid(path: &Path, ctx: &mut Context) -> Result<Artifacts, Failure> {
    let cfg: ProblemConfig = input::load(path, ctx)?;
    let Problem { w1, w2, pair, .. } = cfg.build(PairRelation::RhBalanced)?;
    let routes = routes(&w1, &w2, &pair, ctx.precision)?;
    let (lo, hi) = input::window(&w1, &w2, 3.0);
    let grid = input::grid_or(ctx, lo, hi, DEFAULT_COUNT);
    let (table, summary, checks) = kernel_table(&routes, &grid, ctx.tol.unwrap_or(ROUTE_TOL));
    let mut artifacts = Artifacts::new();
    artifacts.text("kernel_grid.csv", table);
    finish(artifacts, "kernel_report.json", ctx, Some(grid), None, &checks, &summary)
}

#[derive(Serialize)]
struct CdResults {
    pair: MultiIndexPair,
    /// Offset of the `y` grid from the `x` grid, half a step.
    y_offset: f64,
    max_offdiagonal_discrepancy: f64,
    max_diagonal_discrepancy: f64,
    diagonal_threshold: f64,
    max_solve_residual: f64,
    neighbors: Neighbors,
}

#[derive(Serialize)]
struct Neighbors {
    type2_forward: Vec<mixedmop::mop::SolutionExport>,
    type1_swapped: Vec<mixedmop::mop::SolutionExport>,
    type1_forward: Vec<mixedmop::mop::SolutionExport>,
    type2_swapped: Vec<mixedmop::mop::SolutionExport>,
}

pub fn cd_check(path: &Path, ctx: &mut Context) -> Result<Artifacts, Failure> {
    let cfg: ProblemConfig = input::load(path, ctx)?;
    let Problem { w1, w2, pair, .. } = cfg.build(PairRelation::RhBalanced)?;
    let Routes { bio, cd } = routes(&w1, &w2, &pair, ctx.precision)?;
    let (lo, hi) = input::window(&w1, &w2, 2.5);
    let grid = input::grid_or(ctx, lo, hi, 30);
    let xs = grid.points();
    let y_offset = 0.5 * grid.step();
    let ys: Vec<f64> = xs.iter().map(|x| x + y_offset).collect();
    let direct = bio.kernel_grid(&xs, &ys);
    let off = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            ys.iter().enumerate().try_fold(0.0f64, |acc, (j, &y)| {
                let d = direct[i][j];
                Ok::<_, mixedmop::Error>(acc.max(rel(cd.kernel(x, y)?, d, d)))
            })
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let diag = xs
        .iter()
        .map(|&x| {
            let d = bio.kernel(x, x);
            rel(cd.kernel_diagonal(x), d, d)
        })
        .fold(0.0f64, f64::max);
    let tol = ctx.tol.unwrap_or(ROUTE_TOL);
    let export = |v: &[mixedmop::MixedMopSolution]| v.iter().map(|s| s.export()).collect();
    let results = CdResults {
        pair,
        y_offset,
        max_offdiagonal_discrepancy: off,
        max_diagonal_discrepancy: diag,
        diagonal_threshold: cd.diagonal_threshold(),
        max_solve_residual: cd.max_residual(),
        neighbors: Neighbors {
            type2_forward: export(&cd.type2_forward),
            type1_swapped: export(&cd.type1_swapped),
            type1_forward: export(&cd.type1_forward),
            type2_swapped: export(&cd.type2_swapped),
        },
    };
    let checks = [
        Check::below("max_offdiagonal_discrepancy", off, tol),
        Check::below("max_diagonal_discrepancy", diag, tol),
        Check::below("max_solve_residual", results.max_solve_residual, 1e-10),
    ];
    finish(Artifacts::new(), "cd_report.json", ctx, Some(grid), None, &checks, &results)
}
