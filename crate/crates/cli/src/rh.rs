use std::path::Path;

use mixedmop::rh::{matrix_csv, RhVerification};
use mixedmop::{PairRelation, RhProblem, Side};
use num_complex::Complex64;
use serde::Serialize;

use crate::artifacts::{finish, Artifacts, Check};
use crate::failure::Failure;
use crate::input::{self, Problem, ProblemConfig};
use crate::kernel::{routes, Routes, ROUTE_TOL};
use crate::Context;

const DET_TOL: f64 = 1e-7;
const XY_TOL: f64 = 1e-7;
/// Extrapolated jump residual relative to the size of `Y` (or `X`).
const JUMP_TOL: f64 = 1e-6;
const MIN_ASYMPTOTIC_RATIO: f64 = 1.8;
const RADII: [f64; 3] = [10.0, 20.0, 40.0];
const DEFAULT_POINTS: usize = 10;

#[derive(Serialize)]
struct Results {
    #[serde(flatten)]
    verification: RhVerification,
    /// Point where `y_matrix.csv` and `x_matrix.csv` were evaluated.
    matrix_point: [f64; 2],
    max_kernel_discrepancy: f64,
}

pub fn verify(path: &Path, ctx: &mut Context) -> Result<Artifacts, Failure> {
    let cfg: ProblemConfig = input::load(path, ctx)?;
    let Problem { w1, w2, pair, .. } = cfg.build(PairRelation::RhBalanced)?;
    // the biorthogonal route surfaces degenerate pairs with their normality report
    let Routes { bio, cd } = routes(&w1, &w2, &pair, ctx.precision)?;
    let rh = RhProblem::from_cd_data(cd);
    let basis = *rh.basis();

    let (lo, hi) = input::window(&w1, &w2, 2.5);
    let inset = 0.05 * (hi - lo);
    let grid = input::grid_or(ctx, lo + inset, hi - inset, DEFAULT_POINTS);
    let reals = grid.points();
    // two complex points per real point, alternating half-planes
    let complex: Vec<Complex64> = reals
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            [
                Complex64::new(x, sign * 0.5 * basis.scale),
                Complex64::new(x, -sign * 1.5 * basis.scale),
            ]
        })
        .collect();
    let verification = rh.verify(&complex, &reals, &RADII)?;

    let mut kernel_gap = 0.0f64;
    for (i, &x) in reals.iter().enumerate() {
        for &y in &reals[i + 1..] {
            let d = bio.kernel(x, y);
            let r = rh.kernel(x, y)?;
            kernel_gap = kernel_gap.max((r - d).abs() / (1.0 + d.abs()));
        }
    }

    let max_of = |v: &[mixedmop::rh::PointResidual]| v.iter().map(|r| r.residual).fold(0.0f64, f64::max);
    let jump = verification
        .jump_residuals
        .iter()
        .map(|r| (r.extrapolated / r.scale).max(r.extrapolated_x / r.scale_x))
        .fold(0.0f64, f64::max);
    let checks = [
        Check::below("max_det_residual", max_of(&verification.det_residuals), DET_TOL),
        Check::below("max_x_y_consistency", max_of(&verification.x_y_consistency), XY_TOL),
        Check::below("max_relative_jump_residual", jump, JUMP_TOL),
        Check::at_least("min_asymptotic_ratio", verification.asymptotic_ratios.min_ratio(), MIN_ASYMPTOTIC_RATIO),
        Check::below("max_kernel_discrepancy", kernel_gap, ctx.tol.unwrap_or(ROUTE_TOL)),
    ];

    let z0 = Complex64::new(basis.center, basis.scale);
    let mut artifacts = Artifacts::new();
    artifacts.text("y_matrix.csv", matrix_csv(&rh.eval_y(z0, Side::Off)?.matrix));
    artifacts.text("x_matrix.csv", matrix_csv(&rh.eval_x(z0, Side::Off)?.matrix));
    let results = Results {
        verification,
        matrix_point: [z0.re, z0.im],
        max_kernel_discrepancy: kernel_gap,
    };
    finish(artifacts, "rh_report.json", ctx, Some(grid), None, &checks, &results)
}
