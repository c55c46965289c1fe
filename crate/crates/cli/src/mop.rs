use std::path::Path;

use mixedmop::quadrature::integrate_adaptive;
use mixedmop::{
    check_normality, solve_mixed, DoubleDouble, Error, MixedMopSolution, MomentSystem, Normalization,
    NormalityReport, PairRelation, Precision, Real, WeightFamily,
};
use serde::Serialize;

use crate::artifacts::{finish, Artifacts, Check};
use crate::failure::Failure;
use crate::input::{self, Problem, ProblemConfig};
use crate::Context;

/// Default bound on the scale-normalized backward error of each solve.
const RESIDUAL_TOL: f64 = 1e-10;
/// Bound on each orthogonality integral recomputed by quadrature.
const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Serialize)]
struct Solved {
    #[serde(flatten)]
    export: mixedmop::mop::SolutionExport,
    /// `∫ Q u^i w2_k / ∫ |Q u^i w2_k|` for every orthogonality condition, by quadrature.
    orthogonality: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Results {
    normality: NormalityReport,
    solutions: Vec<Solved>,
}

pub fn solve(path: &Path, ctx: &mut Context) -> Result<Artifacts, Failure> {
    let cfg: ProblemConfig = input::load(path, ctx)?;
    let problem = cfg.build(PairRelation::MopDefining)?;
    match ctx.precision {
        Precision::Double => run::<f64>(&problem, ctx),
        Precision::Extended => run::<DoubleDouble>(&problem, ctx),
    }
}

fn run<T: Real>(pb: &Problem, ctx: &Context) -> Result<Artifacts, Failure> {
    let sys = MomentSystem::<T>::for_pair(pb.w1.clone(), pb.w2.clone(), &pb.pair)?;
    let report = check_normality(&pb.pair, &sys);
    if !report.is_normal() {
        return Err(Error::DegeneratePair {
            pair: pb.pair.to_string(),
            report: Box::new(report),
        }
        .into());
    }
    let normalizations: Vec<Normalization> = match pb.normalization {
        Some(n) => vec![n],
        None => {
            let type_ii = (0..pb.pair.p())
                .filter(|&j| report.type_ii_admissible[j])
                .map(Normalization::TypeII);
            let type_i = (0..pb.pair.q())
                .filter(|&k| report.type_i_admissible[k])
                .map(Normalization::TypeI);
            type_ii.chain(type_i).collect()
        }
    };
    if normalizations.is_empty() {
        return Err(Error::NotNormalizable {
            pair: pb.pair.to_string(),
            normalization: Normalization::TypeII(0),
            report: Box::new(report),
        }
        .into());
    }

    let mut solutions = Vec::new();
    let (mut residual, mut orth) = (0.0f64, 0.0f64);
    for &norm in &normalizations {
        let sol = solve_mixed(&pb.pair, &sys, norm)?;
        let defects = orthogonality_defects(&sol, &pb.w1, &pb.w2);
        residual = residual.max(sol.residual);
        orth = defects.iter().flatten().fold(orth, |acc, d| acc.max(d.abs()));
        solutions.push(Solved {
            export: sol.export(),
            orthogonality: defects,
        });
    }
    let checks = [
        Check::below("max_residual", residual, ctx.tol.unwrap_or(RESIDUAL_TOL)),
        Check::below("max_orthogonality_defect", orth, ORTHOGONALITY_TOL),
    ];
    let mut artifacts = Artifacts::new();
    artifacts.text("moments.csv", sys.table().to_csv());
    let results = Results {
        normality: report,
        solutions,
    };
    finish(artifacts, "mop_solution.json", ctx, None, None, &checks, &results)
}

/// Orthogonality integrals of a solved form, independent of the moment table.
fn orthogonality_defects(sol: &MixedMopSolution, w1: &WeightFamily, w2: &WeightFamily) -> Vec<Vec<f64>> {
    let (lo, hi) = input::window(w1, w2, 12.0);
    let m = sol.pair.m.parts();
    (0..m.len())
        .map(|k| {
            let w = w2.get(k);
            (0..m[k])
                .map(|i| {
                    let f = |x: f64| sol.form(x) * sol.basis.to_local(x).powi(i as i32) * w.eval(x);
                    let r = integrate_adaptive(f, lo, hi, 32, 0.0, 1e-14, 4000);
                    if r.magnitude > 0.0 {
                        r.value / r.magnitude
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}
