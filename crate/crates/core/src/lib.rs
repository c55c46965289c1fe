//! Multiple orthogonal polynomials of mixed type and their kernels.
//!
//! The crate builds product-moment tables for two families of weights,
//! solves for mixed-type forms, evaluates the associated projection kernel
//! by three routes (biorthogonal bases, Christoffel-Darboux sums, and the
//! explicit Riemann-Hilbert matrix), and applies it to non-intersecting
//! Brownian motions.

pub mod brownian;
pub mod dd;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod mop;
pub mod quadrature;
pub mod real;
pub mod rh;
pub mod weights;

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Orientation, Result};
pub use kernel::{
    build_biorthogonal, build_biorthogonal_with_bases, build_cd_data, kernel_cd,
    kernel_cd_diagonal, kernel_direct, linspace, BiorthogonalSystem, CdKernelData,
    KernelEvaluation, Route,
};
pub use mop::{
    assemble_orthogonality_matrix, check_normality, solve_mixed, solve_type1_classical,
    solve_type2_classical, MixedMopSolution, MomentSystem, MultiIndex, MultiIndexPair,
    Normalization, NormalityReport, PairConfig, PairRelation,
};
pub use real::{Precision, Real, DoubleDouble};
pub use rh::{kernel_rh, JumpMatrix, RhEvaluation, RhProblem, Side};
pub use weights::{
    build_moment_table, eval_weight, gaussian_transition, product_moment, Basis, Gaussian,
    ProductMomentTable, Tabulated, Weight, WeightFamily, WeightSpec, WeightsConfig,
};
