//! Non-intersecting Brownian bridges with prescribed start and end points.
//!
//! Paths start at `a_j` (multiplicity `n_j`) at time 0 and end at `b_k`
//! (multiplicity `m_k`) at time 1. Positions at time `t` form a biorthogonal
//! ensemble whose kernel is the mixed-type projection kernel for
//! `w1_j = P(t, a_j, ·)` and `w2_k = P(1 - t, b_k, ·)`.

mod config;
mod density;
mod paths;
mod sampling;

pub use config::{config_to_weights, BrownianConfig};
pub use density::{MAX_QUADRATURE_PATHS, correlation_kernel, r_m, CorrelationFunctions, KarlinMcGregorDensity, ZEstimate};
pub use paths::{sample_paths, PathBundles, MIN_TIME_STEPS};
pub use sampling::{
    batch_means, chi_square_r1, sample_positions, ChiSquareReport, SampleSet, SamplerOptions,
};
