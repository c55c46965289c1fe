use thiserror::Error;

use crate::mop::{Normalization, NormalityReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which family plays the type-I (degree) role in a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Linear forms in the first family, orthogonal against the second.
    Forward,
    /// Roles of the two families and the two multi-indices interchanged.
    Swapped,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pair {pair} does not admit normalization {normalization}")]
    NotNormalizable {
        pair: String,
        normalization: Normalization,
        report: Box<NormalityReport>,
    },

    #[error("degenerate pair {pair}: F_n meets the annihilator of G_m nontrivially")]
    DegeneratePair {
        pair: String,
        report: Box<NormalityReport>,
    },

    #[error("neighbor form ({orientation:?}, index {index}) failed: {source}")]
    Neighbor {
        orientation: Orientation,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("|x - y| = {gap:e} is inside the diagonal band {threshold:e}; use the direct or diagonal evaluation")]
    DiagonalRegion { gap: f64, threshold: f64 },

    #[error("{context}: achieved accuracy {achieved:e} exceeds requested {requested:e}")]
    Accuracy {
        context: String,
        achieved: f64,
        requested: f64,
    },

    #[error("moment table lacks order {order} for weights ({first}, {second})")]
    MissingMoment {
        first: usize,
        second: usize,
        order: usize,
    },
}

impl Error {
    /// The normality report attached to a numerical degeneracy, if any.
    pub fn report(&self) -> Option<&NormalityReport> {
        match self {
            Error::NotNormalizable { report, .. } | Error::DegeneratePair { report, .. } => {
                Some(report)
            }
            Error::Neighbor { source, .. } => source.report(),
            _ => None,
        }
    }

    /// True for failures caused by the numbers rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidInput(_))
    }

    /// Stable short code for machine-readable reporting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "E_INVALID_INPUT",
            Error::NotNormalizable { .. } => "E_NOT_NORMALIZABLE",
            Error::DegeneratePair { .. } => "E_DEGENERATE_PAIR",
            Error::Neighbor { source, .. } => source.code(),
            Error::DiagonalRegion { .. } => "E_DIAGONAL_REGION",
            Error::Accuracy { .. } => "E_ACCURACY",
            Error::MissingMoment { .. } => "E_MISSING_MOMENT",
        }
    }
}
