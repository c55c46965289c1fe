//! Scalar abstraction shared by the moment tables and the dense solvers.
//!
//! Double precision (`f64`) is the default. [`DoubleDouble`] provides an
//! extended mode for large multi-indices where the moment matrices
//! lose too many digits in plain `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::{Deserialize, Serialize};

pub use crate::dd::DoubleDouble;

/// Floating point type usable by the moment and linear-algebra layers.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative singular-value threshold used by numerical rank tests.
    const RANK_TOLERANCE: f64;

    /// Which precision mode this scalar implements.
    const PRECISION: Precision;

    fn lift(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts")
    }

    fn lower(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Dot product used for residuals. Implementations may compensate.
    fn dot(a: &[Self], b: &[Self]) -> Self {
        a.iter()
            .zip(b)
            .fold(Self::zero(), |acc, (&x, &y)| acc + x * y)
    }
}

impl Real for f64 {
    const RANK_TOLERANCE: f64 = 1e-10;
    const PRECISION: Precision = Precision::Double;

    /// Compensated dot product (Ogita, Rump and Oishi `Dot2`).
    fn dot(a: &[f64], b: &[f64]) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            let prod = x * y;
            let prod_err = x.mul_add(y, -prod);
            let t = sum + prod;
            let z = t - sum;
            let sum_err = (sum - (t - z)) + (prod - z);
            sum = t;
            comp += sum_err + prod_err;
        }
        sum + comp
    }
}

impl Real for DoubleDouble {
    const RANK_TOLERANCE: f64 = 1e-25;
    const PRECISION: Precision = Precision::Extended;
}

/// Arithmetic precision selected for moment tables and solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!("unknown precision `{other}` (expected double or extended)")),
        }
    }
}

impl Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precision::Double => f.write_str("double"),
            Precision::Extended => f.write_str("extended"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn compensated_dot_recovers_cancelled_terms() {
        let a = [1e16, 1.0, -1e16];
        let b = [1.0, 1.0, 1.0];
        assert_eq!(<f64 as Real>::dot(&a, &b), 1.0);
    }

    #[test]
    fn extended_roundtrip() {
        let x = DoubleDouble::lift(0.1);
        assert_eq!(x.lower(), 0.1);
        let third = DoubleDouble::one() / DoubleDouble::lift(3.0);
        let err = (third * DoubleDouble::lift(3.0) - DoubleDouble::one()).abs();
        assert!(err.lower() < 1e-30, "{err:?}");
    }

    #[test]
    fn precision_parses() {
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::Extended);
        assert!("quad".parse::<Precision>().is_err());
    }
}
