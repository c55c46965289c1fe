use std::path::Path;

use mixedmop::{
    MultiIndexPair, Normalization, PairRelation, WeightFamily, WeightSpec, WeightsConfig,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;
use crate::Context;

pub const MIN_GRID: usize = 2;
pub const MAX_GRID: usize = 2000;

/// `min:max:count` evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self, String> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(format!("grid bounds must be finite with min < max, got {min}:{max}"));
        }
        if !(MIN_GRID..=MAX_GRID).contains(&count) {
            return Err(format!("grid count must lie in [{MIN_GRID}, {MAX_GRID}], got {count}"));
        }
        Ok(GridSpec { min, max, count })
    }

    pub fn points(&self) -> Vec<f64> {
        mixedmop::linspace(self.min, self.max, self.count)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, count] = parts.as_slice() else {
        return Err(format!("expected min:max:count, got {s:?}"));
    };
    let min: f64 = min.trim().parse().map_err(|_| format!("bad grid minimum {min:?}"))?;
    let max: f64 = max.trim().parse().map_err(|_| format!("bad grid maximum {max:?}"))?;
    let count: usize = count.trim().parse().map_err(|_| format!("bad grid count {count:?}"))?;
    GridSpec::new(min, max, count)
}

pub fn parse_tol(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

/// Reads and parses a JSON configuration and records it in the context.
pub fn load<T: DeserializeOwned + Serialize>(path: &Path, ctx: &mut Context) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("reading {}: {e}", path.display())))?;
    let parsed: T = serde_json::from_str(&text)
        .map_err(|e| Failure::validation(format!("parsing {}: {e}", path.display())))?;
    ctx.config = Some(serde_json::to_value(&parsed).map_err(|e| Failure::internal(e.to_string()))?);
    Ok(parsed)
}

/// `{"kind": "type_i" | "type_ii", "k": 1-based index}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationSpec {
    pub kind: NormalizationKind,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizationKind {
    #[serde(rename = "type_i")]
    TypeI,
    #[serde(rename = "type_ii")]
    TypeII,
}

impl NormalizationSpec {
    pub fn resolve(&self) -> Result<Normalization, Failure> {
        let k = self
            .k
            .checked_sub(1)
            .ok_or_else(|| Failure::validation("normalization index k is 1-based"))?;
        Ok(match self.kind {
            NormalizationKind::TypeI => Normalization::TypeI(k),
            NormalizationKind::TypeII => Normalization::TypeII(k),
        })
    }
}

/// Weights plus a multi-index pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub w1: Vec<WeightSpec>,
    pub w2: Vec<WeightSpec>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationSpec>,
}

pub struct Problem {
    pub w1: WeightFamily,
    pub w2: WeightFamily,
    pub pair: MultiIndexPair,
    pub normalization: Option<Normalization>,
}

impl ProblemConfig {
    /// Builds the families and the pair, requiring the given relation.
    pub fn build(&self, relation: PairRelation) -> Result<Problem, Failure> {
        let (w1, w2) = WeightsConfig {
            w1: self.w1.clone(),
            w2: self.w2.clone(),
        }
        .families()?;
        let pair = MultiIndexPair::from_parts(&self.n, &self.m)?;
        if pair.relation != relation {
            let need = match relation {
                PairRelation::MopDefining => "|n| = |m| + 1",
                _ => "|n| = |m|",
            };
            return Err(Failure::validation(format!("pair {pair} must satisfy {need}")));
        }
        if pair.p() != w1.len() || pair.q() != w2.len() {
            return Err(Failure::validation(format!(
                "pair {pair} needs {} first-family and {} second-family weights, got {} and {}",
                pair.p(),
                pair.q(),
                w1.len(),
                w2.len()
            )));
        }
        let normalization = self.normalization.map(|n| n.resolve()).transpose()?;
        Ok(Problem {
            w1,
            w2,
            pair,
            normalization,
        })
    }
}

/// Default window: the union of both families' effective intervals.
pub fn window(w1: &WeightFamily, w2: &WeightFamily, sds: f64) -> (f64, f64) {
    let (a, b) = w1.effective_interval(sds);
    let (c, d) = w2.effective_interval(sds);
    (a.min(c), b.max(d))
}

pub fn grid_or(ctx: &Context, lo: f64, hi: f64, count: usize) -> GridSpec {
    ctx.grid.unwrap_or(GridSpec { min: lo, max: hi, count })
}
