use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mop::{MultiIndex, MultiIndexPair};
use crate::weights::{Gaussian, Weight, WeightFamily};

/// Start/end points with multiplicities and the observation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianConfig {
    /// `(a_j, n_j)`, strictly increasing in `a_j`.
    pub starts: Vec<(f64, usize)>,
    /// `(b_k, m_k)`, strictly increasing in `b_k`.
    pub ends: Vec<(f64, usize)>,
    pub t: f64,
    /// Divide the transition variance by the number of paths.
    #[serde(default)]
    pub n_scaling: bool,
}

fn check_points(label: &str, pts: &[(f64, usize)]) -> Result<usize> {
    if pts.is_empty() {
        return Err(Error::InvalidInput(format!("{label} must not be empty")));
    }
    for &(x, mult) in pts {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("{label} point {x} is not finite")));
        }
        if mult == 0 {
            return Err(Error::InvalidInput(format!("{label} multiplicities must be positive")));
        }
    }
    if pts.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::InvalidInput(format!("{label} points must be strictly increasing")));
    }
    Ok(pts.iter().map(|p| p.1).sum())
}

impl BrownianConfig {
    pub fn new(starts: Vec<(f64, usize)>, ends: Vec<(f64, usize)>, t: f64, n_scaling: bool) -> Result<Self> {
        let cfg = BrownianConfig { starts, ends, t, n_scaling };
        cfg.validate()?;
        Ok(cfg)
    }

    /// All points distinct, multiplicity one.
    pub fn distinct(starts: &[f64], ends: &[f64], t: f64, n_scaling: bool) -> Result<Self> {
        Self::new(
            starts.iter().map(|&a| (a, 1)).collect(),
            ends.iter().map(|&b| (b, 1)).collect(),
            t,
            n_scaling,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let n = check_points("starts", &self.starts)?;
        let m = check_points("ends", &self.ends)?;
        if n != m {
            return Err(Error::InvalidInput(format!(
                "start multiplicities sum to {n} but end multiplicities to {m}"
            )));
        }
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(Error::InvalidInput(format!("time t = {} must lie in (0, 1)", self.t)));
        }
        Ok(())
    }

    /// Number of paths.
    pub fn n(&self) -> usize {
        self.starts.iter().map(|p| p.1).sum()
    }

    pub fn is_distinct(&self) -> bool {
        self.starts.iter().chain(&self.ends).all(|p| p.1 == 1)
    }

    /// Divisor applied to the transition variances.
    pub fn variance_scale(&self) -> u32 {
        if self.n_scaling {
            self.n() as u32
        } else {
            1
        }
    }

    /// Start points repeated by multiplicity.
    pub fn start_points(&self) -> Vec<f64> {
        self.starts.iter().flat_map(|&(a, k)| std::iter::repeat_n(a, k)).collect()
    }

    pub fn end_points(&self) -> Vec<f64> {
        self.ends.iter().flat_map(|&(b, k)| std::iter::repeat_n(b, k)).collect()
    }

    /// Standard deviation of a single bridge at time `t`.
    pub fn bridge_sd(&self) -> f64 {
        (self.t * (1.0 - self.t) / f64::from(self.variance_scale())).sqrt()
    }

    pub fn start_gaussians(&self) -> Result<Vec<Gaussian>> {
        let s = self.variance_scale();
        self.starts.iter().map(|&(a, _)| Gaussian::transition(self.t, a, s)).collect()
    }

    pub fn end_gaussians(&self) -> Result<Vec<Gaussian>> {
        let s = self.variance_scale();
        self.ends.iter().map(|&(b, _)| Gaussian::transition(1.0 - self.t, b, s)).collect()
    }
}

/// The two weight families and the balanced pair `(n, m)` of multiplicities.
pub fn config_to_weights(cfg: &BrownianConfig) -> Result<(WeightFamily, WeightFamily, MultiIndexPair)> {
    cfg.validate()?;
    let family = |gs: Vec<Gaussian>| WeightFamily::new(gs.into_iter().map(Weight::Gaussian).collect());
    let w1 = family(cfg.start_gaussians()?)?;
    let w2 = family(cfg.end_gaussians()?)?;
    let n = MultiIndex::new(cfg.starts.iter().map(|p| p.1).collect())?;
    let m = MultiIndex::new(cfg.ends.iter().map(|p| p.1).collect())?;
    Ok((w1, w2, MultiIndexPair::rh_balanced(n, m)?))
}
