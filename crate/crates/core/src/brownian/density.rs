use rayon::prelude::*;
use serde::Serialize;

use super::config::{config_to_weights, BrownianConfig};
use crate::error::{Error, Result};
use crate::kernel::{build_biorthogonal, BiorthogonalSystem};
use crate::linalg::{FullPivLu, Matrix};
use crate::mop::MomentSystem;
use crate::quadrature::QuadratureRule;
use crate::real::Real;
use crate::weights::{product_moment, Gaussian, Weight};

/// Largest path count for which `Z_n` is computed by tensor quadrature.
pub const MAX_QUADRATURE_PATHS: usize = 4;

/// Box half-width beyond the outermost points, in bridge standard deviations.
const BOX_SDS: f64 = 8.0;
const PANEL_ORDER: usize = 8;
/// Coarse panels per bridge standard deviation of the box, before clamping.
const PANELS_PER_SD: f64 = 0.5;
const MIN_PANELS: usize = 8;
const MAX_PANELS: usize = 32;
const Z_REL_TOL: f64 = 1e-8;

/// `Z_n` with its certification data.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZEstimate {
    /// Fine-rule value.
    pub value: f64,
    /// `|fine - coarse|`, a bound on the coarse-rule error.
    pub error: f64,
    pub coarse_nodes: usize,
    pub fine_nodes: usize,
    /// `n! det(∫ w1_j w2_k)`, the same integral through Andreief's identity.
    pub andreief: f64,
}

impl ZEstimate {
    pub fn relative_error(&self) -> f64 {
        self.error / self.value.abs()
    }

    pub fn andreief_discrepancy(&self) -> f64 {
        (self.value - self.andreief).abs() / self.andreief.abs()
    }
}

/// Determinant by partial pivoting; `a` is row-major `n×n` and is destroyed.
fn small_det(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let mut piv = c;
        for r in c + 1..n {
            if a[r * n + c].abs() > a[piv * n + c].abs() {
                piv = r;
            }
        }
        let pv = a[piv * n + c];
        if pv == 0.0 {
            return 0.0;
        }
        if piv != c {
            for k in 0..n {
                a.swap(c * n + k, piv * n + k);
            }
            det = -det;
        }
        det *= pv;
        for r in c + 1..n {
            let f = a[r * n + c] / pv;
            if f != 0.0 {
                for k in c + 1..n {
                    a[r * n + k] -= f * a[c * n + k];
                }
            }
        }
    }
    det
}

/// `ln |det(g_j(x_k))|` and its sign, with each column scaled by its largest
/// log-entry so far tails do not underflow.
fn log_det_gaussian(gs: &[Gaussian], x: &[f64]) -> (f64, f64) {
    let n = gs.len();
    let mut logs = vec![0.0; n * n];
    let mut shift = 0.0;
    for (k, &xk) in x.iter().enumerate() {
        let mut top = f64::NEG_INFINITY;
        for (j, g) in gs.iter().enumerate() {
            let d = xk - g.center;
            let l = g.amplitude.ln() - d * d / (2.0 * g.variance);
            logs[j * n + k] = l;
            top = top.max(l);
        }
        shift += top;
        for j in 0..n {
            logs[j * n + k] = (logs[j * n + k] - top).exp();
        }
    }
    let det = small_det(&mut logs, n);
    (shift + det.abs().ln(), det.signum())
}

/// The Karlin-McGregor joint density of the positions at time `t`.
///
/// The product of determinants is symmetric, and `Z_n` is its integral over
/// all of `ℝⁿ`, so the density integrates to one on `ℝⁿ` and to `1/n!` on
/// the ordered sector `x_1 < … < x_n`. With this normalization
/// `n! p = det(K_n(x_i, x_j))`.
#[derive(Debug, Clone)]
pub struct KarlinMcGregorDensity {
    pub config: BrownianConfig,
    pub z: ZEstimate,
    w1: Vec<Gaussian>,
    w2: Vec<Gaussian>,
}

fn tensor_sector_sum(w1: &[Gaussian], w2: &[Gaussian], rule: &QuadratureRule) -> f64 {
    let n = w1.len();
    let len = rule.len();
    let table = |gs: &[Gaussian]| -> Vec<f64> {
        let mut t = vec![0.0; gs.len() * len];
        for (j, g) in gs.iter().enumerate() {
            for (i, &x) in rule.nodes.iter().enumerate() {
                t[j * len + i] = g.eval(x);
            }
        }
        t
    };
    let t1 = table(w1);
    let t2 = table(w2);
    // Sum over strictly increasing node tuples: the integrand is symmetric and
    // vanishes when two coordinates coincide.
    (0..len)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut m1 = vec![0.0; n * n];
            let mut m2 = vec![0.0; n * n];
            let mut acc = 0.0;
            let mut visit = |idx: &[usize]| {
                for k in 0..n {
                    for j in 0..n {
                        m1[j * n + k] = t1[j * len + idx[k]];
                        m2[j * n + k] = t2[j * len + idx[k]];
                    }
                }
                let w: f64 = idx.iter().map(|&i| rule.weights[i]).product();
                acc += w * small_det(&mut m1, n) * small_det(&mut m2, n);
            };
            increasing_tuples(&mut idx, 1, len, &mut visit);
            acc
        })
        .sum()
}

fn increasing_tuples(idx: &mut Vec<usize>, pos: usize, len: usize, visit: &mut impl FnMut(&[usize])) {
    if pos == idx.len() {
        visit(idx);
        return;
    }
    for i in idx[pos - 1] + 1..len {
        idx[pos] = i;
        increasing_tuples(idx, pos + 1, len, visit);
    }
}

impl KarlinMcGregorDensity {
    /// Builds the density and certifies `Z_n` by two tensor rules.
    pub fn new(config: &BrownianConfig) -> Result<Self> {
        config.validate()?;
        if !config.is_distinct() {
            return Err(Error::InvalidInput(
                "the Karlin-McGregor density needs distinct start and end points".into(),
            ));
        }
        let n = config.n();
        if n > MAX_QUADRATURE_PATHS {
            return Err(Error::Accuracy {
                context: format!("tensor quadrature for Z_n with n = {n} paths"),
                achieved: f64::INFINITY,
                requested: Z_REL_TOL,
            });
        }
        let w1 = config.start_gaussians()?;
        let w2 = config.end_gaussians()?;
        let sd = config.bridge_sd();
        let pts = config.start_points().into_iter().chain(config.end_points());
        let (lo, hi) = pts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let (lo, hi) = (lo - BOX_SDS * sd, hi + BOX_SDS * sd);
        let panels = ((PANELS_PER_SD * (hi - lo) / sd).ceil() as usize).clamp(MIN_PANELS, MAX_PANELS);
        let coarse = QuadratureRule::composite_legendre(lo, hi, panels, PANEL_ORDER);
        let fine = QuadratureRule::composite_legendre(lo, hi, panels * 3 / 2, PANEL_ORDER);
        let n_factorial: f64 = (1..=n).map(|k| k as f64).product();
        let zc = n_factorial * tensor_sector_sum(&w1, &w2, &coarse);
        let zf = n_factorial * tensor_sector_sum(&w1, &w2, &fine);
        let gram = Matrix::from_fn(n, n, |j, k| {
            product_moment(&Weight::Gaussian(w1[j]), &Weight::Gaussian(w2[k]), 0)
                .map(|m| m.value)
                .unwrap_or(f64::NAN)
        });
        let z = ZEstimate {
            value: zf,
            error: (zf - zc).abs(),
            coarse_nodes: coarse.len(),
            fine_nodes: fine.len(),
            andreief: n_factorial * FullPivLu::new(&gram).determinant(),
        };
        if !(z.value > 0.0) || z.relative_error() > Z_REL_TOL {
            return Err(Error::Accuracy {
                context: "tensor quadrature for Z_n".into(),
                achieved: z.relative_error(),
                requested: Z_REL_TOL,
            });
        }
        Ok(KarlinMcGregorDensity {
            config: config.clone(),
            z,
            w1,
            w2,
        })
    }

    pub fn n(&self) -> usize {
        self.w1.len()
    }

    pub fn z_n(&self) -> f64 {
        self.z.value
    }

    /// `ln(det(P(t, a_j, x_k)) det(P(1-t, b_j, x_k)))`; `-∞` where the product
    /// is not positive.
    pub fn log_unnormalized(&self, x: &[f64]) -> f64 {
        let (l1, s1) = log_det_gaussian(&self.w1, x);
        let (l2, s2) = log_det_gaussian(&self.w2, x);
        if s1 * s2 > 0.0 {
            l1 + l2
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `ln p_{n,t}(x)`.
    pub fn log_eval(&self, x: &[f64]) -> f64 {
        self.log_unnormalized(x) - self.z.value.ln()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.log_eval(x).exp()
    }
}

/// Correlation functions `r_m = det(K_n(x_i, x_j))`.
#[derive(Debug, Clone)]
pub struct CorrelationFunctions {
    pub kernel: BiorthogonalSystem,
    pub config: BrownianConfig,
}

/// The correlation kernel of the positions at time `t`; multiplicities allowed.
pub fn correlation_kernel<T: Real>(config: &BrownianConfig) -> Result<CorrelationFunctions> {
    let (w1, w2, pair) = config_to_weights(config)?;
    let sys = MomentSystem::<T>::for_pair(w1, w2, &pair)?;
    Ok(CorrelationFunctions {
        kernel: build_biorthogonal(&pair, &sys)?,
        config: config.clone(),
    })
}

impl CorrelationFunctions {
    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub fn kernel_value(&self, x: f64, y: f64) -> f64 {
        self.kernel.kernel(x, y)
    }

    /// One-point function `K_n(x, x)`.
    pub fn r1(&self, x: f64) -> f64 {
        self.kernel.kernel(x, x)
    }

    /// `det(K_n(x_i, x_j))`.
    pub fn r(&self, points: &[f64]) -> f64 {
        let phis: Vec<Vec<f64>> = points.iter().map(|&x| self.kernel.phi_values(x)).collect();
        let gs: Vec<Vec<f64>> = points.iter().map(|&y| self.kernel.g_values(y)).collect();
        let k = Matrix::from_fn(points.len(), points.len(), |i, j| f64::dot(&phis[i], &gs[j]));
        FullPivLu::new(&k).determinant()
    }

    /// Effective support of the positions.
    pub fn support(&self) -> (f64, f64) {
        self.kernel.support()
    }
}

/// `r_m(x_1, …, x_m)`.
pub fn r_m(cf: &CorrelationFunctions, points: &[f64]) -> f64 {
    cf.r(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use std::f64::consts::PI;

    #[test]
    fn small_det_matches_lu() {
        let a = [2.0, -1.0, 0.5, 1.0, 3.0, -2.0, 0.25, 1.0, 4.0];
        let lu = FullPivLu::new(&Matrix::from_fn(3, 3, |i, j| a[i * 3 + j])).determinant();
        assert!((small_det(&mut a.clone(), 3) - lu).abs() < 1e-13);
    }

    #[test]
    fn one_path_is_a_bridge_marginal() {
        let (a, b, t) = (-0.5, 1.5, 0.3);
        let cfg = BrownianConfig::distinct(&[a], &[b], t, false).unwrap();
        let d = KarlinMcGregorDensity::new(&cfg).unwrap();
        let mean = (1.0 - t) * a + t * b;
        let var = t * (1.0 - t);
        for x in [-1.0, 0.1, 0.7] {
            let exact = (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
            assert!((d.eval(&[x]) - exact).abs() < 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn two_path_density_normalizes() {
        let cfg = BrownianConfig::distinct(&[-1.0, 1.0], &[-1.0, 1.0], 0.5, false).unwrap();
        let d = KarlinMcGregorDensity::new(&cfg).unwrap();
        assert!(d.z.relative_error() < 1e-8);
        assert!(d.z.andreief_discrepancy() < 1e-10, "{:?}", d.z);
        assert_eq!(d.eval(&[0.3, 0.3]), 0.0);
        // iterated adaptive quadrature over the ordered sector, which carries half the mass
        let inner = |x: f64| {
            integrate_adaptive(|y: f64| d.eval(&[x, y]), x, 6.0, 8, 1e-13, 1e-11, 2000).value
        };
        let total = integrate_adaptive(inner, -6.0, 6.0, 16, 1e-12, 1e-10, 2000).value;
        assert!((total - 0.5).abs() < 1e-6, "{total}");
    }

    #[test]
    fn correlation_functions() {
        let cfg = BrownianConfig::distinct(&[-1.0, 1.0], &[-0.5, 0.8], 0.4, false).unwrap();
        let cf = correlation_kernel::<f64>(&cfg).unwrap();
        assert!((r_m(&cf, &[0.2]) - cf.r1(0.2)).abs() < 1e-15);
        assert!(r_m(&cf, &[0.1, 0.1]).abs() < 1e-10);
        let (lo, hi) = cf.support();
        let total = integrate_adaptive(|x| cf.r1(x), lo, hi, 32, 1e-13, 1e-12, 5000).value;
        assert!((total - 2.0).abs() < 1e-8);
        let x = 0.3;
        let marginal = integrate_adaptive(|y| cf.r(&[x, y]), lo, hi, 32, 1e-14, 1e-12, 5000).value;
        assert!((marginal - cf.r1(x)).abs() < 1e-6);
    }
}
