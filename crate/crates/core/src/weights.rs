//! Weights on the real line and their product moments
//! `∫ u(x)^k w1(x) w2(x) dx`, where `u` is a shifted-scaled monomial variable.
//!
//! Gaussian pairs use a closed form: the product of two Gaussians is a
//! Gaussian with amplitude `C`, mean `μ`, variance `σ²`, and the moments obey
//! `m_k = μ m_{k-1} + (k-1) σ² m_{k-2}`. Anything else is integrated
//! numerically with a doubling rule and an explicit error bound.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::real::Real;

/// `amplitude * exp(-(x - center)^2 / (2 variance))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub center: f64,
    pub variance: f64,
    pub amplitude: f64,
}

impl Gaussian {
    pub fn new(center: f64, variance: f64, amplitude: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidInput(format!("gaussian center {center} is not finite")));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gaussian variance must be positive, got {variance}"
            )));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gaussian amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Gaussian {
            center,
            variance,
            amplitude,
        })
    }

    /// Brownian transition density `P_n(t, a, ·)` as a Gaussian in `x`.
    pub fn transition(t: f64, a: f64, scale: u32) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidInput(format!("time t = {t} must lie in (0, 1)")));
        }
        if scale == 0 {
            return Err(Error::InvalidInput("variance scale n must be positive".into()));
        }
        let n = f64::from(scale);
        Gaussian::new(a, t / n, (n / (2.0 * PI * t)).sqrt())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.amplitude * (-d * d / (2.0 * self.variance)).exp()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -(x - self.center) / self.variance * self.eval(x)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// The pointwise product, again of Gaussian shape.
    pub fn product(&self, other: &Gaussian) -> Gaussian {
        let vs = self.variance + other.variance;
        let center = if self.center == other.center {
            self.center
        } else {
            (self.center * other.variance + other.center * self.variance) / vs
        };
        let d = self.center - other.center;
        Gaussian {
            center,
            variance: self.variance * other.variance / vs,
            amplitude: self.amplitude * other.amplitude * (-d * d / (2.0 * vs)).exp(),
        }
    }
}

/// Scalar function with a declared compact integration support.
///
/// Outside `support` the weight is treated as zero; that declaration is what
/// guarantees finite moments for a generic weight.
#[derive(Clone)]
pub struct Tabulated {
    label: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: (f64, f64),
}

impl Tabulated {
    pub fn new(
        label: impl Into<String>,
        support: (f64, f64),
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "tabulated support [{lo}, {hi}] must be a finite nonempty interval"
            )));
        }
        Ok(Tabulated {
            label: label.into(),
            eval: Arc::new(eval),
            support,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support;
        if x < lo || x > hi {
            0.0
        } else {
            (self.eval)(x).max(0.0)
        }
    }
}

impl fmt::Debug for Tabulated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tabulated")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Weight {
    Gaussian(Gaussian),
    Tabulated(Tabulated),
}

impl Weight {
    pub fn gaussian(center: f64, variance: f64, amplitude: f64) -> Result<Self> {
        Gaussian::new(center, variance, amplitude).map(Weight::Gaussian)
    }

    /// The constant 1 on `[lo, hi]`, zero elsewhere.
    pub fn truncated_constant(lo: f64, hi: f64) -> Result<Self> {
        Tabulated::new(format!("uniform[{lo}, {hi}]"), (lo, hi), |_| 1.0).map(Weight::Tabulated)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Weight::Gaussian(g) => g.eval(x),
            Weight::Tabulated(t) => t.eval(x),
        }
    }

    /// Pointwise derivative; central differences for tabulated weights.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Weight::Gaussian(g) => g.derivative(x),
            Weight::Tabulated(t) => {
                let (lo, hi) = t.support;
                let h = 1e-6 * (hi - lo);
                (t.eval(x + h) - t.eval(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn as_gaussian(&self) -> Option<&Gaussian> {
        match self {
            Weight::Gaussian(g) => Some(g),
            Weight::Tabulated(_) => None,
        }
    }

    /// Location used to place the monomial basis.
    pub fn center_hint(&self) -> f64 {
        match self {
            Weight::Gaussian(g) => g.center,
            Weight::Tabulated(t) => 0.5 * (t.support.0 + t.support.1),
        }
    }

    /// Spread used to scale the monomial basis.
    pub fn variance_hint(&self) -> f64 {
        match self {
            Weight::Gaussian(g) => g.variance,
            Weight::Tabulated(t) => {
                let half = 0.5 * (t.support.1 - t.support.0);
                half * half / 3.0
            }
        }
    }

    /// Interval outside which the weight is negligible (`sds` standard deviations for Gaussians).
    pub fn effective_interval(&self, sds: f64) -> (f64, f64) {
        match self {
            Weight::Gaussian(g) => (g.center - sds * g.std_dev(), g.center + sds * g.std_dev()),
            Weight::Tabulated(t) => t.support,
        }
    }
}

/// Pointwise evaluation `w(x)`.
pub fn eval_weight(w: &Weight, x: f64) -> f64 {
    w.eval(x)
}

/// Scaled Brownian transition density `√n / √(2πt) · exp(-n (x-a)² / (2t))`.
pub fn gaussian_transition(t: f64, a: f64, x: f64, scale: u32) -> Result<f64> {
    Ok(Gaussian::transition(t, a, scale)?.eval(x))
}

/// Ordered, nonempty list of weights.
#[derive(Debug, Clone)]
pub struct WeightFamily {
    weights: Vec<Weight>,
}

impl WeightFamily {
    pub fn new(weights: Vec<Weight>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("a weight family needs at least one weight".into()));
        }
        Ok(WeightFamily { weights })
    }

    pub fn gaussians(specs: &[(f64, f64, f64)]) -> Result<Self> {
        specs
            .iter()
            .map(|&(c, v, a)| Weight::gaussian(c, v, a))
            .collect::<Result<Vec<_>>>()
            .and_then(WeightFamily::new)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, j: usize) -> &Weight {
        &self.weights[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Weight> {
        self.weights.iter()
    }

    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        self.weights.iter().map(|w| w.eval(x)).collect()
    }

    pub fn all_gaussian(&self) -> bool {
        self.weights.iter().all(|w| w.as_gaussian().is_some())
    }

    /// Union of the effective intervals.
    pub fn effective_interval(&self, sds: f64) -> (f64, f64) {
        self.weights.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
            let (a, b) = w.effective_interval(sds);
            (lo.min(a), hi.max(b))
        })
    }
}

/// The affine variable `u = (x - center) / scale` used for all monomials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub center: f64,
    pub scale: f64,
}

impl Basis {
    pub fn identity() -> Self {
        Basis {
            center: 0.0,
            scale: 1.0,
        }
    }

    /// Center at the mean of all weight centers; scale by the root mean
    /// square of the weight spreads and center offsets.
    pub fn fit(families: &[&WeightFamily]) -> Self {
        let all: Vec<&Weight> = families.iter().flat_map(|f| f.iter()).collect();
        let n = all.len().max(1) as f64;
        let center = all.iter().map(|w| w.center_hint()).sum::<f64>() / n;
        let spread = all
            .iter()
            .map(|w| {
                let d = w.center_hint() - center;
                w.variance_hint() + d * d
            })
            .sum::<f64>()
            / n;
        let scale = spread.sqrt();
        Basis {
            center,
            scale: if scale > 0.0 && scale.is_finite() { scale } else { 1.0 },
        }
    }

    pub fn to_local(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }

    pub fn to_global(&self, u: f64) -> f64 {
        self.center + self.scale * u
    }
}

/// A product moment together with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    pub error: f64,
}

/// `∫ x^k w1(x) w2(x) dx` in the original variable.
pub fn product_moment(w1: &Weight, w2: &Weight, k: usize) -> Result<Moment> {
    let (values, errors) = moments_in_basis::<f64>(w1, w2, &Basis::identity(), k)?;
    Ok(Moment {
        value: values[k],
        error: errors[k],
    })
}

const QUAD_ABS_TOL: f64 = 1e-12;
const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_DEGREE: usize = 512;

/// All moments `∫ u^k w1 w2 dx`, `k = 0..=max_order`, with error bounds.
pub(crate) fn moments_in_basis<T: Real>(
    w1: &Weight,
    w2: &Weight,
    basis: &Basis,
    max_order: usize,
) -> Result<(Vec<T>, Vec<f64>)> {
    match (w1, w2) {
        (Weight::Gaussian(g1), Weight::Gaussian(g2)) => {
            Ok(gaussian_pair_moments(g1, g2, basis, max_order))
        }
        _ => {
            let (v, e) = quadrature_moments(w1, w2, basis, max_order)?;
            Ok((v.into_iter().map(T::lift).collect(), e))
        }
    }
}

fn gaussian_pair_moments<T: Real>(
    g1: &Gaussian,
    g2: &Gaussian,
    basis: &Basis,
    max_order: usize,
) -> (Vec<T>, Vec<f64>) {
    let lift = T::lift;
    let (c1, c2, v1, v2) = (lift(g1.center), lift(g2.center), lift(g1.variance), lift(g2.variance));
    let vs = v1 + v2;
    let mean = if g1.center == g2.center {
        c1
    } else {
        (c1 * v2 + c2 * v1) / vs
    };
    let var = v1 * v2 / vs;
    let d = c1 - c2;
    let two = lift(2.0);
    let amp = lift(g1.amplitude) * lift(g2.amplitude) * (-(d * d) / (two * vs)).exp();
    let m0 = amp * (two * T::PI() * var).sqrt();

    let s = lift(basis.scale);
    // Shared centers on the basis center give exactly zero odd moments.
    let mu = if g1.center == g2.center && g1.center == basis.center {
        T::zero()
    } else {
        (mean - lift(basis.center)) / s
    };
    let sig2 = var / (s * s);

    let mut e = vec![T::zero(); max_order + 1];
    let mut bound = vec![0.0f64; max_order + 1];
    e[0] = T::one();
    bound[0] = 1.0;
    if max_order >= 1 {
        e[1] = mu;
        bound[1] = mu.abs().lower();
    }
    let (mu_abs, s2) = (mu.abs().lower(), sig2.lower());
    for k in 2..=max_order {
        e[k] = mu * e[k - 1] + lift((k - 1) as f64) * sig2 * e[k - 2];
        bound[k] = mu_abs * bound[k - 1] + (k - 1) as f64 * s2 * bound[k - 2];
    }
    let eps = T::epsilon().lower();
    let m0_f = m0.lower().abs();
    let values = e.into_iter().map(|x| m0 * x).collect();
    let errors = bound
        .iter()
        .enumerate()
        .map(|(k, b)| (k as f64 + 4.0) * eps * m0_f * b)
        .collect();
    (values, errors)
}

fn quadrature_moments(
    w1: &Weight,
    w2: &Weight,
    basis: &Basis,
    max_order: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let estimate = |degree: usize| -> Vec<f64> {
        let rule = match (w1, w2) {
            (Weight::Gaussian(g), _) | (_, Weight::Gaussian(g)) => {
                QuadratureRule::hermite_centered(g.center, g.variance, degree)
            }
            (Weight::Tabulated(a), Weight::Tabulated(b)) => {
                let lo = a.support.0.max(b.support.0);
                let hi = a.support.1.min(b.support.1);
                if lo >= hi {
                    return vec![0.0; max_order + 1];
                }
                QuadratureRule::composite_legendre(lo, hi, degree / 8, 8)
            }
        };
        // The Hermite rule already carries the Gaussian shape; divide it out.
        let shape: Box<dyn Fn(f64) -> f64> = match (w1, w2) {
            (Weight::Gaussian(g), other) | (other, Weight::Gaussian(g)) => {
                let g = *g;
                let other = other.clone();
                Box::new(move |x| g.amplitude * other.eval(x))
            }
            _ => Box::new(|x| w1.eval(x) * w2.eval(x)),
        };
        let mut acc = vec![0.0; max_order + 1];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let base = w * shape(x);
            if base == 0.0 {
                continue;
            }
            let u = basis.to_local(x);
            let mut pw = base;
            for slot in acc.iter_mut() {
                *slot += pw;
                pw *= u;
            }
        }
        acc
    };

    let mut degree = 16;
    let mut previous = estimate(degree);
    loop {
        let next_degree = degree * 2;
        let current = estimate(next_degree);
        let diffs: Vec<f64> = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).abs())
            .collect();
        let agreed = diffs
            .iter()
            .zip(&current)
            .all(|(&d, &v)| d <= QUAD_ABS_TOL || d <= QUAD_REL_TOL * v.abs());
        if agreed {
            return Ok((current, diffs));
        }
        if next_degree >= QUAD_MAX_DEGREE {
            let worst = diffs.iter().copied().fold(0.0, f64::max);
            return Err(Error::Accuracy {
                context: "product moment quadrature".into(),
                achieved: worst,
                requested: QUAD_ABS_TOL,
            });
        }
        degree = next_degree;
        previous = current;
    }
}

/// Product moments `∫ u^k w1_j w2_l dx` for every pair `(j, l)` and `k ≤ max_order`.
#[derive(Debug, Clone)]
pub struct ProductMomentTable<T = f64> {
    p: usize,
    q: usize,
    max_order: usize,
    basis: Basis,
    values: Vec<T>,
    errors: Vec<f64>,
}

impl<T: Real> ProductMomentTable<T> {
    fn slot(&self, j: usize, l: usize, k: usize) -> usize {
        (j * self.q + l) * (self.max_order + 1) + k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Moment for first-family weight `j`, second-family weight `l`, order `k` (0-based).
    pub fn get(&self, j: usize, l: usize, k: usize) -> Result<T> {
        if j >= self.p || l >= self.q || k > self.max_order {
            return Err(Error::MissingMoment {
                first: j + 1,
                second: l + 1,
                order: k,
            });
        }
        Ok(self.values[self.slot(j, l, k)])
    }

    pub fn error_bound(&self, j: usize, l: usize, k: usize) -> f64 {
        self.errors[self.slot(j, l, k)]
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    /// Same moments with the roles of the two families exchanged.
    pub fn transposed(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        let mut errors = Vec::with_capacity(self.errors.len());
        for l in 0..self.q {
            for j in 0..self.p {
                for k in 0..=self.max_order {
                    let s = self.slot(j, l, k);
                    values.push(self.values[s]);
                    errors.push(self.errors[s]);
                }
            }
        }
        ProductMomentTable {
            p: self.q,
            q: self.p,
            max_order: self.max_order,
            basis: self.basis,
            values,
            errors,
        }
    }

    /// CSV with header `j,l,k,value,error_bound`; `j`, `l` are 1-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,l,k,value,error_bound\n");
        for j in 0..self.p {
            for l in 0..self.q {
                for k in 0..=self.max_order {
                    let s = self.slot(j, l, k);
                    out.push_str(&format!(
                        "{},{},{},{:.16e},{:.16e}\n",
                        j + 1,
                        l + 1,
                        k,
                        self.values[s].lower(),
                        self.errors[s]
                    ));
                }
            }
        }
        out
    }
}

/// Fills the full table; Gaussian pairs use the closed form.
pub fn build_moment_table<T: Real>(
    w1: &WeightFamily,
    w2: &WeightFamily,
    basis: &Basis,
    max_order: usize,
) -> Result<ProductMomentTable<T>> {
    let (p, q) = (w1.len(), w2.len());
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|j| (0..q).map(move |l| (j, l))).collect();
    let blocks: Vec<(Vec<T>, Vec<f64>)> = pairs
        .par_iter()
        .map(|&(j, l)| {
            moments_in_basis::<T>(w1.get(j), w2.get(l), basis, max_order).map_err(|e| match e {
                Error::Accuracy {
                    achieved,
                    requested,
                    ..
                } => Error::Accuracy {
                    context: format!("product moments of weights ({}, {})", j + 1, l + 1),
                    achieved,
                    requested,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(p * q * (max_order + 1));
    let mut errors = Vec::with_capacity(values.capacity());
    for (v, e) in blocks {
        values.extend(v);
        errors.extend(e);
    }
    Ok(ProductMomentTable {
        p,
        q,
        max_order,
        basis: *basis,
        values,
        errors,
    })
}

/// JSON description of a single weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightSpec {
    Gaussian {
        center: f64,
        variance: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Constant 1 on `[lower, upper]`.
    Uniform { lower: f64, upper: f64 },
}

fn one() -> f64 {
    1.0
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight> {
        match *self {
            WeightSpec::Gaussian {
                center,
                variance,
                amplitude,
            } => Weight::gaussian(center, variance, amplitude),
            WeightSpec::Uniform { lower, upper } => Weight::truncated_constant(lower, upper),
        }
    }

    pub fn from_weight(w: &Weight) -> Option<Self> {
        match w {
            Weight::Gaussian(g) => Some(WeightSpec::Gaussian {
                center: g.center,
                variance: g.variance,
                amplitude: g.amplitude,
            }),
            Weight::Tabulated(_) => None,
        }
    }
}

/// `{"w1": [...], "w2": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsConfig {
    pub w1: Vec<WeightSpec>,
    pub w2: Vec<WeightSpec>,
}

impl WeightsConfig {
    pub fn families(&self) -> Result<(WeightFamily, WeightFamily)> {
        let build = |specs: &[WeightSpec]| {
            specs
                .iter()
                .map(WeightSpec::build)
                .collect::<Result<Vec<_>>>()
                .and_then(WeightFamily::new)
        };
        Ok((build(&self.w1)?, build(&self.w2)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use crate::real::DoubleDouble;

    fn std_gauss() -> Weight {
        Weight::gaussian(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_weight(&std_gauss(), 0.0), 1.0);
        for x in [0.3, 1.7, 4.0] {
            assert_eq!(eval_weight(&std_gauss(), x), eval_weight(&std_gauss(), -x));
        }
        let w = Weight::gaussian(1.0, 0.25, 1.0).unwrap();
        assert_eq!(eval_weight(&w, 1.0), 1.0);
    }

    #[test]
    fn transition_examples() {
        let v = gaussian_transition(0.5, 0.0, 0.0, 1).unwrap();
        assert!((v - 1.0 / PI.sqrt()).abs() < 1e-15);
        let v = gaussian_transition(0.5, 1.0, 1.0, 4).unwrap();
        assert!((v - 2.0 / PI.sqrt()).abs() < 1e-15);
        assert!(gaussian_transition(1.0, 0.0, 0.0, 1).is_err());
        assert!(gaussian_transition(0.0, 0.0, 0.0, 1).is_err());
        for (t, a, n) in [(0.3, -1.0, 1u32), (0.8, 2.0, 5)] {
            let res = integrate_adaptive(
                |x| gaussian_transition(t, a, x, n).unwrap(),
                a - 20.0,
                a + 20.0,
                8,
                1e-14,
                0.0,
                1000,
            );
            assert!((res.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_moment_examples() {
        let g = std_gauss();
        let m0 = product_moment(&g, &g, 0).unwrap();
        assert!((m0.value - PI.sqrt()).abs() < 1e-15);
        assert_eq!(product_moment(&g, &g, 1).unwrap().value, 0.0);
        let m2 = product_moment(&g, &g, 2).unwrap();
        assert!((m2.value - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn table_examples() {
        let fam = WeightFamily::gaussians(&[(0.0, 1.0, 1.0)]).unwrap();
        let t = build_moment_table::<f64>(&fam, &fam, &Basis::identity(), 2).unwrap();
        assert!((t.get(0, 0, 0).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert_eq!(t.get(0, 0, 1).unwrap(), 0.0);
        assert!((t.get(0, 0, 2).unwrap() - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!(matches!(t.get(0, 0, 3), Err(Error::MissingMoment { .. })));

        let w1 = WeightFamily::gaussians(&[(-1.0, 0.5, 1.0), (1.0, 0.5, 1.0)]).unwrap();
        let t = build_moment_table::<f64>(&w1, &fam, &Basis::identity(), 4).unwrap();
        assert_eq!(t.len(), 2 * 5);
        let tt = t.transposed();
        assert_eq!(tt.get(0, 1, 3).unwrap(), t.get(1, 0, 3).unwrap());
    }

    #[test]
    fn symmetric_pairs_have_exact_zero_odd_moments() {
        let w1 = WeightFamily::gaussians(&[(0.7, 0.3, 2.0)]).unwrap();
        let w2 = WeightFamily::gaussians(&[(0.7, 1.1, 0.5)]).unwrap();
        let basis = Basis::fit(&[&w1, &w2]);
        assert_eq!(basis.center, 0.7);
        let t = build_moment_table::<f64>(&w1, &w2, &basis, 9).unwrap();
        for k in (1..=9).step_by(2) {
            assert_eq!(t.get(0, 0, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadrature_path_matches_closed_form() {
        // A Gaussian presented as a tabulated weight exercises the quadrature fallback.
        let g = Gaussian::new(0.4, 0.7, 1.3).unwrap();
        let tab = Weight::Tabulated(Tabulated::new("g", (0.4 - 15.0, 0.4 + 15.0), move |x| g.eval(x)).unwrap());
        let other = Weight::gaussian(-0.5, 0.4, 0.9).unwrap();
        let basis = Basis { center: 0.1, scale: 0.8 };
        let (exact, exact_err) = moments_in_basis::<f64>(&Weight::Gaussian(g), &other, &basis, 12).unwrap();
        let (quad, quad_err) = moments_in_basis::<f64>(&tab, &other, &basis, 12).unwrap();
        for k in 0..=12 {
            let tol = exact_err[k] + quad_err[k] + 1e-12 * exact[k].abs().max(1e-3);
            assert!((exact[k] - quad[k]).abs() <= tol, "k={k}: {} vs {}", exact[k], quad[k]);
        }
        // Two tabulated weights go through composite Legendre.
        let tab2 = Weight::Tabulated(
            Tabulated::new("h", (-12.0, 12.0), |x| (-(x + 0.5) * (x + 0.5) / 0.8).exp() * 0.9).unwrap(),
        );
        let (quad2, _) = moments_in_basis::<f64>(&tab, &tab2, &basis, 6).unwrap();
        for k in 0..=6 {
            assert!((quad2[k] - exact[k]).abs() < 1e-9 * exact[0].abs(), "k={k}");
        }
    }

    #[test]
    fn truncated_constant_moments() {
        let u = Weight::truncated_constant(-1.0, 1.0).unwrap();
        let g = Weight::gaussian(0.0, 0.01, 1.0).unwrap();
        let m = product_moment(&u, &g, 0).unwrap();
        assert!((m.value - (2.0 * PI * 0.01).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn extended_precision_table_agrees() {
        let w1 = WeightFamily::gaussians(&[(-0.8, 0.5, 1.0), (0.9, 0.5, 0.7)]).unwrap();
        let w2 = WeightFamily::gaussians(&[(0.2, 0.4, 1.1)]).unwrap();
        let basis = Basis::fit(&[&w1, &w2]);
        let d = build_moment_table::<f64>(&w1, &w2, &basis, 10).unwrap();
        let e = build_moment_table::<DoubleDouble>(&w1, &w2, &basis, 10).unwrap();
        for j in 0..2 {
            for k in 0..=10 {
                let a = d.get(j, 0, k).unwrap();
                let b = e.get(j, 0, k).unwrap().lower();
                assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300) + d.error_bound(j, 0, k));
                assert!(e.error_bound(j, 0, k) < 1e-25);
            }
        }
    }

    #[test]
    fn config_json_roundtrip() {
        let json = r#"{"w1":[{"kind":"gaussian","center":0.0,"variance":1.0,"amplitude":1.0}],
                      "w2":[{"kind":"gaussian","center":1.0,"variance":0.5}]}"#;
        let cfg: WeightsConfig = serde_json::from_str(json).unwrap();
        let (w1, w2) = cfg.families().unwrap();
        assert_eq!(w1.len(), 1);
        assert_eq!(w2.get(0).as_gaussian().unwrap().amplitude, 1.0);
        let bad = r#"{"w1":[{"kind":"gaussian","center":0.0,"variance":-1.0}],"w2":[]}"#;
        let cfg: WeightsConfig = serde_json::from_str(bad).unwrap();
        assert!(cfg.families().is_err());
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let fam = WeightFamily::gaussians(&[(0.0, 1.0, 1.0), (1.0, 1.0, 1.0)]).unwrap();
        let t = build_moment_table::<f64>(&fam, &fam, &Basis::identity(), 1).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "j,l,k,value,error_bound");
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        assert!(lines[1].starts_with("1,1,0,1.7724538509055159e0"));
    }
}
