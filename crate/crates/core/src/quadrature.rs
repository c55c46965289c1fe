//! Quadrature rules: Gauss-Hermite, Gauss-Legendre, composite rules and an
//! adaptive Gauss-Kronrod integrator for real or complex integrands.

use std::collections::{BinaryHeap, HashMap};
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Nodes and weights of an interpolatory rule.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Composite Gauss-Legendre on `[a, b]` with `panels` equal panels of `order` nodes.
    pub fn composite_legendre(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let base = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let lo = a + k as f64 * h;
            let mid = lo + 0.5 * h;
            for (&x, &w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        QuadratureRule { nodes, weights }
    }

    /// Gauss-Hermite rule for `∫ f(x) exp(-(x-mean)^2 / (2 variance)) dx`.
    pub fn hermite_centered(mean: f64, variance: f64, degree: usize) -> Self {
        let base = gauss_hermite(degree);
        let scale = (2.0 * variance).sqrt();
        QuadratureRule {
            nodes: base.nodes.iter().map(|&t| mean + scale * t).collect(),
            weights: base.weights.iter().map(|&w| scale * w).collect(),
        }
    }
}

fn cache() -> &'static Mutex<HashMap<(u8, usize), Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, usize), Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(kind: u8, n: usize, build: impl FnOnce() -> QuadratureRule) -> Arc<QuadratureRule> {
    if let Some(rule) = cache().lock().expect("quadrature cache").get(&(kind, n)) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build());
    cache()
        .lock()
        .expect("quadrature cache")
        .insert((kind, n), Arc::clone(&rule));
    rule
}

/// Gauss-Hermite nodes and weights for the weight `exp(-t^2)` on the real line.
///
/// Newton iteration on the orthonormal Hermite recurrence, with the usual
/// asymptotic starting values for the largest zeros.
pub fn gauss_hermite(n: usize) -> Arc<QuadratureRule> {
    assert!(n >= 1, "Gauss-Hermite needs at least one node");
    cached(0, n, || {
        // Jacobi matrix eigenvalues as starting points, then Newton polishing
        // so the weights keep full relative accuracy in the tails.
        let jacobi = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        guesses.sort_by(f64::total_cmp);
        const PIM4: f64 = 0.751_125_544_464_942_5;
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for (i, &guess) in guesses.iter().enumerate() {
            let mut z = guess;
            let mut pp = 1.0;
            for _ in 0..20 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let step = p1 / pp;
                if !step.is_finite() {
                    break;
                }
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            let wi = 2.0 / (pp * pp);
            w[i] = if wi.is_finite() { wi } else { 0.0 };
        }
        // Enforce exact symmetry.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let xm = 0.5 * (x[j] - x[i]);
            let wm = 0.5 * (w[i] + w[j]);
            x[i] = -xm;
            x[j] = xm;
            w[i] = wm;
            w[j] = wm;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        QuadratureRule { nodes: x, weights: w }
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<QuadratureRule> {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    cached(1, n, || {
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 1.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-16 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[n - 1 - i] = w[i];
        }
        QuadratureRule { nodes: x, weights: w }
    })
}

/// Values that can be integrated adaptively.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<V> {
    pub value: V,
    /// Sum of the per-panel Kronrod-Gauss differences.
    pub error: f64,
    /// Integral of the magnitude, for relative error statements.
    pub magnitude: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
    magnitude: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<V: QuadValue>(f: &impl Fn(f64) -> V, a: f64, b: f64) -> Panel<V> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut magnitude = fc.magnitude() * WGK[7];
    for k in 0..7 {
        let dx = half * XGK[k];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * WGK[k];
        magnitude += (f1.magnitude() + f2.magnitude()) * WGK[k];
        if k % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[k / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).magnitude(),
        magnitude: magnitude * half.abs(),
    }
}

/// Adaptive Gauss-Kronrod (7/15) on `[a, b]` starting from `initial_panels`
/// equal panels. Refines the worst panel until the summed error is below
/// `max(abs_tol, rel_tol * ∫|f|)` or `max_panels` is reached.
pub fn integrate_adaptive<V: QuadValue>(
    f: impl Fn(f64) -> V,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Integral<V> {
    let initial_panels = initial_panels.max(1);
    let h = (b - a) / initial_panels as f64;
    let mut heap = BinaryHeap::new();
    for k in 0..initial_panels {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == initial_panels { b } else { lo + h };
        heap.push(kronrod_panel(&f, lo, hi));
    }
    let mut evaluations = 15 * initial_panels;
    let totals = |heap: &BinaryHeap<Panel<V>>| {
        heap.iter().fold((V::zero(), 0.0, 0.0), |(v, e, m), p| {
            (v + p.value, e + p.error, m + p.magnitude)
        })
    };
    loop {
        let (value, error, magnitude) = totals(&heap);
        let target = abs_tol.max(rel_tol * magnitude);
        if error <= target || heap.len() >= max_panels {
            return Integral {
                value,
                error,
                magnitude,
                evaluations,
                converged: error <= target,
            };
        }
        let worst = heap.pop().expect("nonempty panel heap");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod_panel(&f, worst.a, mid));
        heap.push(kronrod_panel(&f, mid, worst.b));
        evaluations += 30;
    }
}
