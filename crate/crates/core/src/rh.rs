//! The explicit Riemann-Hilbert matrix `Y` of a balanced pair and its
//! inverse transpose `X`, assembled from mixed-type forms and their Cauchy
//! transforms.
//!
//! Row blocks of `Y`: the first `p` rows come from `Q^{(II,k)}_{n+e_k,m}`,
//! the last `q` from `Q^{(I,k)}_{n,m-e_k}`. `X` is built the same way from the
//! swapped-orientation forms; it is never obtained by inverting `Y`.

use std::f64::consts::PI;

use errorfunctions::ComplexErrorFunctions;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{build_cd_data, CdKernelData};
use crate::mop::{MixedMopSolution, MomentSystem, MultiIndexPair};
use crate::quadrature::integrate_adaptive;
use crate::real::Real;
use crate::weights::{Basis, Gaussian, Weight, WeightFamily};

/// Band, in basis spreads, inside which Cauchy transforms use singularity subtraction.
pub const NEAR_AXIS: f64 = 0.05;

/// Default offsets for boundary values and jump extrapolation. Five halvings
/// leave an `O(δ⁵)` extrapolation error even for high-degree polynomial entries.
pub const DEFAULT_DELTAS: [f64; 5] = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4];

const CAUCHY_REL_TOL: f64 = 1e-13;
const CAUCHY_MAX_PANELS: usize = 4000;
const SUPPORT_SDS: f64 = 12.0;

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// Where a matrix was evaluated relative to the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Off,
    BoundaryPlus,
    BoundaryMinus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::BoundaryMinus => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RhEvaluation {
    pub z: Complex64,
    pub matrix: DMatrix<Complex64>,
    pub side: Side,
    /// Error bound of each entry; zero for polynomial entries.
    pub accuracy: DMatrix<f64>,
}

impl RhEvaluation {
    pub fn determinant(&self) -> Complex64 {
        self.matrix.determinant()
    }

    pub fn max_error(&self) -> f64 {
        self.accuracy.iter().copied().fold(0.0, f64::max)
    }
}

/// `J(x) = [I_p W; 0 I_q]` with `W = w1ᵗ w2`.
#[derive(Debug, Clone)]
pub struct JumpMatrix {
    pub x: f64,
    pub value: DMatrix<f64>,
}

impl JumpMatrix {
    pub fn new(w1: &WeightFamily, w2: &WeightFamily, x: f64) -> Self {
        let (p, q) = (w1.len(), w2.len());
        let a = w1.eval_all(x);
        let b = w2.eval_all(x);
        let mut value = DMatrix::identity(p + q, p + q);
        for k in 0..p {
            for l in 0..q {
                value[(k, p + l)] = a[k] * b[l];
            }
        }
        JumpMatrix { x, value }
    }

    /// The upper-right block `W`.
    pub fn w_block(&self, p: usize) -> DMatrix<f64> {
        let n = self.value.nrows();
        self.value.view((0, p), (p, n - p)).into_owned()
    }

    fn complex(&self) -> DMatrix<Complex64> {
        self.value.map(|v| Complex64::new(v, 0.0))
    }

    /// The jump of `X`: `[I_p 0; -Wᵗ I_q]`.
    fn inverse_transpose(&self, p: usize) -> DMatrix<Complex64> {
        let n = self.value.nrows();
        let mut out = DMatrix::identity(n, n);
        for k in 0..p {
            for l in p..n {
                out[(l, k)] = Complex64::new(-self.value[(k, l)], 0.0);
            }
        }
        out
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpReport {
    pub x: f64,
    pub deltas: Vec<f64>,
    /// `max |Y(x+iδ) - Y(x-iδ) J(x)|` for each offset.
    pub raw_residuals: Vec<f64>,
    /// Extrapolated limit of the residual matrix, entrywise max.
    pub extrapolated: f64,
    /// The same for `X` with jump `[I 0; -Wᵗ I]`.
    pub extrapolated_x: f64,
    /// `max |Y(x + iδ_min)|`.
    pub scale: f64,
    pub scale_x: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub radii: Vec<f64>,
    pub errors_y: Vec<f64>,
    pub errors_x: Vec<f64>,
    /// `E(R) / E(2R)` for consecutive radii.
    pub ratios_y: Vec<f64>,
    pub ratios_x: Vec<f64>,
}

impl AsymptoticReport {
    pub fn min_ratio(&self) -> f64 {
        self.ratios_y
            .iter()
            .chain(&self.ratios_x)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Contracting ratios of successive errors.
fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

/// `Y`, `X` and the kernel for a balanced pair.
#[derive(Debug, Clone)]
pub struct RhProblem {
    data: CdKernelData,
    support: (f64, f64),
}

impl RhProblem {
    pub fn new<T: Real>(pair: &MultiIndexPair, sys: &MomentSystem<T>) -> Result<Self> {
        Ok(Self::from_cd_data(build_cd_data(pair, sys)?))
    }

    pub fn from_cd_data(data: CdKernelData) -> Self {
        let (a1, b1) = data.w1().effective_interval(SUPPORT_SDS);
        let (a2, b2) = data.w2().effective_interval(SUPPORT_SDS);
        RhProblem {
            data,
            support: (a1.min(a2), b1.max(b2)),
        }
    }

    pub fn data(&self) -> &CdKernelData {
        &self.data
    }

    pub fn pair(&self) -> &MultiIndexPair {
        &self.data.pair
    }

    pub fn basis(&self) -> &Basis {
        &self.data.basis
    }

    pub fn p(&self) -> usize {
        self.data.pair.p()
    }

    pub fn q(&self) -> usize {
        self.data.pair.q()
    }

    pub fn size(&self) -> usize {
        self.p() + self.q()
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn jump(&self, x: f64) -> JumpMatrix {
        JumpMatrix::new(self.data.w1(), self.data.w2(), x)
    }

    /// `∫ Q(x) w(x) / (x - z) dx` and its error bound. On the real axis
    /// `side` selects the boundary value.
    pub fn cauchy(&self, form: &MixedMopSolution, w: &Weight, z: Complex64, side: Side) -> Result<(Complex64, f64)> {
        let f = |x: f64| form.form(x) * w.eval(x);
        let df = |x: f64| form.form_derivative(x) * w.eval(x) + form.form(x) * w.derivative(x);
        cauchy_transform(f, df, self.support, z, side, NEAR_AXIS * self.data.basis.scale)
    }

    fn side_for(z: Complex64, side: Side) -> Result<Side> {
        if z.im != 0.0 {
            return Ok(Side::Off);
        }
        match side {
            Side::Off => Err(Error::InvalidInput(format!(
                "z = {} lies on the real line; choose a boundary side",
                z.re
            ))),
            s => Ok(s),
        }
    }

    /// `Y(z)`.
    pub fn eval_y(&self, z: Complex64, side: Side) -> Result<RhEvaluation> {
        let side = Self::side_for(z, side)?;
        let (p, q) = (self.p(), self.q());
        let d = &self.data;
        let mut matrix = DMatrix::zeros(p + q, p + q);
        let mut accuracy = DMatrix::zeros(p + q, p + q);
        for k in 0..p {
            for l in 0..p {
                matrix[(k, l)] = d.type2_forward[k].poly_complex(l, z);
            }
        }
        for k in 0..q {
            for l in 0..p {
                matrix[(p + k, l)] = -two_pi_i() * d.type1_forward[k].poly_complex(l, z);
            }
        }
        let jobs: Vec<(usize, usize)> = (0..p + q).flat_map(|r| (0..q).map(move |l| (r, l))).collect();
        let cells: Vec<Result<(Complex64, f64)>> = jobs
            .par_iter()
            .map(|&(r, l)| {
                let w = d.w2().get(l);
                if r < p {
                    let (c, e) = self.cauchy(&d.type2_forward[r], w, z, side)?;
                    Ok((c / two_pi_i(), e / (2.0 * PI)))
                } else {
                    let (c, e) = self.cauchy(&d.type1_forward[r - p], w, z, side)?;
                    Ok((-c, e))
                }
            })
            .collect();
        for (&(r, l), cell) in jobs.iter().zip(cells) {
            let (v, e) = cell?;
            matrix[(r, p + l)] = v;
            accuracy[(r, p + l)] = e;
        }
        Ok(RhEvaluation { z, matrix, side, accuracy })
    }

    /// `X(z) = Y(z)^{-t}`, assembled from the swapped-orientation forms.
    pub fn eval_x(&self, z: Complex64, side: Side) -> Result<RhEvaluation> {
        let side = Self::side_for(z, side)?;
        let (p, q) = (self.p(), self.q());
        let d = &self.data;
        let mut matrix = DMatrix::zeros(p + q, p + q);
        let mut accuracy = DMatrix::zeros(p + q, p + q);
        for k in 0..p {
            for l in 0..q {
                matrix[(k, p + l)] = two_pi_i() * d.type1_swapped[k].poly_complex(l, z);
            }
        }
        for k in 0..q {
            for l in 0..q {
                matrix[(p + k, p + l)] = d.type2_swapped[k].poly_complex(l, z);
            }
        }
        let jobs: Vec<(usize, usize)> = (0..p + q).flat_map(|r| (0..p).map(move |l| (r, l))).collect();
        let cells: Vec<Result<(Complex64, f64)>> = jobs
            .par_iter()
            .map(|&(r, l)| {
                let w = d.w1().get(l);
                if r < p {
                    let (c, e) = self.cauchy(&d.type1_swapped[r], w, z, side)?;
                    Ok((-c, e))
                } else {
                    let (c, e) = self.cauchy(&d.type2_swapped[r - p], w, z, side)?;
                    Ok((-c / two_pi_i(), e / (2.0 * PI)))
                }
            })
            .collect();
        for (&(r, l), cell) in jobs.iter().zip(cells) {
            let (v, e) = cell?;
            matrix[(r, l)] = v;
            accuracy[(r, l)] = e;
        }
        Ok(RhEvaluation { z, matrix, side, accuracy })
    }

    /// `|det Y(z) - 1|`.
    pub fn det_residual(&self, z: Complex64) -> Result<f64> {
        Ok((self.eval_y(z, Side::Off)?.determinant() - 1.0).norm())
    }

    /// `max |X(z)ᵗ Y(z) - I|`.
    pub fn xy_consistency(&self, z: Complex64) -> Result<f64> {
        let y = self.eval_y(z, Side::Off)?;
        let x = self.eval_x(z, Side::Off)?;
        let prod = x.matrix.transpose() * y.matrix;
        Ok(max_abs(&(prod - DMatrix::identity(self.size(), self.size()))))
    }

    /// Richardson-extrapolated jump residual at `x` over decreasing offsets.
    pub fn verify_jump(&self, x: f64, deltas: &[f64]) -> Result<JumpReport> {
        if deltas.len() < 3 || deltas.windows(2).any(|w| !(w[1] < w[0]) || w[1] <= 0.0) {
            return Err(Error::InvalidInput(
                "jump verification needs at least three decreasing positive offsets".into(),
            ));
        }
        let p = self.p();
        let jy = self.jump(x).complex();
        let jx = self.jump(x).inverse_transpose(p);
        let mut dy = Vec::with_capacity(deltas.len());
        let mut dx = Vec::with_capacity(deltas.len());
        let mut raw = Vec::with_capacity(deltas.len());
        let mut scale = 0.0;
        let mut scale_x = 0.0;
        for &delta in deltas {
            let up = Complex64::new(x, delta);
            let down = Complex64::new(x, -delta);
            let yp = self.eval_y(up, Side::Off)?.matrix;
            let ym = self.eval_y(down, Side::Off)?.matrix;
            let xp = self.eval_x(up, Side::Off)?.matrix;
            let xm = self.eval_x(down, Side::Off)?.matrix;
            scale = max_abs(&yp);
            scale_x = max_abs(&xp);
            let r = &yp - &ym * &jy;
            raw.push(max_abs(&r));
            dy.push(r);
            dx.push(&xp - &xm * &jx);
        }
        let extrapolated = max_abs(&richardson(&dy, deltas));
        let extrapolated_x = max_abs(&richardson(&dx, deltas));
        let passed = extrapolated < 1e-6 * scale && extrapolated_x < 1e-6 * scale_x;
        Ok(JumpReport {
            x,
            deltas: deltas.to_vec(),
            raw_residuals: raw,
            extrapolated,
            extrapolated_x,
            scale,
            scale_x,
            passed,
        })
    }

    /// `‖Y(z) diag(z^{-n}, z^{m}) - I‖` and `‖X(z) diag(z^{n}, z^{-m}) - I‖`
    /// along `z = c + iR`.
    pub fn asymptotics(&self, radii: &[f64]) -> Result<AsymptoticReport> {
        let (p, q) = (self.p(), self.q());
        let n = self.pair().n.parts();
        let m = self.pair().m.parts();
        let mut errors_y = Vec::with_capacity(radii.len());
        let mut errors_x = Vec::with_capacity(radii.len());
        for &r in radii {
            let z = Complex64::new(self.basis().center, r);
            let log_z = z.ln();
            let power = |e: f64| (log_z * e).exp();
            let y = self.eval_y(z, Side::Off)?.matrix;
            let x = self.eval_x(z, Side::Off)?.matrix;
            let mut ey = 0.0f64;
            let mut ex = 0.0f64;
            for row in 0..p + q {
                for col in 0..p + q {
                    let (dy, dx) = if col < p {
                        (power(-(n[col] as f64)), power(n[col] as f64))
                    } else {
                        (power(m[col - p] as f64), power(-(m[col - p] as f64)))
                    };
                    let id = if row == col { 1.0 } else { 0.0 };
                    ey = ey.max((y[(row, col)] * dy - id).norm());
                    ex = ex.max((x[(row, col)] * dx - id).norm());
                }
            }
            errors_y.push(ey);
            errors_x.push(ex);
        }
        Ok(AsymptoticReport {
            radii: radii.to_vec(),
            ratios_y: ratios(&errors_y),
            ratios_x: ratios(&errors_x),
            errors_y,
            errors_x,
        })
    }

    /// Complex kernel value from the row/column identities; the imaginary
    /// part is a roundoff diagnostic.
    pub fn kernel_complex(&self, x: f64, y: f64) -> Result<Complex64> {
        let gap = (x - y).abs();
        let threshold = self.data.diagonal_threshold();
        if gap <= threshold {
            return Err(Error::DiagonalRegion { gap, threshold });
        }
        let (p, q) = (self.p(), self.q());
        let d = &self.data;
        let zx = Complex64::new(x, 0.0);
        let zy = Complex64::new(y, 0.0);
        let w1x = d.w1().eval_all(x);
        let w2y = d.w2().eval_all(y);
        let mut total = Complex64::new(0.0, 0.0);
        for r in 0..p + q {
            // [0, w2(y)] · X₊(y)ᵗ, component r
            let left: Complex64 = (0..q)
                .map(|l| {
                    let entry = if r < p {
                        two_pi_i() * d.type1_swapped[r].poly_complex(l, zy)
                    } else {
                        d.type2_swapped[r - p].poly_complex(l, zy)
                    };
                    entry * w2y[l]
                })
                .sum();
            // Y₊(x) [w1(x), 0]ᵗ, component r
            let right: Complex64 = (0..p)
                .map(|l| {
                    let entry = if r < p {
                        d.type2_forward[r].poly_complex(l, zx)
                    } else {
                        -two_pi_i() * d.type1_forward[r - p].poly_complex(l, zx)
                    };
                    entry * w1x[l]
                })
                .sum();
            total += left * right;
        }
        Ok(total / (two_pi_i() * (x - y)))
    }

    /// Real kernel value through `Y`.
    pub fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.kernel_complex(x, y)?.re)
    }
}

/// Third-route kernel evaluation.
pub fn kernel_rh(problem: &RhProblem, x: f64, y: f64) -> Result<f64> {
    problem.kernel(x, y)
}

/// Polynomial extrapolation to `δ = 0` through every sampled offset (Neville).
fn richardson(d: &[DMatrix<Complex64>], deltas: &[f64]) -> DMatrix<Complex64> {
    let mut out = d[0].map(|_| Complex64::new(0.0, 0.0));
    for (i, (di, &hi)) in d.iter().zip(deltas).enumerate() {
        let weight: f64 = deltas
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &hj)| hj / (hj - hi))
            .product();
        out += di * Complex64::new(weight, 0.0);
    }
    out
}

/// `∫_lo^hi f(x) / (x - z) dx`. Within `near` of the axis the pole is removed
/// by subtracting `f(Re z)` and adding the logarithmic integral back.
pub fn cauchy_transform(
    f: impl Fn(f64) -> f64 + Sync,
    df: impl Fn(f64) -> f64 + Sync,
    (lo, hi): (f64, f64),
    z: Complex64,
    side: Side,
    near: f64,
) -> Result<(Complex64, f64)> {
    let x0 = z.re;
    let inside = x0 > lo && x0 < hi;
    let check = |i: crate::quadrature::Integral<Complex64>| -> Result<(Complex64, f64)> {
        let target = CAUCHY_REL_TOL * i.magnitude;
        if !i.converged && i.error > 1e3 * target {
            return Err(Error::Accuracy {
                context: format!("Cauchy transform at z = {z}"),
                achieved: i.error,
                requested: target,
            });
        }
        Ok((i.value, i.error))
    };
    // real points inside the support always take the subtraction route
    if !inside || (z.im != 0.0 && z.im.abs() >= near) {
        let g = |x: f64| Complex64::new(f(x), 0.0) / (x - z);
        return check(integrate_adaptive(g, lo, hi, 32, 0.0, CAUCHY_REL_TOL, CAUCHY_MAX_PANELS));
    }
    let f0 = f(x0);
    let g = |x: f64| {
        if x == x0 && z.im == 0.0 {
            Complex64::new(df(x0), 0.0)
        } else {
            Complex64::new(f(x) - f0, 0.0) / (x - z)
        }
    };
    let (v1, e1) = check(integrate_adaptive(g, lo, x0, 16, 0.0, CAUCHY_REL_TOL, CAUCHY_MAX_PANELS))?;
    let (v2, e2) = check(integrate_adaptive(g, x0, hi, 16, 0.0, CAUCHY_REL_TOL, CAUCHY_MAX_PANELS))?;
    let log_term = if z.im == 0.0 {
        Complex64::new(((hi - x0) / (x0 - lo)).ln(), side.sign() * PI)
    } else {
        (Complex64::new(hi, 0.0) - z).ln() - (Complex64::new(lo, 0.0) - z).ln()
    };
    Ok((v1 + v2 + log_term * f0, e1 + e2))
}

/// `∫ P(u) g(x) / (x - z) dx` in closed form through the Faddeeva function,
/// where `P` has ascending coefficients in `u = (x - c)/s`. Boundary values on
/// the real axis follow `side` (Plemelj: principal value `± iπ` density).
pub fn gaussian_cauchy(g: &Gaussian, poly: &[f64], basis: &Basis, z: Complex64, side: Side) -> Complex64 {
    let s = basis.scale;
    let mu = (g.center - basis.center) / s;
    let h = (2.0 * g.variance).sqrt() / s;
    let zeta = ((z - basis.center) / s - mu) / h;
    // P(mu + h t) = Σ b_k t^k
    let deg = poly.len();
    let mut b = vec![0.0; deg];
    for (i, &c) in poly.iter().enumerate() {
        let mut binom = 1.0;
        for (k, bk) in b.iter_mut().enumerate().take(i + 1) {
            *bk += c * binom * mu.powi((i - k) as i32) * h.powi(k as i32);
            binom = binom * (i - k) as f64 / (k + 1) as f64;
        }
    }
    let upper = zeta.im > 0.0 || (zeta.im == 0.0 && side != Side::BoundaryMinus);
    let mut hk = if upper {
        Complex64::new(0.0, PI) * zeta.w()
    } else {
        Complex64::new(0.0, -PI) * (-zeta).w()
    };
    let mut total = hk * b.first().copied().unwrap_or(0.0);
    for (k, bk) in b.iter().enumerate().skip(1) {
        hk = zeta * hk + gaussian_moment(k - 1);
        total += hk * *bk;
    }
    total * g.amplitude
}

/// `∫ t^j e^{-t²} dt`.
fn gaussian_moment(j: usize) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    // Γ((j+1)/2) = (j-1)!! √π / 2^{j/2}
    let mut v = PI.sqrt();
    let mut k = 1;
    while k < j {
        v *= k as f64 / 2.0;
        k += 2;
    }
    v
}

/// Closed-form `Y` entry of the Cauchy columns for all-Gaussian families,
/// used to cross-check the quadrature route.
pub fn gaussian_cauchy_of_form(form: &MixedMopSolution, w: &Gaussian, z: Complex64, side: Side) -> Option<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for (j, wj) in form.family().iter().enumerate() {
        let gj = wj.as_gaussian()?;
        total += gaussian_cauchy(&gj.product(w), &form.coefficients[j], &form.basis, z, side);
    }
    Some(total)
}

/// Summary of the RH certification used by reports.
#[derive(Debug, Clone, Serialize)]
pub struct RhVerification {
    pub det_residuals: Vec<PointResidual>,
    pub x_y_consistency: Vec<PointResidual>,
    pub jump_residuals: Vec<JumpReport>,
    pub asymptotic_ratios: AsymptoticReport,
    pub kernel_imaginary_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointResidual {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

impl RhProblem {
    /// Runs every RH check at the given complex and real sample points.
    pub fn verify(&self, complex_points: &[Complex64], real_points: &[f64], radii: &[f64]) -> Result<RhVerification> {
        let mut det_residuals = Vec::new();
        let mut x_y_consistency = Vec::new();
        for &z in complex_points {
            let y = self.eval_y(z, Side::Off)?;
            let x = self.eval_x(z, Side::Off)?;
            let det = (y.determinant() - 1.0).norm();
            let prod = x.matrix.transpose() * &y.matrix - DMatrix::identity(self.size(), self.size());
            det_residuals.push(PointResidual { re: z.re, im: z.im, residual: det });
            x_y_consistency.push(PointResidual { re: z.re, im: z.im, residual: max_abs(&prod) });
        }
        let jump_residuals = real_points
            .iter()
            .map(|&x| self.verify_jump(x, &DEFAULT_DELTAS))
            .collect::<Result<Vec<_>>>()?;
        let mut kernel_imaginary_max = 0.0f64;
        for &x in real_points {
            for &y in real_points {
                if let Ok(v) = self.kernel_complex(x, y) {
                    kernel_imaginary_max = kernel_imaginary_max.max(v.im.abs());
                }
            }
        }
        Ok(RhVerification {
            det_residuals,
            x_y_consistency,
            jump_residuals,
            asymptotic_ratios: self.asymptotics(radii)?,
            kernel_imaginary_max,
        })
    }
}

/// `(row, col, re, im)` CSV dump of a matrix, 1-based indices.
pub fn matrix_csv(m: &DMatrix<Complex64>) -> String {
    let mut out = String::from("row,col,re,im\n");
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            out.push_str(&format!("{},{},{:.16e},{:.16e}\n", r + 1, c + 1, v.re, v.im));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_biorthogonal;

    fn std_problem() -> RhProblem {
        let w = WeightFamily::gaussians(&[(0.0, 1.0, 1.0)]).unwrap();
        let pair = MultiIndexPair::from_parts(&[1], &[1]).unwrap();
        let sys: MomentSystem = MomentSystem::with_basis(w.clone(), w, Basis::identity(), pair.required_order()).unwrap();
        RhProblem::new(&pair, &sys).unwrap()
    }

    fn mixed_problem() -> (RhProblem, crate::kernel::BiorthogonalSystem) {
        let w1 = WeightFamily::gaussians(&[(-1.0, 0.3, 1.0), (1.0, 0.3, 0.8)]).unwrap();
        let w2 = WeightFamily::gaussians(&[(-0.6, 0.25, 1.2), (0.7, 0.25, 1.0)]).unwrap();
        let pair = MultiIndexPair::from_parts(&[2, 1], &[1, 2]).unwrap();
        let sys: MomentSystem = MomentSystem::for_pair(w1, w2, &pair).unwrap();
        (RhProblem::new(&pair, &sys).unwrap(), build_biorthogonal(&pair, &sys).unwrap())
    }

    #[test]
    fn rank_one_example() {
        let rh = std_problem();
        let z = Complex64::new(0.0, 2.0);
        let y = rh.eval_y(z, Side::Off).unwrap();
        assert_eq!(y.matrix.shape(), (2, 2));
        assert!((y.matrix[(0, 0)] - z).norm() < 1e-14);
        assert!((y.determinant() - 1.0).norm() < 1e-8);
        assert!(rh.xy_consistency(Complex64::new(1.0, 1.0)).unwrap() < 1e-10);
    }

    #[test]
    fn gaussian_cauchy_matches_quadrature() {
        let g = Gaussian::new(0.3, 0.4, 1.1).unwrap();
        let basis = Basis { center: 0.1, scale: 0.8 };
        let poly = [0.5, -1.0, 0.25];
        let pv = |x: f64| {
            let u = basis.to_local(x);
            (poly[0] + poly[1] * u + poly[2] * u * u) * g.eval(x)
        };
        let dpv = |x: f64| {
            let u = basis.to_local(x);
            (poly[1] + 2.0 * poly[2] * u) / basis.scale * g.eval(x) + pv(x) / g.eval(x) * g.derivative(x)
        };
        for (z, side) in [
            (Complex64::new(0.2, 1.0), Side::Off),
            (Complex64::new(-0.4, -0.01), Side::Off),
            (Complex64::new(0.5, 0.0), Side::BoundaryPlus),
            (Complex64::new(0.5, 0.0), Side::BoundaryMinus),
        ] {
            let exact = gaussian_cauchy(&g, &poly, &basis, z, side);
            let (quad, _) = cauchy_transform(pv, dpv, (-6.0, 6.0), z, side, 0.05).unwrap();
            assert!((exact - quad).norm() < 1e-11, "{z} {side:?}: {exact} vs {quad}");
        }
    }

    #[test]
    fn jump_condition_holds() {
        let rh = std_problem();
        let report = rh.verify_jump(0.0, &DEFAULT_DELTAS).unwrap();
        assert!(report.passed, "{report:?}");
        let j = rh.jump(0.3);
        assert!((j.value.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_pair_certification() {
        let (rh, bio) = mixed_problem();
        for z in [Complex64::new(0.3, 0.5), Complex64::new(-1.0, -0.2), Complex64::new(2.0, 1.0)] {
            assert!(rh.det_residual(z).unwrap() < 1e-9);
            assert!(rh.xy_consistency(z).unwrap() < 1e-9);
        }
        for x in [-0.8, 0.1, 1.2] {
            let report = rh.verify_jump(x, &DEFAULT_DELTAS).unwrap();
            assert!(report.passed, "{report:?}");
        }
        for (x, y) in [(-1.0, 0.5), (0.2, 1.1)] {
            let k = rh.kernel_complex(x, y).unwrap();
            assert!(k.im.abs() < 1e-10);
            assert!((k.re - bio.kernel(x, y)).abs() < 1e-9);
            assert!((k.re - rh.data().kernel(x, y).unwrap()).abs() < 1e-12);
        }
        let asym = rh.asymptotics(&[10.0, 20.0, 40.0]).unwrap();
        assert!(asym.min_ratio() >= 1.8, "{asym:?}");
    }

    #[test]
    fn plemelj_boundary_matches_limit() {
        let (rh, _) = mixed_problem();
        let x = 0.4;
        let plus = rh.eval_y(Complex64::new(x, 0.0), Side::BoundaryPlus).unwrap().matrix;
        let near = rh.eval_y(Complex64::new(x, 1e-7), Side::Off).unwrap().matrix;
        let p = rh.p();
        let diff = (plus - near).columns(p, rh.q()).into_owned();
        assert!(max_abs(&diff) < 1e-5);
        let d = rh.data();
        let w = d.w2().get(0).as_gaussian().unwrap();
        let exact = gaussian_cauchy_of_form(&d.type1_forward[0], w, Complex64::new(x, 0.0), Side::BoundaryMinus).unwrap();
        let (quad, _) = rh.cauchy(&d.type1_forward[0], d.w2().get(0), Complex64::new(x, 0.0), Side::BoundaryMinus).unwrap();
        assert!((exact - quad).norm() < 1e-10 * (1.0 + exact.norm()));
    }
}
