//! The projection kernel of a balanced pair `|n| = |m|`.
//!
//! `F_n` is spanned by `u^i w1_l` (`i < n_l`) and `G_m` by `u^j w2_k`
//! (`j < m_k`). With the mixed Gram matrix `B_ab = ∫ f_a g_b` and `C = B^{-1}`,
//! `φ = C f` and `ψ = g` are biorthonormal and `K(x, y) = Σ_j φ_j(x) ψ_j(y)`.
//!
//! The same kernel also follows from `2(p + q)` neighboring mixed-type forms
//! through the Christoffel-Darboux sum, evaluated here off the diagonal and,
//! on it, through the derivative of the numerator.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Orientation, Result};
use crate::linalg::{Matrix, Svd};
use crate::mop::{
    check_normality, solve_mixed, MixedMopSolution, MomentSystem, MultiIndexPair, Normalization,
    PairRelation,
};
use crate::quadrature::{integrate_adaptive, Integral, QuadratureRule};
use crate::real::Real;
use crate::weights::{Basis, WeightFamily};

/// Which construction produced a kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Biorthogonal,
    ChristoffelDarboux,
    RiemannHilbert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub route: Route,
}

/// Half-width of the diagonal band, in basis spreads, where the CD quotient is not used.
pub const DIAGONAL_BAND: f64 = 1e-4;

/// Standard deviations covered by the integration interval of kernel quadratures.
const SUPPORT_SDS: f64 = 12.0;

fn require_balanced(pair: &MultiIndexPair) -> Result<()> {
    if pair.relation != PairRelation::RhBalanced {
        return Err(Error::InvalidInput(format!("pair {pair} is not balanced (|n| = |m|)")));
    }
    Ok(())
}

/// Raw bases of `F_n`, `G_m`, their Gram matrix and its inverse.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    pub pair: MultiIndexPair,
    /// `B_ab = ∫ f_a g_b`.
    pub gram: Matrix<f64>,
    /// `C` with `C B = I`.
    pub transform: Matrix<f64>,
    /// `(weight index, power)` of each `f_a`.
    pub f_basis: Vec<(usize, usize)>,
    /// `(weight index, power)` of each `g_b`.
    pub g_basis: Vec<(usize, usize)>,
    pub basis: Basis,
    /// Condition number of the equilibrated Gram matrix.
    pub condition: f64,
    w1: WeightFamily,
    w2: WeightFamily,
}

/// Biorthogonal system with the natural `(weight, power)` ordering.
pub fn build_biorthogonal<T: Real>(
    pair: &MultiIndexPair,
    sys: &MomentSystem<T>,
) -> Result<BiorthogonalSystem> {
    let f = pair.n.flat_indices();
    let g = pair.m.flat_indices();
    build_biorthogonal_with_bases(pair, sys, f, g)
}

/// Biorthogonal system with caller-chosen orderings of the raw bases.
pub fn build_biorthogonal_with_bases<T: Real>(
    pair: &MultiIndexPair,
    sys: &MomentSystem<T>,
    f_basis: Vec<(usize, usize)>,
    g_basis: Vec<(usize, usize)>,
) -> Result<BiorthogonalSystem> {
    require_balanced(pair)?;
    let dim = pair.n.size();
    let mut fs = f_basis.clone();
    let mut gs = g_basis.clone();
    fs.sort_unstable();
    gs.sort_unstable();
    if fs != pair.n.flat_indices() || gs != pair.m.flat_indices() {
        return Err(Error::InvalidInput(format!(
            "basis orderings must be permutations of the raw bases of {pair}"
        )));
    }
    let table = sys.table();
    let mut b = Matrix::<T>::zeros(dim, dim);
    for (a, &(l, i)) in f_basis.iter().enumerate() {
        for (c, &(k, j)) in g_basis.iter().enumerate() {
            b[(a, c)] = table.get(l, k, i + j)?;
        }
    }
    let degenerate = || Error::DegeneratePair {
        pair: pair.to_string(),
        report: Box::new(check_normality(pair, sys)),
    };
    let svd = Svd::new(&b.equilibrated());
    if svd.rank(T::RANK_TOLERANCE) < dim {
        return Err(degenerate());
    }
    let c = b.scaled_inverse().ok_or_else(degenerate)?;
    Ok(BiorthogonalSystem {
        pair: pair.clone(),
        gram: b.to_f64(),
        transform: c.to_f64(),
        f_basis,
        g_basis,
        basis: *sys.basis(),
        condition: svd.condition(T::RANK_TOLERANCE).lower(),
        w1: sys.w1().clone(),
        w2: sys.w2().clone(),
    })
}

impl BiorthogonalSystem {
    pub fn dim(&self) -> usize {
        self.f_basis.len()
    }

    pub fn w1(&self) -> &WeightFamily {
        &self.w1
    }

    pub fn w2(&self) -> &WeightFamily {
        &self.w2
    }

    fn basis_values(&self, x: f64, family: &WeightFamily, idx: &[(usize, usize)]) -> Vec<f64> {
        let u = self.basis.to_local(x);
        let w = family.eval_all(x);
        idx.iter().map(|&(l, i)| u.powi(i as i32) * w[l]).collect()
    }

    /// Raw `f_a(x)`.
    pub fn f_values(&self, x: f64) -> Vec<f64> {
        self.basis_values(x, &self.w1, &self.f_basis)
    }

    /// Raw `g_b(y)`, which are also the `ψ_b`.
    pub fn g_values(&self, y: f64) -> Vec<f64> {
        self.basis_values(y, &self.w2, &self.g_basis)
    }

    /// `φ(x) = C f(x)`.
    pub fn phi_values(&self, x: f64) -> Vec<f64> {
        self.transform.mul_vec(&self.f_values(x))
    }

    /// `K(x, y) = Σ_j φ_j(x) ψ_j(y)`; valid on the diagonal.
    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        f64::dot(&self.phi_values(x), &self.g_values(y))
    }

    /// Kernel on a tensor grid; `out[i][j] = K(xs[i], ys[j])`.
    pub fn kernel_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
        let gs: Vec<Vec<f64>> = ys.iter().map(|&y| self.g_values(y)).collect();
        xs.par_iter()
            .map(|&x| {
                let phi = self.phi_values(x);
                gs.iter().map(|g| f64::dot(&phi, g)).collect()
            })
            .collect()
    }

    /// Interval carrying all the weights to `SUPPORT_SDS` standard deviations.
    pub fn support(&self) -> (f64, f64) {
        let (a1, b1) = self.w1.effective_interval(SUPPORT_SDS);
        let (a2, b2) = self.w2.effective_interval(SUPPORT_SDS);
        (a1.min(a2), b1.max(b2))
    }

    /// `∫ K(x, x) dx` by adaptive quadrature.
    pub fn trace(&self) -> Integral<f64> {
        let (lo, hi) = self.support();
        integrate_adaptive(|x| self.kernel(x, x), lo, hi, 32, 1e-14, 1e-14, 20_000)
    }

    /// `max |∫ K(x, z) K(z, y) dz - K(x, y)|` over the grid, with the
    /// quadrature error estimate from two rule resolutions.
    pub fn idempotence_residual(&self, xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let (lo, hi) = self.support();
        let fine = QuadratureRule::composite_legendre(lo, hi, 96, 20);
        let coarse = QuadratureRule::composite_legendre(lo, hi, 64, 20);
        let phis: Vec<Vec<f64>> = xs.iter().map(|&x| self.phi_values(x)).collect();
        let gs: Vec<Vec<f64>> = ys.iter().map(|&y| self.g_values(y)).collect();
        let compose = |rule: &QuadratureRule| -> Vec<Vec<f64>> {
            let nodes: Vec<(f64, Vec<f64>, Vec<f64>)> = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&z, &w)| (w, self.g_values(z), self.phi_values(z)))
                .collect();
            phis.par_iter()
                .map(|phi| {
                    let left: Vec<f64> = nodes.iter().map(|(w, gz, _)| w * f64::dot(phi, gz)).collect();
                    gs.iter()
                        .map(|gy| {
                            nodes
                                .iter()
                                .zip(&left)
                                .map(|((_, _, pz), l)| l * f64::dot(pz, gy))
                                .sum()
                        })
                        .collect()
                })
                .collect()
        };
        let a = compose(&fine);
        let b = compose(&coarse);
        let mut residual = 0.0f64;
        let mut quad_err = 0.0f64;
        for (i, phi) in phis.iter().enumerate() {
            for (j, gy) in gs.iter().enumerate() {
                let k = f64::dot(phi, gy);
                residual = residual.max((a[i][j] - k).abs());
                quad_err = quad_err.max((a[i][j] - b[i][j]).abs());
            }
        }
        (residual, quad_err)
    }

    /// `max |∫ φ_j ψ_k - δ_jk|` by quadrature independent of the moment table.
    pub fn biorthogonality_defect(&self) -> f64 {
        let (lo, hi) = self.support();
        let rule = QuadratureRule::composite_legendre(lo, hi, 96, 20);
        let n = self.dim();
        let mut acc = Matrix::<f64>::zeros(n, n);
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let phi = self.phi_values(z);
            let g = self.g_values(z);
            for a in 0..n {
                for b in 0..n {
                    acc[(a, b)] += w * phi[a] * g[b];
                }
            }
        }
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc[(a, b)] - target).abs());
            }
        }
        worst
    }
}

/// `K(x, y)` through the biorthogonal bases.
pub fn kernel_direct(sys: &BiorthogonalSystem, x: f64, y: f64) -> f64 {
    sys.kernel(x, y)
}

/// The `2(p + q)` mixed-type forms entering the Christoffel-Darboux sum.
#[derive(Debug, Clone)]
pub struct CdKernelData {
    pub pair: MultiIndexPair,
    pub basis: Basis,
    /// `Q^{(II,j)}_{n+e_j, m}(·; w1, w2)`, `j < p`.
    pub type2_forward: Vec<MixedMopSolution>,
    /// `Q^{(I,j)}_{m, n-e_j}(·; w2, w1)`, `j < p`.
    pub type1_swapped: Vec<MixedMopSolution>,
    /// `Q^{(I,k)}_{n, m-e_k}(·; w1, w2)`, `k < q`.
    pub type1_forward: Vec<MixedMopSolution>,
    /// `Q^{(II,k)}_{m+e_k, n}(·; w2, w1)`, `k < q`.
    pub type2_swapped: Vec<MixedMopSolution>,
    w1: WeightFamily,
    w2: WeightFamily,
}

fn neighbor<T: Real>(
    orientation: Orientation,
    index: usize,
    pair: Result<MultiIndexPair>,
    sys: &MomentSystem<T>,
    normalization: Normalization,
) -> Result<MixedMopSolution> {
    pair.and_then(|p| solve_mixed(&p, sys, normalization))
        .map_err(|e| Error::Neighbor {
            orientation,
            index: index + 1,
            source: Box::new(e),
        })
}

/// Solves every neighboring form, in both orientations.
pub fn build_cd_data<T: Real>(pair: &MultiIndexPair, sys: &MomentSystem<T>) -> Result<CdKernelData> {
    require_balanced(pair)?;
    let (n, m) = (&pair.n, &pair.m);
    let swapped = sys.swapped();
    let mut type2_forward = Vec::with_capacity(pair.p());
    let mut type1_swapped = Vec::with_capacity(pair.p());
    for j in 0..pair.p() {
        type2_forward.push(neighbor(
            Orientation::Forward,
            j,
            MultiIndexPair::mop_defining(n.plus_unit(j), m.clone()),
            sys,
            Normalization::TypeII(j),
        )?);
        type1_swapped.push(neighbor(
            Orientation::Swapped,
            j,
            n.minus_unit(j).and_then(|nj| MultiIndexPair::mop_defining(m.clone(), nj)),
            &swapped,
            Normalization::TypeI(j),
        )?);
    }
    let mut type1_forward = Vec::with_capacity(pair.q());
    let mut type2_swapped = Vec::with_capacity(pair.q());
    for k in 0..pair.q() {
        type1_forward.push(neighbor(
            Orientation::Forward,
            k,
            m.minus_unit(k).and_then(|mk| MultiIndexPair::mop_defining(n.clone(), mk)),
            sys,
            Normalization::TypeI(k),
        )?);
        type2_swapped.push(neighbor(
            Orientation::Swapped,
            k,
            MultiIndexPair::mop_defining(m.plus_unit(k), n.clone()),
            &swapped,
            Normalization::TypeII(k),
        )?);
    }
    Ok(CdKernelData {
        pair: pair.clone(),
        basis: *sys.basis(),
        type2_forward,
        type1_swapped,
        type1_forward,
        type2_swapped,
        w1: sys.w1().clone(),
        w2: sys.w2().clone(),
    })
}

impl CdKernelData {
    pub fn w1(&self) -> &WeightFamily {
        &self.w1
    }

    pub fn w2(&self) -> &WeightFamily {
        &self.w2
    }

    pub fn solve_count(&self) -> usize {
        self.type2_forward.len() + self.type1_swapped.len() + self.type1_forward.len() + self.type2_swapped.len()
    }

    pub fn solutions(&self) -> impl Iterator<Item = &MixedMopSolution> {
        self.type2_forward
            .iter()
            .chain(&self.type1_swapped)
            .chain(&self.type1_forward)
            .chain(&self.type2_swapped)
    }

    pub fn max_residual(&self) -> f64 {
        self.solutions().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// `δ_diag`: the band `|x - y| ≤ δ_diag` is excluded from the quotient.
    pub fn diagonal_threshold(&self) -> f64 {
        DIAGONAL_BAND * self.basis.scale
    }

    /// `(x - y) K(x, y)`.
    pub fn numerator(&self, x: f64, y: f64) -> f64 {
        let first: f64 = self
            .type2_forward
            .iter()
            .zip(&self.type1_swapped)
            .map(|(a, b)| a.form(x) * b.form(y))
            .sum();
        let second: f64 = self
            .type1_forward
            .iter()
            .zip(&self.type2_swapped)
            .map(|(a, b)| a.form(x) * b.form(y))
            .sum();
        first - second
    }

    /// Off-diagonal kernel value.
    pub fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        let gap = (x - y).abs();
        let threshold = self.diagonal_threshold();
        if gap <= threshold {
            return Err(Error::DiagonalRegion { gap, threshold });
        }
        Ok(self.numerator(x, y) / (x - y))
    }

    /// `K(x, x)` as the `x`-derivative of the numerator at `y = x`.
    pub fn kernel_diagonal(&self, x: f64) -> f64 {
        let first: f64 = self
            .type2_forward
            .iter()
            .zip(&self.type1_swapped)
            .map(|(a, b)| a.form_derivative(x) * b.form(x))
            .sum();
        let second: f64 = self
            .type1_forward
            .iter()
            .zip(&self.type2_swapped)
            .map(|(a, b)| a.form_derivative(x) * b.form(x))
            .sum();
        first - second
    }

    /// Quotient off the band, derivative formula inside it.
    pub fn kernel_any(&self, x: f64, y: f64) -> f64 {
        self.kernel(x, y).unwrap_or_else(|_| self.kernel_diagonal(0.5 * (x + y)))
    }
}

/// Off-diagonal CD kernel; fails inside the diagonal band.
pub fn kernel_cd(data: &CdKernelData, x: f64, y: f64) -> Result<f64> {
    data.kernel(x, y)
}

/// Diagonal limit of the CD kernel.
pub fn kernel_cd_diagonal(data: &CdKernelData, x: f64) -> f64 {
    data.kernel_diagonal(x)
}

/// Evenly spaced points, endpoints included.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
