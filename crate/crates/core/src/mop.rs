//! Multiple orthogonal polynomials of mixed type.
//!
//! For weight families `w1` (length `p`) and `w2` (length `q`) and a pair of
//! multi-indices with `|n| = |m| + 1`, the linear form
//! `Q = Σ_j A_j w1_j` with `deg A_j ≤ n_j - 1` is determined up to a constant
//! by `∫ Q(x) x^i w2_k(x) dx = 0` for `i < m_k`. Polynomials are stored in the
//! shifted-scaled variable `u = (x - c) / s` of the moment system.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{FullPivLu, Matrix, Svd};
use crate::quadrature::QuadratureRule;
use crate::real::Real;
use crate::weights::{build_moment_table, Basis, ProductMomentTable, Weight, WeightFamily};

/// Vector of nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("a multi-index needs at least one component".into()));
        }
        Ok(MultiIndex(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|n|`.
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max_part(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn has_zero(&self) -> bool {
        self.0.contains(&0)
    }

    /// `n + e_k` (0-based `k`).
    pub fn plus_unit(&self, k: usize) -> MultiIndex {
        let mut parts = self.0.clone();
        parts[k] += 1;
        MultiIndex(parts)
    }

    /// `n - e_k` (0-based `k`); fails when the component is already zero.
    pub fn minus_unit(&self, k: usize) -> Result<MultiIndex> {
        let mut parts = self.0.clone();
        if parts[k] == 0 {
            return Err(Error::InvalidInput(format!("component {} of {self} is zero", k + 1)));
        }
        parts[k] -= 1;
        Ok(MultiIndex(parts))
    }

    /// Start offset of each block in the flattened `(block, power)` ordering.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.0
            .iter()
            .map(|&n| {
                let o = acc;
                acc += n;
                o
            })
            .collect()
    }

    /// `(block, power)` for every flattened position.
    pub fn flat_indices(&self) -> Vec<(usize, usize)> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(b, &n)| (0..n).map(move |i| (b, i)))
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRelation {
    /// `|n| = |m| + 1`: defines a mixed-type form.
    MopDefining,
    /// `|n| = |m|`: defines a kernel and a Riemann-Hilbert problem.
    RhBalanced,
}

/// Pair `(n, m)` of multi-indices with a checked size relation.
///
/// Balanced pairs must have positive components. Defining pairs need
/// positive components on the degree side `n` only; zeros on the constraint
/// side appear naturally as neighbors `m - e_k` of a balanced pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiIndexPair {
    pub n: MultiIndex,
    pub m: MultiIndex,
    pub relation: PairRelation,
}

impl MultiIndexPair {
    pub fn new(n: MultiIndex, m: MultiIndex) -> Result<Self> {
        let (sn, sm) = (n.size(), m.size());
        if sn == sm + 1 {
            Self::mop_defining(n, m)
        } else if sn == sm {
            Self::rh_balanced(n, m)
        } else {
            Err(Error::InvalidInput(format!(
                "pair n={n}, m={m} has |n| = {sn}, |m| = {sm}; need |n| = |m| or |n| = |m| + 1"
            )))
        }
    }

    pub fn from_parts(n: &[usize], m: &[usize]) -> Result<Self> {
        Self::new(MultiIndex::new(n.to_vec())?, MultiIndex::new(m.to_vec())?)
    }

    pub fn mop_defining(n: MultiIndex, m: MultiIndex) -> Result<Self> {
        if n.size() != m.size() + 1 {
            return Err(Error::InvalidInput(format!(
                "defining pair needs |n| = |m| + 1, got n={n}, m={m}"
            )));
        }
        if n.has_zero() {
            return Err(Error::InvalidInput(format!(
                "degree multi-index {n} has a zero component"
            )));
        }
        Ok(MultiIndexPair {
            n,
            m,
            relation: PairRelation::MopDefining,
        })
    }

    pub fn rh_balanced(n: MultiIndex, m: MultiIndex) -> Result<Self> {
        if n.size() != m.size() {
            return Err(Error::InvalidInput(format!(
                "balanced pair needs |n| = |m|, got n={n}, m={m}"
            )));
        }
        if n.has_zero() || m.has_zero() {
            return Err(Error::InvalidInput(format!(
                "balanced pair n={n}, m={m} has a zero component"
            )));
        }
        Ok(MultiIndexPair {
            n,
            m,
            relation: PairRelation::RhBalanced,
        })
    }

    pub fn p(&self) -> usize {
        self.n.len()
    }

    pub fn q(&self) -> usize {
        self.m.len()
    }

    /// Moment order that covers this pair, its `±e_k` neighbors and both orientations.
    pub fn required_order(&self) -> usize {
        self.n.max_part() + self.m.max_part() + 2
    }

    /// Roles of `n` and `m` exchanged (only meaningful with swapped weights).
    pub fn swapped(&self) -> Result<Self> {
        MultiIndexPair::new(self.m.clone(), self.n.clone())
    }
}

impl fmt::Display for MultiIndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, m={})", self.n, self.m)
    }
}

/// `{"n": [...], "m": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
}

impl PairConfig {
    pub fn pair(&self) -> Result<MultiIndexPair> {
        MultiIndexPair::from_parts(&self.n, &self.m)
    }
}

/// Which extra condition fixes the free constant. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `∫ Q(x) x^{m_k} w2_k(x) dx = 1`.
    TypeI(usize),
    /// `A_k` monic of degree `n_k - 1`.
    TypeII(usize),
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::TypeI(k) => write!(f, "type I (k = {})", k + 1),
            Normalization::TypeII(k) => write!(f, "type II (k = {})", k + 1),
        }
    }
}

impl Serialize for Normalization {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let (kind, k) = match *self {
            Normalization::TypeI(k) => ("type_i", k),
            Normalization::TypeII(k) => ("type_ii", k),
        };
        let mut st = s.serialize_struct("Normalization", 2)?;
        st.serialize_field("kind", kind)?;
        st.serialize_field("k", &(k + 1))?;
        st.end()
    }
}

/// Moment tables for a pair of weight families in a common monomial basis.
#[derive(Debug, Clone)]
pub struct MomentSystem<T: Real = f64> {
    w1: WeightFamily,
    w2: WeightFamily,
    basis: Basis,
    cross: ProductMomentTable<T>,
}

impl<T: Real> MomentSystem<T> {
    /// Fits the basis to both families and tabulates moments up to `max_order`.
    pub fn new(w1: WeightFamily, w2: WeightFamily, max_order: usize) -> Result<Self> {
        let basis = Basis::fit(&[&w1, &w2]);
        Self::with_basis(w1, w2, basis, max_order)
    }

    pub fn with_basis(w1: WeightFamily, w2: WeightFamily, basis: Basis, max_order: usize) -> Result<Self> {
        let cross = build_moment_table(&w1, &w2, &basis, max_order)?;
        Ok(MomentSystem { w1, w2, basis, cross })
    }

    /// Tables sized for `pair` and all of its neighbors.
    pub fn for_pair(w1: WeightFamily, w2: WeightFamily, pair: &MultiIndexPair) -> Result<Self> {
        check_lengths(pair, &w1, &w2)?;
        Self::new(w1, w2, pair.required_order())
    }

    pub fn w1(&self) -> &WeightFamily {
        &self.w1
    }

    pub fn w2(&self) -> &WeightFamily {
        &self.w2
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn table(&self) -> &ProductMomentTable<T> {
        &self.cross
    }

    /// The same data with the two families interchanged.
    pub fn swapped(&self) -> Self {
        MomentSystem {
            w1: self.w2.clone(),
            w2: self.w1.clone(),
            basis: self.basis,
            cross: self.cross.transposed(),
        }
    }
}

fn check_lengths(pair: &MultiIndexPair, w1: &WeightFamily, w2: &WeightFamily) -> Result<()> {
    if pair.p() != w1.len() || pair.q() != w2.len() {
        return Err(Error::InvalidInput(format!(
            "pair {pair} needs {} first and {} second weights, got {} and {}",
            pair.p(),
            pair.q(),
            w1.len(),
            w2.len()
        )));
    }
    Ok(())
}

/// Row `(k, j)`, column `(l, i)` holds `∫ u^{i+j} w1_l w2_k dx`.
fn orthogonality_matrix<T: Real>(
    n: &MultiIndex,
    m: &MultiIndex,
    table: &ProductMomentTable<T>,
) -> Result<Matrix<T>> {
    let cols = n.flat_indices();
    let rows = m.flat_indices();
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (r, &(k, j)) in rows.iter().enumerate() {
        for (c, &(l, i)) in cols.iter().enumerate() {
            out[(r, c)] = table.get(l, k, i + j)?;
        }
    }
    Ok(out)
}

/// The `|m| × |n|` system of orthogonality conditions in the shifted-scaled basis.
pub fn assemble_orthogonality_matrix<T: Real>(
    pair: &MultiIndexPair,
    table: &ProductMomentTable<T>,
) -> Result<Matrix<T>> {
    if pair.p() != table.p() || pair.q() != table.q() {
        return Err(Error::InvalidInput(format!(
            "pair {pair} does not match a {}x{} moment table",
            table.p(),
            table.q()
        )));
    }
    orthogonality_matrix(&pair.n, &pair.m, table)
}

/// Outcome of the numerical rank tests for a pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub pair: MultiIndexPair,
    /// The functions `u^i w1_l` are linearly independent.
    pub f_dimension_ok: bool,
    /// Dimension of the solution space of the orthogonality conditions.
    pub kernel_dimension: usize,
    #[serde(rename = "typeI_admissible")]
    pub type_i_admissible: Vec<bool>,
    #[serde(rename = "typeII_admissible")]
    pub type_ii_admissible: Vec<bool>,
    /// Ratio of extreme retained singular values of the equilibrated system.
    pub condition_estimate: f64,
    /// Singular values of the equilibrated system, descending.
    pub singular_values: Vec<f64>,
    pub rank_tolerance: f64,
}

impl NormalityReport {
    /// The forms span a space of full dimension and the kernel dimension is
    /// `|n| - |m|` (one for defining pairs, zero for balanced ones).
    pub fn is_normal(&self) -> bool {
        self.f_dimension_ok
            && self.kernel_dimension == self.pair.n.size().saturating_sub(self.pair.m.size())
    }

    pub fn all_admissible(&self) -> bool {
        self.type_i_admissible.iter().all(|&b| b) && self.type_ii_admissible.iter().all(|&b| b)
    }
}

fn numerical_rank<T: Real>(a: &Matrix<T>) -> (usize, Svd<T>) {
    let svd = Svd::new(&a.equilibrated());
    (svd.rank(T::RANK_TOLERANCE), svd)
}

fn has_full_column_rank<T: Real>(a: &Matrix<T>) -> bool {
    let cols = a.ncols();
    cols == 0 || (a.nrows() >= cols && numerical_rank(a).0 == cols)
}

/// Rank tests for the kernel dimension and the admissibility of each normalization.
pub fn check_normality<T: Real>(pair: &MultiIndexPair, sys: &MomentSystem<T>) -> NormalityReport {
    let (n, m) = (&pair.n, &pair.m);
    let table = sys.table();
    let size_n = n.size();

    let main = orthogonality_matrix(n, m, table);
    let (kernel_dimension, condition_estimate, singular_values) = match &main {
        Ok(a) if a.nrows() == 0 => (size_n, 1.0, Vec::new()),
        Ok(a) => {
            let (rank, svd) = numerical_rank(a);
            let sv: Vec<f64> = svd.singular_values.iter().map(|s| s.lower()).collect();
            (size_n - rank, svd.condition(T::RANK_TOLERANCE).lower(), sv)
        }
        Err(_) => (size_n, f64::INFINITY, Vec::new()),
    };

    let type_i_admissible = (0..pair.q())
        .map(|k| {
            orthogonality_matrix(n, &m.plus_unit(k), table)
                .map(|a| has_full_column_rank(&a))
                .unwrap_or(false)
        })
        .collect();
    let type_ii_admissible = (0..pair.p())
        .map(|k| match n.minus_unit(k) {
            Ok(reduced) => orthogonality_matrix(&reduced, m, table)
                .map(|a| has_full_column_rank(&a))
                .unwrap_or(false),
            Err(_) => false,
        })
        .collect();

    let f_dimension_ok = f_dimension(n, sys);

    NormalityReport {
        pair: pair.clone(),
        f_dimension_ok,
        kernel_dimension,
        type_i_admissible,
        type_ii_admissible,
        condition_estimate,
        singular_values,
        rank_tolerance: T::RANK_TOLERANCE,
    }
}

/// Gram rank of `{u^i w1_l}`; computed in double precision from a fresh table.
/// Panels of the sampling rule for the independence test.
const F_PANELS: usize = 48;

/// Independence of `u^i w1_l`, `i < n_l`, tested on the functions sampled at
/// quadrature nodes. The Gram matrix would square their condition number.
fn f_dimension<T: Real>(n: &MultiIndex, sys: &MomentSystem<T>) -> bool {
    let idx = n.flat_indices();
    let (lo, hi) = sys.w1().effective_interval(12.0);
    let rule = QuadratureRule::composite_legendre(lo, hi, F_PANELS, 8);
    let basis = sys.basis();
    let samples = Matrix::from_fn(rule.len(), idx.len(), |r, c| {
        let (l, i) = idx[c];
        let x = rule.nodes[r];
        rule.weights[r].sqrt() * basis.to_local(x).powi(i as i32) * sys.w1().get(l).eval(x)
    });
    numerical_rank(&samples).0 == idx.len()
}

/// A solved mixed-type form with its polynomial coefficients.
#[derive(Debug, Clone)]
pub struct MixedMopSolution {
    pub pair: MultiIndexPair,
    pub normalization: Normalization,
    /// `coefficients[j][i]` multiplies `u^i` in `A_j`.
    pub coefficients: Vec<Vec<f64>>,
    pub basis: Basis,
    /// Scale-normalized backward error of the normalized system.
    pub residual: f64,
    pub condition_estimate: f64,
    family: WeightFamily,
}

impl MixedMopSolution {
    pub fn p(&self) -> usize {
        self.coefficients.len()
    }

    /// The degree-side weights.
    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// `A_j(x)`.
    pub fn poly(&self, j: usize, x: f64) -> f64 {
        let u = self.basis.to_local(x);
        self.coefficients[j].iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// `A_j'(x)`.
    pub fn poly_derivative(&self, j: usize, x: f64) -> f64 {
        let u = self.basis.to_local(x);
        let c = &self.coefficients[j];
        let mut acc = 0.0;
        for i in (1..c.len()).rev() {
            acc = acc * u + i as f64 * c[i];
        }
        acc / self.basis.scale
    }

    /// `A_j(z)` at a complex point.
    pub fn poly_complex(&self, j: usize, z: Complex64) -> Complex64 {
        let u = (z - self.basis.center) / self.basis.scale;
        self.coefficients[j]
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }

    /// `Q(x) = Σ_j A_j(x) w1_j(x)`.
    pub fn form(&self, x: f64) -> f64 {
        self.family
            .iter()
            .enumerate()
            .map(|(j, w)| self.poly(j, x) * w.eval(x))
            .sum()
    }

    /// `Q'(x)`, using analytic weight derivatives.
    pub fn form_derivative(&self, x: f64) -> f64 {
        self.family
            .iter()
            .enumerate()
            .map(|(j, w)| self.poly_derivative(j, x) * w.eval(x) + self.poly(j, x) * w.derivative(x))
            .sum()
    }

    /// Coefficients of `A_j` in powers of the original variable `x`, ascending.
    pub fn original_coefficients(&self, j: usize) -> Vec<f64> {
        to_original_basis(&self.coefficients[j], &self.basis)
    }

    /// Leading coefficient of `A_j` in the original variable (degree `n_j - 1`).
    pub fn leading_coefficient(&self, j: usize) -> f64 {
        let c = &self.coefficients[j];
        match c.last() {
            Some(&a) => a / self.basis.scale.powi(c.len() as i32 - 1),
            None => 0.0,
        }
    }

    /// Same form with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in out.coefficients.iter_mut().flatten() {
            *c *= factor;
        }
        out
    }

    /// JSON-ready view with original-basis coefficients.
    pub fn export(&self) -> SolutionExport {
        SolutionExport {
            n: self.pair.n.parts().to_vec(),
            m: self.pair.m.parts().to_vec(),
            normalization: self.normalization,
            coefficients: (0..self.p()).map(|j| self.original_coefficients(j)).collect(),
            shifted_coefficients: self.coefficients.clone(),
            basis: self.basis,
            residual: self.residual,
            condition_estimate: self.condition_estimate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionExport {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub normalization: Normalization,
    /// Ascending powers of `x` for each `A_j`.
    pub coefficients: Vec<Vec<f64>>,
    /// Ascending powers of `(x - center) / scale`.
    pub shifted_coefficients: Vec<Vec<f64>>,
    pub basis: Basis,
    pub residual: f64,
    pub condition_estimate: f64,
}

/// Expands `Σ a_i ((x - c)/s)^i` into ascending powers of `x`.
pub fn to_original_basis(shifted: &[f64], basis: &Basis) -> Vec<f64> {
    let deg = shifted.len();
    let mut out = vec![0.0; deg];
    // Horner in polynomial arithmetic: acc <- acc * (x - c)/s + a_i.
    for &a in shifted.iter().rev() {
        let mut next = vec![0.0; deg];
        for (i, &v) in out.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            next[i] -= v * basis.center / basis.scale;
            if i + 1 < deg {
                next[i + 1] += v / basis.scale;
            }
        }
        next[0] += a;
        out = next;
    }
    out
}

/// Solves for the form of a defining pair under the given normalization.
pub fn solve_mixed<T: Real>(
    pair: &MultiIndexPair,
    sys: &MomentSystem<T>,
    normalization: Normalization,
) -> Result<MixedMopSolution> {
    if pair.relation != PairRelation::MopDefining {
        return Err(Error::InvalidInput(format!("pair {pair} is not a defining pair")));
    }
    check_lengths(pair, sys.w1(), sys.w2())?;
    let (n, m) = (&pair.n, &pair.m);
    let size_n = n.size();
    let scale = sys.basis().scale;

    let mut a = orthogonality_matrix(n, m, sys.table())?;
    let mut rhs = vec![T::zero(); m.size()];
    match normalization {
        Normalization::TypeI(k) => {
            if k >= pair.q() {
                return Err(Error::InvalidInput(format!("{normalization} out of range for {pair}")));
            }
            let row = n
                .flat_indices()
                .into_iter()
                .map(|(l, i)| sys.table().get(l, k, i + m.parts()[k]))
                .collect::<Result<Vec<_>>>()?;
            a.push_row(&row);
            rhs.push(T::lift(scale).powi(-(m.parts()[k] as i32)));
        }
        Normalization::TypeII(k) => {
            if k >= pair.p() {
                return Err(Error::InvalidInput(format!("{normalization} out of range for {pair}")));
            }
            let mut row = vec![T::zero(); size_n];
            row[n.offsets()[k] + n.parts()[k] - 1] = T::one();
            a.push_row(&row);
            rhs.push(T::lift(scale).powi(n.parts()[k] as i32 - 1));
        }
    }

    let not_normalizable = || Error::NotNormalizable {
        pair: pair.to_string(),
        normalization,
        report: Box::new(check_normality(pair, sys)),
    };

    let (rank, svd) = numerical_rank(&a);
    if rank < size_n {
        return Err(not_normalizable());
    }
    let condition_estimate = svd.condition(T::RANK_TOLERANCE).lower();

    // Column scaling keeps the LU pivots comparable across weight blocks.
    let col_scale: Vec<T> = (0..size_n)
        .map(|c| {
            let norm = (0..a.nrows()).fold(T::zero(), |acc, r| acc.max(a[(r, c)].abs()));
            if norm > T::zero() {
                T::one() / norm
            } else {
                T::one()
            }
        })
        .collect();
    let scaled = Matrix::from_fn(size_n, size_n, |r, c| a[(r, c)] * col_scale[c]);
    let lu = FullPivLu::new(&scaled);
    let y = lu.solve(&rhs).ok_or_else(not_normalizable)?;
    let mut x: Vec<T> = y.iter().zip(&col_scale).map(|(&v, &s)| v * s).collect();
    if let Normalization::TypeII(k) = normalization {
        // Enforce the monic condition exactly.
        x[n.offsets()[k] + n.parts()[k] - 1] = rhs[size_n - 1];
    }

    let residual = backward_error(&a, &x, &rhs);
    let offsets = n.offsets();
    let coefficients = n
        .parts()
        .iter()
        .zip(&offsets)
        .map(|(&len, &off)| x[off..off + len].iter().map(|v| v.lower()).collect())
        .collect();
    Ok(MixedMopSolution {
        pair: pair.clone(),
        normalization,
        coefficients,
        basis: *sys.basis(),
        residual,
        condition_estimate,
        family: sys.w1().clone(),
    })
}

/// `max_i |(Ax - b)_i| / (Σ_j |a_ij x_j| + |b_i|)`.
pub(crate) fn backward_error<T: Real>(a: &Matrix<T>, x: &[T], b: &[T]) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..a.nrows() {
        let row = a.row(r);
        let ax = T::dot(row, x);
        let mag = row
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (&aij, &xj)| acc + (aij * xj).abs())
            + b[r].abs();
        if mag > T::zero() {
            worst = worst.max(((ax - b[r]).abs() / mag).lower());
        }
    }
    worst
}

/// Truncation half-width, in basis spreads, for the constant weight of the classical reductions.
pub const CLASSICAL_TRUNCATION: f64 = 12.0;

fn truncated_lebesgue(basis: &Basis) -> Result<WeightFamily> {
    let half = CLASSICAL_TRUNCATION * basis.scale;
    WeightFamily::new(vec![Weight::truncated_constant(basis.center - half, basis.center + half)?])
}

/// Type I form `Q = Σ A_j w_j` with `∫ Q x^i dx = 0` for `i < |n| - 1` and
/// `∫ Q x^{|n|-1} dx = 1`, via the mixed solver against a truncated constant.
pub fn solve_type1_classical(weights: &WeightFamily, n: &MultiIndex) -> Result<MixedMopSolution> {
    if weights.len() != n.len() {
        return Err(Error::InvalidInput(format!(
            "multi-index {n} needs {} weights, got {}",
            n.len(),
            weights.len()
        )));
    }
    if n.size() == 0 {
        return Err(Error::InvalidInput("type I index must have positive size".into()));
    }
    let basis = Basis::fit(&[weights]);
    let lebesgue = truncated_lebesgue(&basis)?;
    let m = MultiIndex::new(vec![n.size() - 1])?;
    let pair = MultiIndexPair::mop_defining(n.clone(), m)?;
    let sys = MomentSystem::<f64>::with_basis(weights.clone(), lebesgue, basis, pair.required_order())?;
    solve_mixed(&pair, &sys, Normalization::TypeI(0))
}

/// Monic type II polynomial of degree `|m|` with `∫ P x^i w_k dx = 0` for
/// `i < m_k`; returned as a mixed solution with a single polynomial block.
pub fn solve_type2_classical(weights: &WeightFamily, m: &MultiIndex) -> Result<MixedMopSolution> {
    if weights.len() != m.len() {
        return Err(Error::InvalidInput(format!(
            "multi-index {m} needs {} weights, got {}",
            m.len(),
            weights.len()
        )));
    }
    let basis = Basis::fit(&[weights]);
    let lebesgue = truncated_lebesgue(&basis)?;
    let n = MultiIndex::new(vec![m.size() + 1])?;
    let pair = MultiIndexPair::mop_defining(n, m.clone())?;
    let sys = MomentSystem::<f64>::with_basis(lebesgue, weights.clone(), basis, pair.required_order())?;
    solve_mixed(&pair, &sys, Normalization::TypeII(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use crate::real::DoubleDouble;
    use std::f64::consts::PI;

    fn gauss_family(specs: &[(f64, f64)]) -> WeightFamily {
        WeightFamily::gaussians(&specs.iter().map(|&(c, v)| (c, v, 1.0)).collect::<Vec<_>>()).unwrap()
    }

    fn std_system(pair: &MultiIndexPair) -> MomentSystem {
        let w = gauss_family(&[(0.0, 1.0)]);
        MomentSystem::with_basis(w.clone(), w, Basis::identity(), pair.required_order()).unwrap()
    }

    #[test]
    fn pair_validation() {
        assert!(MultiIndexPair::from_parts(&[2], &[1]).is_ok());
        assert!(MultiIndexPair::from_parts(&[1, 1], &[1, 1]).is_ok());
        assert!(MultiIndexPair::from_parts(&[2], &[2, 1]).is_err());
        assert!(MultiIndexPair::from_parts(&[1, 0], &[1]).is_err());
        assert!(MultiIndexPair::from_parts(&[1], &[1, 0]).is_err());
        // Zero on the constraint side of a defining pair is allowed.
        assert!(MultiIndexPair::from_parts(&[2, 1], &[2, 0]).is_ok());
        assert!(MultiIndex::new(vec![]).is_err());
        assert_eq!(MultiIndex::new(vec![2, 1]).unwrap().to_string(), "(2,1)");
    }

    #[test]
    fn orthogonality_matrix_examples() {
        let pair = MultiIndexPair::from_parts(&[2], &[1]).unwrap();
        let sys = std_system(&pair);
        let a = assemble_orthogonality_matrix(&pair, sys.table()).unwrap();
        assert_eq!(a.shape(), (1, 2));
        assert!((a[(0, 0)] - PI.sqrt()).abs() < 1e-15);
        assert_eq!(a[(0, 1)], 0.0);

        let w1 = gauss_family(&[(-1.0, 1.0), (1.0, 1.0)]);
        let w2 = gauss_family(&[(0.0, 1.0)]);
        let pair = MultiIndexPair::from_parts(&[1, 1], &[1]).unwrap();
        let sys = MomentSystem::<f64>::with_basis(w1, w2, Basis::identity(), 4).unwrap();
        let a = assemble_orthogonality_matrix(&pair, sys.table()).unwrap();
        let cross = integrate_adaptive(
            |x| (-(x + 1.0) * (x + 1.0) / 2.0 - x * x / 2.0).exp(),
            -20.0,
            20.0,
            8,
            1e-15,
            0.0,
            500,
        )
        .value;
        assert!((a[(0, 0)] - cross).abs() < 1e-13);
        assert!((a[(0, 1)] - cross).abs() < 1e-13);
    }

    #[test]
    fn solve_examples() {
        let pair = MultiIndexPair::from_parts(&[2], &[1]).unwrap();
        let sys = std_system(&pair);
        let sol = solve_mixed(&pair, &sys, Normalization::TypeII(0)).unwrap();
        assert!(sol.coefficients[0][0].abs() < 1e-15);
        assert_eq!(sol.coefficients[0][1], 1.0);

        let pair = MultiIndexPair::from_parts(&[1], &[0]).unwrap();
        let sys = std_system(&pair);
        let sol = solve_mixed(&pair, &sys, Normalization::TypeII(0)).unwrap();
        assert_eq!(sol.coefficients, vec![vec![1.0]]);
    }

    #[test]
    fn null_space_oracle_agrees() {
        let w1 = gauss_family(&[(-1.0, 0.6), (1.0, 0.6)]);
        let w2 = gauss_family(&[(-0.5, 0.5), (0.5, 0.5)]);
        let pair = MultiIndexPair::from_parts(&[2, 2], &[2, 1]).unwrap();
        let sys = MomentSystem::<f64>::for_pair(w1, w2, &pair).unwrap();
        let sol = solve_mixed(&pair, &sys, Normalization::TypeII(1)).unwrap();
        assert!(sol.residual < 1e-10);
        let a = assemble_orthogonality_matrix(&pair, sys.table()).unwrap();
        let null = Svd::new(&a).null_vector();
        let flat: Vec<f64> = sol.coefficients.iter().flatten().copied().collect();
        let cos = flat.iter().zip(&null).map(|(a, b)| a * b).sum::<f64>()
            / (flat.iter().map(|a| a * a).sum::<f64>().sqrt()
                * null.iter().map(|a| a * a).sum::<f64>().sqrt());
        assert!(1.0 - cos.abs() < 1e-12);
        // Leading coefficient of A_2 is one in the original variable.
        assert!((sol.leading_coefficient(1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn classical_examples() {
        let w = gauss_family(&[(0.0, 0.5)]);
        let n = MultiIndex::new(vec![1]).unwrap();
        let q = solve_type1_classical(&w, &n).unwrap();
        assert!((q.coefficients[0][0] - 1.0 / PI.sqrt()).abs() < 1e-12);

        let p1 = solve_type2_classical(&w, &MultiIndex::new(vec![1]).unwrap()).unwrap();
        let c = p1.original_coefficients(0);
        assert!(c[0].abs() < 1e-13 && (c[1] - 1.0).abs() < 1e-14);
        let p2 = solve_type2_classical(&w, &MultiIndex::new(vec![2]).unwrap()).unwrap();
        let c = p2.original_coefficients(0);
        assert!((c[0] + 0.5).abs() < 1e-12 && c[1].abs() < 1e-12 && (c[2] - 1.0).abs() < 1e-14);

        let dup = gauss_family(&[(0.0, 0.5), (0.0, 0.5)]);
        let err = solve_type2_classical(&dup, &MultiIndex::new(vec![1, 1]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotNormalizable { .. }));
    }

    #[test]
    fn type1_classical_even_weight_parity() {
        let w = gauss_family(&[(0.0, 0.7)]);
        let q = solve_type1_classical(&w, &MultiIndex::new(vec![2]).unwrap()).unwrap();
        // ∫ Q dx = 0 with an even weight kills the constant term.
        assert!(q.coefficients[0][0].abs() < 1e-12);
        assert!(q.coefficients[0][1].abs() > 0.1);
    }

    #[test]
    fn normality_reports() {
        let pair = MultiIndexPair::from_parts(&[2], &[1]).unwrap();
        let r = check_normality(&pair, &std_system(&pair));
        assert!(r.is_normal() && r.all_admissible() && r.f_dimension_ok);

        let w1 = gauss_family(&[(0.0, 1.0)]);
        let w2 = gauss_family(&[(0.3, 0.5), (0.3, 0.5)]);
        let pair = MultiIndexPair::from_parts(&[3], &[1, 1]).unwrap();
        let sys = MomentSystem::<f64>::for_pair(w1, w2, &pair).unwrap();
        let r = check_normality(&pair, &sys);
        assert!(r.kernel_dimension >= 2);
        assert!(!r.is_normal());
    }

    #[test]
    fn extended_precision_solves_match() {
        let w1 = gauss_family(&[(-1.0, 0.4), (0.8, 0.4)]);
        let w2 = gauss_family(&[(-0.3, 0.5), (1.2, 0.5)]);
        let pair = MultiIndexPair::from_parts(&[3, 2], &[2, 2]).unwrap();
        let d = solve_mixed(&pair, &MomentSystem::<f64>::for_pair(w1.clone(), w2.clone(), &pair).unwrap(), Normalization::TypeI(0)).unwrap();
        let e = solve_mixed(&pair, &MomentSystem::<DoubleDouble>::for_pair(w1, w2, &pair).unwrap(), Normalization::TypeI(0)).unwrap();
        for (a, b) in d.coefficients.iter().flatten().zip(e.coefficients.iter().flatten()) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        assert!(e.residual < 1e-25);
    }

    #[test]
    fn original_basis_conversion() {
        let basis = Basis { center: 1.5, scale: 2.0 };
        // ((x - 1.5)/2)^2 = x²/4 - 0.75x + 0.5625
        let c = to_original_basis(&[0.0, 0.0, 1.0], &basis);
        assert!((c[0] - 0.5625).abs() < 1e-15 && (c[1] + 0.75).abs() < 1e-15 && (c[2] - 0.25).abs() < 1e-15);
    }
}
