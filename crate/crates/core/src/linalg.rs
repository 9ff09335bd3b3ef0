//! Dense complex linear algebra for states, POVM elements and operators.
//!
//! Matrices are immutable values. Storage is delegated to `nalgebra`, the
//! public surface speaks row-major, 0-based indices, and tensor factor 0 is
//! always the leftmost (Alice-first) factor.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max absolute entry deviation accepted by the Hermiticity predicate.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below `-PSD_TOL` make a matrix non-PSD.
pub const PSD_TOL: f64 = 1e-8;
/// Trace and completeness tolerance for densities and POVMs.
pub const NORMALIZATION_TOL: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
///
/// Sorting is stable, so among equal eigenvalues the solver's original order
/// is kept; callers that need "the" top eigenvector take index 0.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors, `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// Rank-one operator `|v><v|` (not normalized).
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub(crate) fn from_inner(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub(crate) fn inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        self.rows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_inner(self.inner.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_inner(self.inner.map(|z| z * factor))
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self::from_inner(&self.inner * factor)
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.inner.shape(), other.inner.shape());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_inner((&self.inner + self.inner.adjoint()) * C64::new(0.5, 0.0))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    fn hermitian_deviation(&self) -> f64 {
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermitian_deviation() <= HERMITIAN_TOL
    }

    pub fn is_psd(&self) -> bool {
        self.is_hermitian() && self.eigen_hermitian().map(|e| e.min() >= -PSD_TOL).unwrap_or(false)
    }

    pub fn is_density(&self) -> bool {
        self.is_psd() && (self.trace() - ONE).norm() <= NORMALIZATION_TOL
    }

    pub fn check_hermitian(&self) -> Result<()> {
        self.require_square()?;
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn check_psd(&self) -> Result<()> {
        self.check_hermitian()?;
        let min = self.eigen_hermitian()?.min();
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(())
    }

    pub fn check_density(&self) -> Result<()> {
        self.check_psd().map_err(|e| Error::NotDensity(e.to_string()))?;
        let tr = self.trace();
        if (tr - ONE).norm() > NORMALIZATION_TOL {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        Ok(())
    }

    /// Eigendecomposition of the Hermitian part of a square matrix.
    pub fn eigen_hermitian(&self) -> Result<HermitianEigen> {
        self.require_square()?;
        let herm = self.hermitian_part();
        let eig = SymmetricEigen::new(herm.inner);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();
        Ok(HermitianEigen { values, vectors })
    }

    /// Singular values in descending order, from the eigenvalues of `M†M`
    /// clipped at zero.
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = Self::from_inner(self.inner.adjoint() * &self.inner);
        gram.eigen_hermitian()
            .expect("Gram matrix is square")
            .values
            .into_iter()
            .map(|v| v.max(0.0).sqrt())
            .collect()
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        if self.is_hermitian() {
            let e = self.eigen_hermitian().expect("square");
            return e.values.iter().map(|v| v.abs()).sum();
        }
        self.singular_values().iter().sum()
    }

    /// Applies `f` to the eigenvalues of a Hermitian matrix.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eig = self.eigen_hermitian()?;
        Ok(eig.reconstruct(f))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_inner(self.inner.kronecker(&other.inner))
    }

    pub fn dagger_mul(&self, other: &Self) -> Self {
        Self::from_inner(self.inner.adjoint() * &other.inner)
    }

    /// `<v| M |v>`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let n = self.rows();
        let mut acc = ZERO;
        for i in 0..n {
            let row: C64 = v.iter().enumerate().map(|(j, &vj)| self.inner[(i, j)] * vj).sum();
            acc += v[i].conj() * row;
        }
        acc
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols(), other.rows());
        assert_eq!(self.rows(), other.cols());
        let mut acc = ZERO;
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.inner[(i, k)] * other.inner[(k, i)];
            }
        }
        acc
    }
}

impl HermitianEigen {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = v[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        ComplexMatrix::from_inner(out)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_inner(&self.inner * &rhs.inner)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_inner(&self.inner + &rhs.inner)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_inner(&self.inner - &rhs.inner)
    }
}

/// Sum of a non-empty list of equally shaped matrices.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    let mut iter = items.into_iter();
    let first = iter.next()?.inner.clone();
    Some(ComplexMatrix::from_inner(iter.fold(first, |acc, m| acc + &m.inner)))
}

/// Subsystem dimensions of a composite space, leftmost factor first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimensionList(Vec<usize>);

impl DimensionList {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(Error::Dimension(format!("invalid factor list {factors:?}")));
        }
        Ok(Self(factors))
    }

    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }
}

/// Largest singular value.
pub fn schatten_inf_norm(m: &ComplexMatrix) -> Result<f64> {
    m.require_square()?;
    if m.is_hermitian() {
        let e = m.eigen_hermitian()?;
        return Ok(e.max().abs().max(e.min().abs()));
    }
    Ok(m.singular_values()[0])
}

/// Operator norm of any (possibly rectangular) matrix.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    m.singular_values()[0]
}

/// PSD square root; eigenvalues in `[-PSD_TOL, 0)` are clipped to zero.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_hermitian()?;
    let eig = a.eigen_hermitian()?;
    if eig.min() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.reconstruct(|v| v.max(0.0).sqrt()))
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() || rho.cols() != sigma.cols() {
        return Err(Error::Dimension(format!(
            "trace distance between {}x{} and {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    rho.check_density()?;
    sigma.check_density()?;
    Ok(0.5 * (rho - sigma).trace_norm())
}

/// Kronecker product; factor `a` is the leftmost.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Left-to-right tensor product of a non-empty list.
pub fn tensor_all<'a>(items: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    let mut iter = items.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, m| acc.kron(m)))
}

/// Traces out every factor whose index is not in `keep`. Kept factors stay
/// in their original order.
pub fn partial_trace(m: &ComplexMatrix, dims: &DimensionList, keep: &[usize]) -> Result<ComplexMatrix> {
    m.require_square()?;
    if dims.total() != m.dim() {
        return Err(Error::Dimension(format!(
            "factors {:?} do not multiply to {}",
            dims.factors(),
            m.dim()
        )));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("no factor {bad} in {:?}", dims.factors())));
    }
    let factors = dims.factors();
    let kept: Vec<usize> = (0..factors.len()).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..factors.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dim: usize = kept.iter().map(|&i| factors[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| factors[i]).product();

    // strides of each factor in the full (row-major, leftmost most significant) index
    let mut strides = vec![1usize; factors.len()];
    for i in (0..factors.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * factors[i + 1];
    }
    let offsets = |group: &[usize], mut index: usize| -> usize {
        let mut full = 0;
        for &f in group.iter().rev() {
            full += (index % factors[f]) * strides[f];
            index /= factors[f];
        }
        full
    };
    let kept_off: Vec<usize> = (0..kept_dim).map(|k| offsets(&kept, k)).collect();
    let traced_off: Vec<usize> = (0..traced_dim).map(|t| offsets(&traced, t)).collect();

    let src = m.inner();
    Ok(ComplexMatrix::from_fn(kept_dim, kept_dim, |r, c| {
        traced_off
            .iter()
            .map(|&t| src[(kept_off[r] + t, kept_off[c] + t)])
            .sum()
    }))
}

/// `‖√A √B‖²`.
pub fn overlap_of_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    squared_product_norm(&sqrt_factor(a)?, &sqrt_factor(b)?)
}

/// `‖S_a S_b‖²` for precomputed square roots.
pub fn squared_product_norm(sa: &ComplexMatrix, sb: &ComplexMatrix) -> Result<f64> {
    let m = sa * sb;
    let gram = m.dagger_mul(&m).hermitian_part();
    let tr = gram.trace().re;
    let tr_sq = (&gram * &gram).trace().re;
    // rank one: the norm is the trace
    if (tr * tr - tr_sq).abs() <= 1e-14 * tr * tr.max(1.0) {
        return Ok(tr.max(0.0));
    }
    Ok(gram.eigen_hermitian()?.max().max(0.0))
}

/// PSD square root; projectors are returned as they are.
pub fn sqrt_factor(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = a.hermitian_part();
    if (&h * &h).max_abs_diff(&h) <= 1e-14 {
        Ok(h)
    } else {
        psd_sqrt(a)
    }
}

fn sqrt_product_norm(sa: &ComplexMatrix, sb: &ComplexMatrix) -> f64 {
    operator_norm(&(sa * sb))
}

/// The `N` cyclic shifts of `[N]`, `k ↦ (i ↦ i + k mod N)`.
pub fn cyclic_shifts(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|k| (0..n).map(|i| (i + k) % n).collect()).collect()
}

/// Checks that `perms` is a set of `n` pairwise orthogonal permutations of
/// `[n]`: every entry is a bijection and any two disagree at every point.
pub fn validate_orthogonal_permutations(perms: &[Vec<usize>], n: usize) -> Result<()> {
    if perms.len() != n {
        return Err(Error::InvalidPermutations(format!(
            "{} permutations for {n} operators",
            perms.len()
        )));
    }
    for (k, p) in perms.iter().enumerate() {
        let mut seen = vec![false; n];
        if p.len() != n {
            return Err(Error::InvalidPermutations(format!(
                "permutation {k} has length {}",
                p.len()
            )));
        }
        for &v in p {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutations(format!("entry {k} is not a bijection")));
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if let Some(i) = (0..n).find(|&i| perms[a][i] == perms[b][i]) {
                return Err(Error::InvalidPermutations(format!(
                    "permutations {a} and {b} agree at {i}"
                )));
            }
        }
    }
    Ok(())
}

/// Both sides of the sum bound `‖Σ A_i‖ ≤ Σ_k max_i ‖√A_i √A_{π^k(i)}‖`.
pub fn kittaneh_sum_bound(operators: &[ComplexMatrix], perms: &[Vec<usize>]) -> Result<(f64, f64)> {
    let n = operators.len();
    if n == 0 {
        return Err(Error::Dimension("empty operator list".into()));
    }
    let dim = operators[0].dim();
    if operators.iter().any(|a| !a.is_square() || a.dim() != dim) {
        return Err(Error::Dimension("operators must share one square shape".into()));
    }
    validate_orthogonal_permutations(perms, n)?;
    let roots = operators.iter().map(psd_sqrt).collect::<Result<Vec<_>>>()?;

    let total = sum(operators).expect("non-empty");
    let lhs = schatten_inf_norm(&total)?;
    let rhs = perms
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| sqrt_product_norm(&roots[i], &roots[p[i]]))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok((lhs, rhs))
}

/// Wire format: `{"rows", "cols", "re": [...], "im": [...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries();
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            re: entries.iter().map(|z| z.re).collect(),
            im: entries.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.re.len() != raw.im.len() {
            return Err(serde::de::Error::custom("re and im lengths differ"));
        }
        let entries = raw.re.iter().zip(&raw.im).map(|(&re, &im)| C64::new(re, im)).collect();
        ComplexMatrix::new(raw.rows, raw.cols, entries).map_err(serde::de::Error::custom)
    }
}
