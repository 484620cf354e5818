//! Dense complex Hermitian linear algebra on mono- and bipartite systems.
//!
//! The composite basis convention is fixed once here: |i>|j> maps to flat
//! index `i * dim_b + j`. Partial trace, partial transpose, and the Kronecker
//! product all follow from it.
//!
//! [`HermitianOperator`] symmetrizes on construction, so every downstream
//! consumer may assume exact Hermiticity (entry (i,j) is the exact conjugate
//! of entry (j,i)); inputs deviating by more than [`HERMITICITY_LIMIT`] are
//! rejected instead of silently repaired.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Inputs whose Hermiticity deviation exceeds this are rejected outright.
pub const HERMITICITY_LIMIT: f64 = 1e-8;
/// Eigenvalues within this of zero are treated as exactly zero when a
/// spectrum is split into positive and nonpositive parts.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = ComplexMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }

    /// Builds from nested rows of (re, im) pairs; rows must be equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if r == 0 || c == 0 {
            return Err(Error::param("matrix", "empty matrix"));
        }
        let mut m = ComplexMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::dims(row.len(), c, "ragged rows"));
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn dagger(&self) -> Self {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Kronecker product; the left factor owns the slower index.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = ComplexMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, x * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{})", self.rows, self.cols)
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if j > 0 {
                    write!(f, "  ")?;
                }
                write!(f, "{:+.4}{:+.4}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = self.get(i, k);
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + x * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// Tensor factorization labels for a square operator on A (x) B.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BipartiteShape {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteShape {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::param("shape", "factor dimensions must be positive"));
        }
        Ok(BipartiteShape { dim_a, dim_b })
    }

    pub fn side(&self) -> usize {
        self.dim_a * self.dim_b
    }
}

impl fmt::Display for BipartiteShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.dim_a, self.dim_b)
    }
}

/// Which tensor factor an operation targets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Subsystem {
    A,
    B,
}

/// Square complex matrix guaranteed Hermitian, optionally carrying a
/// bipartite factorization of its side length.
#[derive(Clone, PartialEq, Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    shape: Option<BipartiteShape>,
}

impl HermitianOperator {
    /// Validates squareness and Hermiticity (within [`HERMITICITY_LIMIT`]
    /// relative to the largest entry), then symmetrizes to (H + H')/2.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::build(matrix, None)
    }

    pub fn with_shape(matrix: ComplexMatrix, shape: BipartiteShape) -> Result<Self> {
        Self::build(matrix, Some(shape))
    }

    fn build(matrix: ComplexMatrix, shape: Option<BipartiteShape>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if let Some(s) = shape {
            if s.side() != matrix.rows() {
                return Err(Error::ShapeMismatch {
                    dim_a: s.dim_a,
                    dim_b: s.dim_b,
                    side: matrix.rows(),
                });
            }
        }
        let n = matrix.rows();
        let mut deviation: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                deviation = deviation.max((matrix.get(i, j) - matrix.get(j, i).conj()).norm());
            }
        }
        let limit = HERMITICITY_LIMIT * (1.0 + matrix.max_abs());
        if deviation > limit {
            return Err(Error::NotHermitian { deviation, limit });
        }
        let symmetrized = ComplexMatrix::from_fn(n, n, |i, j| {
            (matrix.get(i, j) + matrix.get(j, i).conj()) * 0.5
        });
        Ok(HermitianOperator {
            matrix: symmetrized,
            shape,
        })
    }

    /// For matrices that are Hermitian by construction (exact conjugate
    /// entries); skips the deviation check and the symmetrization pass.
    pub(crate) fn trusted(matrix: ComplexMatrix, shape: Option<BipartiteShape>) -> Self {
        debug_assert!(matrix.is_square());
        debug_assert!(shape.map_or(true, |s| s.side() == matrix.rows()));
        HermitianOperator { matrix, shape }
    }

    pub fn identity(n: usize) -> Self {
        HermitianOperator::trusted(ComplexMatrix::identity(n), None)
    }

    pub fn zeros(n: usize) -> Self {
        HermitianOperator::trusted(ComplexMatrix::zeros(n, n), None)
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        HermitianOperator::trusted(ComplexMatrix::from_real_diag(diag), None)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn shape(&self) -> Option<BipartiteShape> {
        self.shape
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    /// Returns the same operator relabeled with (or stripped of) a shape.
    pub fn reshaped(&self, shape: Option<BipartiteShape>) -> Result<Self> {
        if let Some(s) = shape {
            if s.side() != self.dim() {
                return Err(Error::ShapeMismatch {
                    dim_a: s.dim_a,
                    dim_b: s.dim_b,
                    side: self.dim(),
                });
            }
        }
        Ok(HermitianOperator {
            matrix: self.matrix.clone(),
            shape,
        })
    }

    /// Trace; exactly real for Hermitian input.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Hilbert-Schmidt inner product Tr[X Y], real for Hermitian X, Y.
    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::dims(self.dim(), other.dim(), "hs_inner"));
        }
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let prod = self.matrix.get(i, j) * other.matrix.get(j, i);
                acc += prod.re;
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator {
            matrix: self.matrix.scale(s),
            shape: self.shape,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = hermitian_eig(self);
        *vals.last().expect("nonempty spectrum")
    }

    /// Largest eigenvalue.
    pub fn max_eigenvalue(&self) -> f64 {
        let (vals, _) = hermitian_eig(self);
        vals[0]
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix + &rhs.matrix,
            shape: self.shape.or(rhs.shape),
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix - &rhs.matrix,
            shape: self.shape.or(rhs.shape),
        }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

/// Kronecker product X (x) Y, shaped (dim X, dim Y).
pub fn tensor(x: &HermitianOperator, y: &HermitianOperator) -> HermitianOperator {
    let shape = BipartiteShape {
        dim_a: x.dim(),
        dim_b: y.dim(),
    };
    HermitianOperator::trusted(x.matrix().kron(y.matrix()), Some(shape))
}

/// Partial trace over the named factor; requires a shape.
pub fn partial_trace(x: &HermitianOperator, over: Subsystem) -> Result<HermitianOperator> {
    let shape = x.shape().ok_or(Error::MissingShape {
        context: "partial_trace",
    })?;
    Ok(HermitianOperator::trusted(
        partial_trace_raw(x.matrix(), shape, over),
        None,
    ))
}

/// Blockwise transpose on the named factor; requires a shape, keeps it.
pub fn partial_transpose(x: &HermitianOperator, on: Subsystem) -> Result<HermitianOperator> {
    let shape = x.shape().ok_or(Error::MissingShape {
        context: "partial_transpose",
    })?;
    Ok(HermitianOperator::trusted(
        partial_transpose_raw(x.matrix(), shape, on),
        Some(shape),
    ))
}

pub(crate) fn partial_trace_raw(
    m: &ComplexMatrix,
    shape: BipartiteShape,
    over: Subsystem,
) -> ComplexMatrix {
    let (da, db) = (shape.dim_a, shape.dim_b);
    debug_assert_eq!(m.rows(), da * db);
    match over {
        Subsystem::B => ComplexMatrix::from_fn(da, da, |i, ip| {
            (0..db).map(|j| m.get(i * db + j, ip * db + j)).sum()
        }),
        Subsystem::A => ComplexMatrix::from_fn(db, db, |j, jp| {
            (0..da).map(|i| m.get(i * db + j, i * db + jp)).sum()
        }),
    }
}

pub(crate) fn partial_transpose_raw(
    m: &ComplexMatrix,
    shape: BipartiteShape,
    on: Subsystem,
) -> ComplexMatrix {
    let (da, db) = (shape.dim_a, shape.dim_b);
    debug_assert_eq!(m.rows(), da * db);
    let n = da * db;
    ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (ip, jp) = (c / db, c % db);
        match on {
            Subsystem::B => m.get(i * db + jp, ip * db + j),
            Subsystem::A => m.get(ip * db + j, i * db + jp),
        }
    })
}

/// X tensored with the identity on a fresh right factor of dimension d.
pub(crate) fn kron_identity_right(m: &ComplexMatrix, d: usize) -> ComplexMatrix {
    m.kron(&ComplexMatrix::identity(d))
}

/// Spectral part of X supported on eigenvalues > [`ZERO_EIGENVALUE`].
///
/// The result is PSD and X minus the result is negative semidefinite.
pub fn positive_part(x: &HermitianOperator) -> HermitianOperator {
    let (vals, vecs) = hermitian_eig(x);
    let n = x.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= ZERO_EIGENVALUE {
            continue;
        }
        for i in 0..n {
            let vi = vecs.get(i, k);
            for j in 0..n {
                let v = out.get(i, j) + vi * vecs.get(j, k).conj() * lam;
                out.set(i, j, v);
            }
        }
    }
    // Accumulation noise is orders below the rejection limit, so this cannot
    // fail; the constructor restores exact Hermiticity.
    HermitianOperator::build(out, x.shape()).expect("spectral reconstruction stays Hermitian")
}

/// Full eigendecomposition; eigenvalues descending, eigenvectors as the
/// matching columns of the returned matrix.
pub fn hermitian_eig(x: &HermitianOperator) -> (Vec<f64>, ComplexMatrix) {
    let n = x.dim();
    let m = x.matrix.to_nalgebra();
    let mut eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        // The QL iteration underneath can break down (0/0 shifts) on highly
        // structured spectra with exact zero gaps, e.g. large rank-one
        // projectors. A graded diagonal perturbation far below every
        // tolerance in this crate splits the degeneracy and restores
        // convergence; by Weyl's inequality it moves eigenvalues by at most
        // its own magnitude.
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let mut magnitude = scale * 1e-13;
        while eig.eigenvalues.iter().any(|v| !v.is_finite()) && magnitude <= scale * 1e-9 {
            let mut perturbed = m.clone();
            for i in 0..n {
                perturbed[(i, i)] += Complex64::new(magnitude * (i + 1) as f64 / n as f64, 0.0);
            }
            eig = perturbed.symmetric_eigen();
            magnitude *= 1e2;
        }
    }
    let mut order: Vec<usize> = (0..x.dim()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = ComplexMatrix::from_fn(x.dim(), x.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Swap operator F = sum_ij |i><j| (x) |j><i| on C^d (x) C^d.
pub fn swap_operator(d: usize) -> HermitianOperator {
    assert!(d >= 1, "dimension must be positive");
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m.set(i * d + j, j * d + i, Complex64::new(1.0, 0.0));
        }
    }
    HermitianOperator::trusted(m, Some(BipartiteShape { dim_a: d, dim_b: d }))
}

/// Projectors onto the symmetric and antisymmetric subspaces of C^d (x) C^d.
pub fn sym_asym_projectors(d: usize) -> (HermitianOperator, HermitianOperator) {
    let f = swap_operator(d);
    let id = HermitianOperator::trusted(
        ComplexMatrix::identity(d * d),
        Some(BipartiteShape { dim_a: d, dim_b: d }),
    );
    let sym = (&id + &f).scale(0.5);
    let asym = (&id - &f).scale(0.5);
    (sym, asym)
}

/// Maximally entangled operator on C^d (x) C^d: the state Phi when
/// `normalized`, otherwise the rank-1 operator |Gamma><Gamma| of trace d.
pub fn max_entangled(d: usize, normalized: bool) -> HermitianOperator {
    assert!(d >= 1, "dimension must be positive");
    let weight = if normalized { 1.0 / d as f64 } else { 1.0 };
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m.set(i * d + i, j * d + j, Complex64::new(weight, 0.0));
        }
    }
    HermitianOperator::trusted(m, Some(BipartiteShape { dim_a: d, dim_b: d }))
}

/// Real symmetric embedding [[Re X, -Im X], [Im X, Re X]] of side 2n.
///
/// X is PSD exactly when the embedding is PSD; each eigenvalue of X shows up
/// twice in the embedding.
pub fn real_embedding(x: &HermitianOperator) -> DMatrix<f64> {
    embed_matrix(x.matrix())
}

pub(crate) fn embed_matrix(m: &ComplexMatrix) -> DMatrix<f64> {
    let n = m.rows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let re = r < n;
        let ce = c < n;
        let v = m.get(r % n, c % n);
        match (re, ce) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Inverse of [`embed_matrix`] for (approximately) structure-respecting
/// inputs; averages the redundant blocks.
pub(crate) fn extract_embedding(e: &DMatrix<f64>, n: usize) -> ComplexMatrix {
    debug_assert_eq!(e.nrows(), 2 * n);
    debug_assert_eq!(e.ncols(), 2 * n);
    ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            0.5 * (e[(i, j)] + e[(n + i, n + j)]),
            0.5 * (e[(n + i, j)] - e[(i, n + j)]),
        )
    })
}

mod json {
    //! Wire format: {"rows", "cols", "re", "im"} with nested row arrays,
    //! plus optional {"dim_a", "dim_b"} on shaped operators.

    use super::*;

    #[derive(Serialize, Deserialize)]
    pub(crate) struct OperatorJson {
        pub rows: usize,
        pub cols: usize,
        pub re: Vec<Vec<f64>>,
        pub im: Vec<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        pub dim_a: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        pub dim_b: Option<usize>,
    }

    impl OperatorJson {
        pub fn of_matrix(m: &ComplexMatrix, shape: Option<BipartiteShape>) -> Self {
            let re = (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m.get(i, j).re).collect())
                .collect();
            let im = (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m.get(i, j).im).collect())
                .collect();
            OperatorJson {
                rows: m.rows(),
                cols: m.cols(),
                re,
                im,
                dim_a: shape.map(|s| s.dim_a),
                dim_b: shape.map(|s| s.dim_b),
            }
        }

        pub fn into_matrix(self) -> std::result::Result<(ComplexMatrix, Option<BipartiteShape>), String> {
            if self.rows == 0 || self.cols == 0 {
                return Err("rows and cols must be positive".into());
            }
            for (name, part) in [("re", &self.re), ("im", &self.im)] {
                if part.len() != self.rows {
                    return Err(format!("field {name}: expected {} rows", self.rows));
                }
                if let Some(bad) = part.iter().position(|row| row.len() != self.cols) {
                    return Err(format!("field {name}: row {bad} has wrong length"));
                }
            }
            let m = ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
                Complex64::new(self.re[i][j], self.im[i][j])
            });
            let shape = match (self.dim_a, self.dim_b) {
                (None, None) => None,
                (Some(a), Some(b)) => {
                    Some(BipartiteShape::new(a, b).map_err(|e| e.to_string())?)
                }
                _ => return Err("dim_a and dim_b must be given together".into()),
            };
            Ok((m, shape))
        }
    }
}

pub(crate) use json::OperatorJson;

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson::of_matrix(self, None).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = OperatorJson::deserialize(deserializer)?;
        let (m, _) = raw.into_matrix().map_err(serde::de::Error::custom)?;
        Ok(m)
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson::of_matrix(&self.matrix, self.shape).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = OperatorJson::deserialize(deserializer)?;
        let (m, shape) = raw.into_matrix().map_err(serde::de::Error::custom)?;
        HermitianOperator::build(m, shape).map_err(serde::de::Error::custom)
    }
}
