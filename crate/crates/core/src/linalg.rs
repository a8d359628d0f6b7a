//! Dense Hermitian and real-symmetric matrix primitives.
//!
//! Every quantum object in the crate (states, state derivatives, POVM
//! elements, SLDs, the `A` operators entering the susceptibility) is a
//! [`HermitianOperator`]. Parameter-space matrices (Fisher and QFI
//! matrices, their transformed versions) are [`RealSymmetricMatrix`].
//! Both are immutable after construction.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entry-wise asymmetry accepted (and symmetrized away) on construction,
/// relative to the largest entry magnitude when that exceeds one.
pub const HERMITICITY_TOL: f64 = 1e-12;

fn scale_of(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn hermitian_asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).scale(0.5)
}

/// Dense complex Hermitian matrix on a finite Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: DMatrix<Complex64>,
}

/// Eigendecomposition `H = V diag(values) V†` with eigenvalues sorted in
/// descending order and eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Validates Hermiticity and symmetrizes away rounding-level asymmetry.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidArgument(format!("operator must be square and non-empty, got {}x{}", m.nrows(), m.ncols())));
        }
        let asymmetry = hermitian_asymmetry(&m);
        if asymmetry > HERMITICITY_TOL * scale_of(&m) {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self { m: symmetrize(&m) })
    }

    /// Builds from a matrix that is Hermitian by construction (sums, products
    /// of the form `U A U†`, Kronecker products of Hermitian factors).
    pub(crate) fn from_hermitian_parts(m: DMatrix<Complex64>) -> Self {
        debug_assert!(hermitian_asymmetry(&m) <= 1e-8 * scale_of(&m));
        Self { m: symmetrize(&m) }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    /// Rank-one projector onto the normalized direction of `ket`.
    pub fn projector(ket: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(ket);
        let norm = v.norm();
        if ket.is_empty() || norm == 0.0 {
            return Err(Error::InvalidArgument("projector onto a zero vector".into()));
        }
        let v = v.unscale(norm);
        Ok(Self::from_hermitian_parts(&v * v.adjoint()))
    }

    /// Outer product `|a⟩⟨b| + |b⟩⟨a|` of two real vectors.
    pub(crate) fn real_symmetric_outer(a: &[f64], b: &[f64]) -> Self {
        let n = a.len();
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(a[i] * b[j] + b[i] * a[j], 0.0));
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `Tr[A B]`, real for Hermitian `A`, `B`.
    pub fn trace_product(&self, other: &HermitianOperator) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.m[(i, j)];
                let b = other.m[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { m: self.m.scale(factor) }
    }

    /// `U A U†` for an arbitrary square `U`.
    pub fn conjugated_by(&self, u: &DMatrix<Complex64>) -> Self {
        Self::from_hermitian_parts(u * &self.m * u.adjoint())
    }

    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eig(&self) -> HermitianEigen {
        let n = self.dim();
        let scale = self.max_abs();
        if scale == 0.0 {
            return HermitianEigen { values: vec![0.0; n], vectors: DMatrix::identity(n, n) };
        }
        // Entries far below the largest one underflow inside the Householder
        // reduction and poison the result with NaN. Dropping them moves the
        // spectrum by much less than round-off.
        let floor = scale * f64::EPSILON * f64::EPSILON;
        let normalized = self.m.map(|z| if z.norm() < floor { Complex64::new(0.0, 0.0) } else { z / scale });
        let eig = SymmetricEigen::new(normalized);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k] * scale).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        HermitianEigen { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).sum()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &HermitianOperator) -> Self {
        Self { m: self.m.kronecker(&other.m) }
    }

    /// Projector onto the eigenspace of strictly positive eigenvalues.
    pub fn positive_projector(&self) -> Self {
        let eig = self.eig();
        let n = self.dim();
        let mut p = DMatrix::<Complex64>::zeros(n, n);
        for (k, &lambda) in eig.values.iter().enumerate() {
            if lambda > 0.0 {
                let v = eig.vectors.column(k);
                p += v * v.adjoint();
            }
        }
        Self::from_hermitian_parts(p)
    }
}

impl HermitianEigen {
    /// `V diag(values) V†`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(self.values.len(), self.values.iter().map(|&x| Complex64::new(x, 0.0))));
        &self.vectors * d * self.vectors.adjoint()
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scaled(rhs)
    }
}

/// Sum of `weights[i] * ops[i]`.
pub fn linear_combination(weights: &[f64], ops: &[&HermitianOperator]) -> HermitianOperator {
    assert_eq!(weights.len(), ops.len());
    assert!(!ops.is_empty());
    let mut m = DMatrix::<Complex64>::zeros(ops[0].dim(), ops[0].dim());
    for (w, op) in weights.iter().zip(ops) {
        if *w != 0.0 {
            m += op.m.scale(*w);
        }
    }
    HermitianOperator { m }
}

pub fn eig_hermitian(h: &HermitianOperator) -> HermitianEigen {
    h.eig()
}

pub fn trace_norm(h: &HermitianOperator) -> f64 {
    h.trace_norm()
}

pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    a.tensor(b)
}

pub fn psd_check(h: &HermitianOperator, tol: f64) -> bool {
    h.is_psd(tol)
}

/// Real symmetric `P×P` matrix over parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricMatrix {
    m: DMatrix<f64>,
}

impl RealSymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidArgument(format!("matrix must be square and non-empty, got {}x{}", m.nrows(), m.ncols())));
        }
        let scale = m.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let asymmetry = (&m - m.transpose()).amax();
        if asymmetry > HERMITICITY_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        Self { m: (&m + m.transpose()).scale(0.5) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// Eigenvalues (descending) and orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.m.clone());
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigen().0.last().expect("non-empty matrix")
    }

    /// Ratio of largest to smallest absolute eigenvalue (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        let (values, _) = self.eigen();
        let max = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let min = values.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        if min == 0.0 || !min.is_finite() {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Inverse through the eigendecomposition; `None` when the condition
    /// number exceeds `max_condition` or the matrix is not positive definite.
    pub fn inverse_pd(&self, max_condition: f64) -> Option<RealSymmetricMatrix> {
        let (values, vectors) = self.eigen();
        let max = values[0];
        let min = *values.last().unwrap();
        if !(min > 0.0) || max / min > max_condition {
            return None;
        }
        let inv_diag = DMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|x| 1.0 / x)));
        Some(Self::symmetrized(&vectors * inv_diag * vectors.transpose()))
    }

    pub fn scaled(&self, factor: f64) -> RealSymmetricMatrix {
        Self { m: self.m.scale(factor) }
    }

    /// `J · self · Jᵀ`.
    pub fn congruence(&self, j: &DMatrix<f64>) -> RealSymmetricMatrix {
        Self::symmetrized(j * &self.m * j.transpose())
    }

    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.m[(i, j)]);
            }
        }
        out
    }
}

impl Sub for &RealSymmetricMatrix {
    type Output = RealSymmetricMatrix;
    fn sub(self, rhs: &RealSymmetricMatrix) -> RealSymmetricMatrix {
        RealSymmetricMatrix { m: &self.m - &rhs.m }
    }
}
