//! Positive operator-valued measures.

use crate::error::{Error, Result};
use crate::linalg::{linear_combination, HermitianOperator};

/// Default tolerance for positivity and completeness.
pub const POVM_TOL: f64 = 1e-9;

/// An ordered list of measurement operators on a shared Hilbert space.
///
/// Construction only checks structure (shared dimension, one label per
/// element); positivity and completeness are checked by
/// [`validate_povm`] or enforced by [`Povm::validated`].
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
    labels: Vec<String>,
}

/// Outcome of [`validate_povm`].
#[derive(Debug, Clone, PartialEq)]
pub struct PovmReport {
    pub min_eigenvalue: f64,
    /// Max-norm of `Σ_α M_α − I`.
    pub completeness_residual: f64,
    pub tol: f64,
}

impl PovmReport {
    pub fn positive(&self) -> bool {
        self.min_eigenvalue >= -self.tol
    }

    pub fn complete(&self) -> bool {
        self.completeness_residual <= self.tol
    }

    pub fn passed(&self) -> bool {
        self.positive() && self.complete()
    }
}

impl Povm {
    pub fn new(elements: Vec<HermitianOperator>, labels: Vec<String>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm("a POVM needs at least one element".into()));
        };
        let dim = first.dim();
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        if labels.len() != elements.len() {
            return Err(Error::InvalidPovm(format!("{} labels for {} elements", labels.len(), elements.len())));
        }
        Ok(Self { elements, labels })
    }

    /// Elements labelled `0, 1, 2, …`.
    pub fn unlabeled(elements: Vec<HermitianOperator>) -> Result<Self> {
        let labels = (0..elements.len()).map(|k| k.to_string()).collect();
        Self::new(elements, labels)
    }

    /// Like [`Povm::new`] but rejects sets failing [`validate_povm`] at `tol`.
    pub fn validated(elements: Vec<HermitianOperator>, labels: Vec<String>, tol: f64) -> Result<Self> {
        let povm = Self::new(elements, labels)?;
        let report = validate_povm(&povm, tol);
        if !report.passed() {
            return Err(Error::InvalidPovm(format!(
                "min eigenvalue {:.3e}, completeness residual {:.3e} (tol {:.1e})",
                report.min_eigenvalue, report.completeness_residual, tol
            )));
        }
        Ok(povm)
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// Same outcomes with elements reordered so that outcome `k` of the
    /// result is outcome `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() || perm.iter().any(|&p| p >= self.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of the outcomes".into()));
        }
        Ok(Self {
            elements: perm.iter().map(|&p| self.elements[p].clone()).collect(),
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
        })
    }

    /// Pads with zero elements up to `len` outcomes.
    pub fn padded_to(&self, len: usize) -> Self {
        let mut out = self.clone();
        while out.elements.len() < len {
            out.elements.push(HermitianOperator::zeros(self.dim()));
            out.labels.push(String::new());
        }
        out
    }
}

pub fn validate_povm(povm: &Povm, tol: f64) -> PovmReport {
    let min_eigenvalue = povm.elements.iter().map(HermitianOperator::min_eigenvalue).fold(f64::INFINITY, f64::min);
    let ones = vec![1.0; povm.len()];
    let refs: Vec<&HermitianOperator> = povm.elements.iter().collect();
    let total = linear_combination(&ones, &refs);
    let completeness_residual = total.max_abs_diff(&HermitianOperator::identity(povm.dim()));
    PovmReport { min_eigenvalue, completeness_residual, tol }
}

/// `(1 − ε) M + ε N`, padding the shorter POVM with zero elements.
///
/// Outcome labels are merged position by position; where both POVMs label
/// an outcome differently the result carries `"m|n"`.
pub fn mix_povm(m: &Povm, n: &Povm, eps: f64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("mixing weight {eps} not in [0, 1]")));
    }
    if m.dim() != n.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: n.dim() });
    }
    let len = m.len().max(n.len());
    let (mp, np) = (m.padded_to(len), n.padded_to(len));
    let elements = mp.elements.iter().zip(&np.elements).map(|(a, b)| linear_combination(&[1.0 - eps, eps], &[a, b])).collect();
    let labels = mp
        .labels
        .iter()
        .zip(&np.labels)
        .map(|(a, b)| match (a.is_empty(), b.is_empty()) {
            (false, true) => a.clone(),
            (true, false) => b.clone(),
            _ if a == b => a.clone(),
            _ => format!("{a}|{b}"),
        })
        .collect();
    Povm::new(elements, labels)
}
