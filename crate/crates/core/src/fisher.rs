//! Classical Fisher information of a measurement, quantum Fisher
//! information through symmetric logarithmic derivatives, and the
//! optimality ratios built from the two.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, RealSymmetricMatrix};
use crate::model::{ParamPoint, StatisticalModel};
use crate::povm::Povm;

/// Outcomes with `p(α|θ)` below this are dropped when their score
/// numerators vanish as well.
pub const DEFAULT_P_CUTOFF: f64 = 1e-12;
/// Eigenvalue-pair sums `λ_i + λ_j` below this are treated as kernel.
pub const DEFAULT_SLD_CUTOFF: f64 = 1e-10;
/// Fisher matrices above this condition number are refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Outcome statistics of a POVM at one parameter point.
#[derive(Debug, Clone)]
pub struct FisherBundle {
    probabilities: Vec<f64>,
    kept: Vec<usize>,
    /// `scores[i][j] = l_{kept[i], j}`.
    scores: Vec<Vec<f64>>,
    fisher: RealSymmetricMatrix,
    num_outcomes: usize,
}

impl FisherBundle {
    /// Builds the bundle from a state, its derivatives and a POVM.
    ///
    /// An outcome whose probability is below `p_cutoff` is dropped when
    /// every `|Tr[∂_j ρ M_α]| ≤ √p_cutoff`; otherwise its contribution is
    /// divergent and the call fails.
    pub fn from_operators(rho: &HermitianOperator, derivatives: &[HermitianOperator], povm: &Povm, p_cutoff: f64) -> Result<Self> {
        if povm.dim() != rho.dim() {
            return Err(Error::DimensionMismatch { expected: rho.dim(), found: povm.dim() });
        }
        if derivatives.is_empty() {
            return Err(Error::InvalidArgument("model has no parameters".into()));
        }
        let p = derivatives.len();
        let probabilities: Vec<f64> = povm.elements().iter().map(|m| rho.trace_product(m)).collect();
        let mut kept = Vec::new();
        let mut scores = Vec::new();
        for (alpha, (m, &prob)) in povm.elements().iter().zip(&probabilities).enumerate() {
            let numerators: Vec<f64> = derivatives.iter().map(|d| d.trace_product(m)).collect();
            if prob < p_cutoff {
                let worst = numerators.iter().map(|x| x.abs()).fold(0.0, f64::max);
                if worst > p_cutoff.sqrt() {
                    return Err(Error::SingularScore { outcome: alpha, probability: prob, derivative: worst });
                }
                continue;
            }
            kept.push(alpha);
            scores.push(numerators.iter().map(|n| n / prob).collect::<Vec<f64>>());
        }
        let mut f = DMatrix::<f64>::zeros(p, p);
        for (&alpha, l) in kept.iter().zip(&scores) {
            let prob = probabilities[alpha];
            for j in 0..p {
                for k in 0..p {
                    f[(j, k)] += prob * l[j] * l[k];
                }
            }
        }
        Ok(Self { probabilities, kept, scores, fisher: RealSymmetricMatrix::symmetrized(f), num_outcomes: povm.len() })
    }

    /// `p(α|θ)` for every outcome, dropped ones included.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Indices of outcomes that contribute to the Fisher information.
    pub fn kept_outcomes(&self) -> &[usize] {
        &self.kept
    }

    /// Scores `l_{α,j}` per kept outcome (same order as `kept_outcomes`).
    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn fisher(&self) -> &RealSymmetricMatrix {
        &self.fisher
    }

    pub fn num_params(&self) -> usize {
        self.fisher.dim()
    }

    pub fn num_outcomes(&self) -> usize {
        self.num_outcomes
    }

    /// `F⁻¹`, refusing singular or ill-conditioned matrices.
    pub fn inverse_fisher(&self) -> Result<RealSymmetricMatrix> {
        invert_fisher(&self.fisher)
    }
}

pub(crate) fn invert_fisher(f: &RealSymmetricMatrix) -> Result<RealSymmetricMatrix> {
    f.inverse_pd(MAX_CONDITION).ok_or_else(|| Error::SingularFisher { condition_number: f.condition_number() })
}

pub fn fisher_bundle(model: &StatisticalModel, theta: &ParamPoint, povm: &Povm, p_cutoff: f64) -> Result<FisherBundle> {
    let rho = model.state_at(theta)?;
    let derivatives = model.derivatives_at(theta)?;
    FisherBundle::from_operators(&rho, &derivatives, povm, p_cutoff)
}

/// Symmetric logarithmic derivative solving `2∂ρ = Lρ + ρL`.
///
/// Entries are built in the eigenbasis of `ρ`; pairs with
/// `λ_i + λ_j ≤ cutoff` are set to zero.
pub fn sld(rho: &HermitianOperator, drho: &HermitianOperator, cutoff: f64) -> HermitianOperator {
    let eig = rho.eig();
    let v = &eig.vectors;
    let d = v.adjoint() * drho.matrix() * v;
    let n = rho.dim();
    let l = DMatrix::from_fn(n, n, |i, j| {
        let s = eig.values[i] + eig.values[j];
        if s > cutoff {
            d[(i, j)] * (2.0 / s)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    HermitianOperator::from_hermitian_parts(v * l * v.adjoint())
}

/// Max-norm of `2∂ρ − (Lρ + ρL)`.
pub fn sld_residual(rho: &HermitianOperator, drho: &HermitianOperator, l: &HermitianOperator) -> f64 {
    let (r, dr, lm) = (rho.matrix(), drho.matrix(), l.matrix());
    (dr.scale(2.0) - (lm * r + r * lm)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct QfiBundle {
    slds: Vec<HermitianOperator>,
    qfi: RealSymmetricMatrix,
    eigen_cutoff: f64,
}

impl QfiBundle {
    pub fn from_operators(rho: &HermitianOperator, derivatives: &[HermitianOperator], cutoff: f64) -> Self {
        let slds: Vec<HermitianOperator> = derivatives.iter().map(|d| sld(rho, d, cutoff)).collect();
        let p = slds.len();
        // Q_jk = Re Tr[ρ L_j L_k]
        let products: Vec<DMatrix<Complex64>> = slds.iter().map(|l| rho.matrix() * l.matrix()).collect();
        let q = DMatrix::from_fn(p, p, |j, k| {
            let a = &products[j];
            let b = slds[k].matrix();
            let n = a.nrows();
            let mut acc = 0.0;
            for r in 0..n {
                for c in 0..n {
                    acc += (a[(r, c)] * b[(c, r)]).re;
                }
            }
            acc
        });
        Self { slds, qfi: RealSymmetricMatrix::symmetrized(q), eigen_cutoff: cutoff }
    }

    pub fn slds(&self) -> &[HermitianOperator] {
        &self.slds
    }

    pub fn qfi(&self) -> &RealSymmetricMatrix {
        &self.qfi
    }

    pub fn eigen_cutoff(&self) -> f64 {
        self.eigen_cutoff
    }
}

pub fn qfi_matrix(model: &StatisticalModel, theta: &ParamPoint, cutoff: f64) -> Result<QfiBundle> {
    let rho = model.state_at(theta)?;
    let derivatives = model.derivatives_at(theta)?;
    Ok(QfiBundle::from_operators(&rho, &derivatives, cutoff))
}

/// `|Im Tr[ρ [L_j, L_k]]|`; zero when the pair is weakly commuting.
pub fn weak_commutativity(rho: &HermitianOperator, lj: &HermitianOperator, lk: &HermitianOperator) -> f64 {
    let (r, a, b) = (rho.matrix(), lj.matrix(), lk.matrix());
    let commutator = a * b - b * a;
    let prod = r * commutator;
    prod.trace().im.abs()
}

/// `m · tr[F⁻¹] / tr[Q⁻¹]`.
pub fn r_metric(f: &RealSymmetricMatrix, q: &RealSymmetricMatrix, copies: usize) -> Result<f64> {
    let (fi, qi) = inverses(f, q)?;
    Ok(copies as f64 * fi.trace() / qi.trace())
}

/// `(F⁻¹)_jj / (Q⁻¹)_jj`: precision on parameter `j` with the others as nuisance.
pub fn r_nuisance(f: &RealSymmetricMatrix, q: &RealSymmetricMatrix, j: usize) -> Result<f64> {
    if j >= f.dim() {
        return Err(Error::InvalidArgument(format!("parameter index {j} out of range")));
    }
    let (fi, qi) = inverses(f, q)?;
    Ok(fi.get(j, j) / qi.get(j, j))
}

fn inverses(f: &RealSymmetricMatrix, q: &RealSymmetricMatrix) -> Result<(RealSymmetricMatrix, RealSymmetricMatrix)> {
    if f.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: q.dim() });
    }
    let fi = invert_fisher(f)?;
    let qi = q.inverse_pd(MAX_CONDITION).ok_or_else(|| Error::SingularQfi { condition_number: q.condition_number() })?;
    Ok((fi, qi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sld_of_maximally_mixed_qubit_is_twice_derivative() {
        let rho = HermitianOperator::identity(2).scaled(0.5);
        let d = HermitianOperator::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(0.3, 0.0),
            (1, 1) => c(-0.3, 0.0),
            (0, 1) => c(0.1, 0.4),
            _ => c(0.1, -0.4),
        })
        .unwrap();
        let l = sld(&rho, &d, DEFAULT_SLD_CUTOFF);
        assert!(l.max_abs_diff(&d.scaled(2.0)) < 1e-14);
    }

    #[test]
    fn pure_state_qfi_matches_overlap_formula() {
        // |ψ(t)⟩ = (cos t, e^{it} sin t) at t = 0.4; oracle 4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²).
        let t: f64 = 0.4;
        let psi = [c(t.cos(), 0.0), Complex64::from_polar(t.sin(), t)];
        let dpsi = [c(-t.sin(), 0.0), Complex64::from_polar(1.0, t) * c(t.cos(), t.sin())];
        let norm2: f64 = dpsi.iter().map(|z| z.norm_sqr()).sum();
        let overlap: Complex64 = psi.iter().zip(&dpsi).map(|(a, b)| a.conj() * b).sum();
        let expected = 4.0 * (norm2 - overlap.norm_sqr());

        let rho = HermitianOperator::from_fn(2, |i, j| psi[i] * psi[j].conj()).unwrap();
        let drho = HermitianOperator::from_fn(2, |i, j| dpsi[i] * psi[j].conj() + psi[i] * dpsi[j].conj()).unwrap();
        let q = QfiBundle::from_operators(&rho, std::slice::from_ref(&drho), DEFAULT_SLD_CUTOFF);
        assert!((q.qfi().get(0, 0) - expected).abs() < 1e-10);
        assert!(sld_residual(&rho, &drho, &q.slds()[0]) < 1e-10);
    }

    #[test]
    fn weak_commutativity_of_operator_with_itself_vanishes() {
        let rho = HermitianOperator::identity(2).scaled(0.5);
        let l = HermitianOperator::from_fn(2, |i, j| if i == j { c(0.0, 0.0) } else { c(0.0, if i == 0 { -1.0 } else { 1.0 }) }).unwrap();
        assert_eq!(weak_commutativity(&rho, &l, &l), 0.0);
    }

    #[test]
    fn r_of_equal_matrices_is_one() {
        let f = RealSymmetricMatrix::from_fn(2, |i, j| if i == j { 3.0 } else { 0.5 }).unwrap();
        assert!((r_metric(&f, &f, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!((r_nuisance(&f, &f, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn r_rejects_singular_fisher() {
        let f = RealSymmetricMatrix::from_fn(2, |_, _| 1.0).unwrap();
        let q = RealSymmetricMatrix::identity(2);
        assert!(matches!(r_metric(&f, &q, 1), Err(Error::SingularFisher { .. })));
        assert!(matches!(r_nuisance(&f, &q, 0), Err(Error::SingularFisher { .. })));
    }

    #[test]
    fn trivial_povm_has_zero_information() {
        let rho = HermitianOperator::identity(2).scaled(0.5);
        let d = HermitianOperator::from_fn(2, |i, j| if i == j { c(0.0, 0.0) } else { c(0.5, 0.0) }).unwrap();
        let povm = Povm::unlabeled(vec![HermitianOperator::identity(2)]).unwrap();
        let b = FisherBundle::from_operators(&rho, &[d], &povm, DEFAULT_P_CUTOFF).unwrap();
        assert_eq!(b.fisher().get(0, 0), 0.0);
        assert!(matches!(b.inverse_fisher(), Err(Error::SingularFisher { .. })));
    }

    #[test]
    fn singular_score_detected() {
        // Outcome |1⟩⟨1| has zero probability but first-order sensitivity.
        let rho = HermitianOperator::from_fn(2, |i, j| if i == 0 && j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let d = HermitianOperator::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(-1.0, 0.0),
            (1, 1) => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        })
        .unwrap();
        let p0 = HermitianOperator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p1 = HermitianOperator::projector(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let povm = Povm::unlabeled(vec![p0, p1]).unwrap();
        let err = FisherBundle::from_operators(&rho, &[d], &povm, DEFAULT_P_CUTOFF).unwrap_err();
        assert!(matches!(err, Error::SingularScore { outcome: 1, .. }));
    }

    #[test]
    fn removable_zero_probability_outcome_is_dropped() {
        let rho = HermitianOperator::from_fn(2, |i, j| if i == 0 && j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let d = HermitianOperator::from_fn(2, |i, j| if i != j { c(0.5, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let p0 = HermitianOperator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p1 = HermitianOperator::projector(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let povm = Povm::unlabeled(vec![p0, p1]).unwrap();
        let b = FisherBundle::from_operators(&rho, &[d], &povm, DEFAULT_P_CUTOFF).unwrap();
        assert_eq!(b.kept_outcomes(), &[0]);
        assert!((b.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
