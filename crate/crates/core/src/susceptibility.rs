//! First-order sensitivity of the Fisher information matrix to measurement
//! noise.
//!
//! Mixing a measurement `M` with a noise POVM `N` as `(1−ε)M + εN` changes
//! `det F` at rate `−X[M,N] det F`. `X` is linear in `N`, so the worst case
//! `Σ[M] = max_N X[M,N]` is a linear program over POVMs; this module
//! computes `X` and the analytic bounds on `Σ`.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::fisher::{invert_fisher, FisherBundle, DEFAULT_P_CUTOFF, MAX_CONDITION};
use crate::linalg::{linear_combination, HermitianOperator, RealSymmetricMatrix};
use crate::model::{ParamPoint, StatisticalModel};
use crate::povm::{mix_povm, Povm};

/// Noise elements on outcomes beyond those of `M` must vanish to this level.
pub const EXTRA_OUTCOME_TOL: f64 = 1e-12;
/// Relative gap below which Fisher eigenvalues are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// State, derivatives and measurement at a fixed parameter point, with the
/// outcome statistics already evaluated.
#[derive(Debug, Clone)]
pub struct Measurement {
    rho: HermitianOperator,
    derivatives: Vec<HermitianOperator>,
    povm: Povm,
    bundle: FisherBundle,
}

impl Measurement {
    pub fn new(rho: HermitianOperator, derivatives: Vec<HermitianOperator>, povm: Povm, p_cutoff: f64) -> Result<Self> {
        if let Some(d) = derivatives.iter().find(|d| d.dim() != rho.dim()) {
            return Err(Error::DimensionMismatch { expected: rho.dim(), found: d.dim() });
        }
        let bundle = FisherBundle::from_operators(&rho, &derivatives, &povm, p_cutoff)?;
        Ok(Self { rho, derivatives, povm, bundle })
    }

    pub fn at(model: &StatisticalModel, theta: &ParamPoint, povm: &Povm) -> Result<Self> {
        Self::at_with_cutoff(model, theta, povm, DEFAULT_P_CUTOFF)
    }

    pub fn at_with_cutoff(model: &StatisticalModel, theta: &ParamPoint, povm: &Povm, p_cutoff: f64) -> Result<Self> {
        Self::new(model.state_at(theta)?, model.derivatives_at(theta)?, povm.clone(), p_cutoff)
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn derivatives(&self) -> &[HermitianOperator] {
        &self.derivatives
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn bundle(&self) -> &FisherBundle {
        &self.bundle
    }

    pub fn fisher(&self) -> &RealSymmetricMatrix {
        self.bundle.fisher()
    }

    pub fn num_params(&self) -> usize {
        self.derivatives.len()
    }

    pub fn a_tensor(&self) -> ATensor {
        a_tensor(&self.bundle, &self.derivatives, &self.rho)
    }

    /// `X[M,N]` through `G[N]` and a linear solve.
    pub fn x(&self, noise: &Povm) -> Result<f64> {
        let g = g_matrix(&self.a_tensor(), noise)?;
        x_scalar(self.fisher(), &g)
    }
}

/// `A_{α;jk} = l_j l_k ρ − l_j ∂_kρ − l_k ∂_jρ` for every kept outcome.
#[derive(Debug, Clone)]
pub struct ATensor {
    outcomes: Vec<usize>,
    num_outcomes: usize,
    params: usize,
    dim: usize,
    ops: Vec<HermitianOperator>,
}

impl ATensor {
    /// Original outcome indices, one per stored block.
    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn num_params(&self) -> usize {
        self.params
    }

    /// Number of outcomes of the measurement this tensor was built from.
    pub fn num_outcomes(&self) -> usize {
        self.num_outcomes
    }

    /// `A_{α;jk}` for the `i`-th kept outcome.
    pub fn get(&self, i: usize, j: usize, k: usize) -> &HermitianOperator {
        &self.ops[(i * self.params + j) * self.params + k]
    }

    /// `Σ_{kl} J_ik J_jl A_{α;kl}` for every outcome.
    pub fn transformed(&self, jac: &DMatrix<f64>) -> ATensor {
        let p = self.params;
        let mut ops = Vec::with_capacity(self.ops.len());
        for a in 0..self.outcomes.len() {
            let blocks: Vec<&HermitianOperator> = (0..p * p).map(|kl| &self.ops[a * p * p + kl]).collect();
            for i in 0..p {
                for j in 0..p {
                    let w: Vec<f64> = (0..p * p).map(|kl| jac[(i, kl / p)] * jac[(j, kl % p)]).collect();
                    ops.push(linear_combination(&w, &blocks));
                }
            }
        }
        ATensor { ops, ..self.clone() }
    }
}

pub fn a_tensor(bundle: &FisherBundle, derivatives: &[HermitianOperator], rho: &HermitianOperator) -> ATensor {
    let p = derivatives.len();
    let mut ops = Vec::with_capacity(bundle.kept_outcomes().len() * p * p);
    for l in bundle.scores() {
        for j in 0..p {
            for k in 0..p {
                ops.push(linear_combination(&[l[j] * l[k], -l[j], -l[k]], &[rho, &derivatives[k], &derivatives[j]]));
            }
        }
    }
    ATensor { outcomes: bundle.kept_outcomes().to_vec(), num_outcomes: bundle.num_outcomes(), params: p, dim: rho.dim(), ops }
}

/// Checks that `noise` can be aligned with the measurement outcomes.
///
/// A shorter noise POVM is implicitly padded with zero elements; a longer
/// one is accepted only if the surplus elements vanish.
fn check_alignment(a: &ATensor, noise: &Povm) -> Result<()> {
    if noise.dim() != a.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: noise.dim() });
    }
    for (idx, e) in noise.elements().iter().enumerate().skip(a.num_outcomes) {
        if e.max_abs() > EXTRA_OUTCOME_TOL {
            return Err(Error::OutcomeMismatch(format!(
                "noise outcome {idx} is non-zero but the measurement has only {} outcomes",
                a.num_outcomes
            )));
        }
    }
    Ok(())
}

/// `G_jk[N] = Σ_α Tr[A_{α;jk} N_α]`, summed over kept outcomes.
pub fn g_matrix(a: &ATensor, noise: &Povm) -> Result<RealSymmetricMatrix> {
    check_alignment(a, noise)?;
    let p = a.params;
    let mut g = DMatrix::<f64>::zeros(p, p);
    for (i, &alpha) in a.outcomes.iter().enumerate() {
        let Some(n) = noise.elements().get(alpha) else { continue };
        for j in 0..p {
            for k in j..p {
                let v = a.get(i, j, k).trace_product(n);
                g[(j, k)] += v;
                if j != k {
                    g[(k, j)] += v;
                }
            }
        }
    }
    Ok(RealSymmetricMatrix::symmetrized(g))
}

/// `Ξ = I + F⁻¹G`.
pub fn xi_matrix(f: &RealSymmetricMatrix, g: &RealSymmetricMatrix) -> Result<DMatrix<f64>> {
    check_dims(f, g)?;
    let finv = invert_fisher(f)?;
    Ok(DMatrix::identity(f.dim(), f.dim()) + finv.matrix() * g.matrix())
}

/// `X = P + tr[F⁻¹G]`, via a Cholesky solve rather than an explicit inverse.
pub fn x_scalar(f: &RealSymmetricMatrix, g: &RealSymmetricMatrix) -> Result<f64> {
    check_dims(f, g)?;
    let cond = f.condition_number();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularFisher { condition_number: cond });
    }
    let chol = Cholesky::new(f.matrix().clone()).ok_or(Error::SingularFisher { condition_number: cond })?;
    let solved = chol.solve(g.matrix());
    Ok(f.dim() as f64 + solved.trace())
}

fn check_dims(f: &RealSymmetricMatrix, g: &RealSymmetricMatrix) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    Ok(())
}

/// `(det F[M] − det F[(1−ε)M + εN]) / (ε det F[M])`, which tends to
/// `X[M,N]` as `ε → 0` when `N` puts no weight on outcomes `M` never
/// produces.
pub fn finite_eps_quotient(meas: &Measurement, noise: &Povm, eps: f64) -> Result<f64> {
    let mixed = mix_povm(meas.povm(), noise, eps)?;
    let perturbed = FisherBundle::from_operators(meas.rho(), meas.derivatives(), &mixed, DEFAULT_P_CUTOFF)?;
    let det = meas.fisher().matrix().determinant();
    let det_eps = perturbed.fisher().matrix().determinant();
    Ok((det - det_eps) / (eps * det))
}

fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn check_invertible(f: &RealSymmetricMatrix) -> Result<()> {
    invert_fisher(f).map(|_| ())
}

fn check_two_outcomes(bundle: &FisherBundle) -> Result<()> {
    let kept = bundle.kept_outcomes().len();
    if kept < 2 {
        return Err(Error::TooFewOutcomes { kept });
    }
    Ok(())
}

/// Single-parameter susceptibility
/// `σ = 1 + (l_n² + l_m² + ‖A_n − A_m‖₁) / (2F)`, with `n`, `m` the outcomes
/// of largest and smallest score.
pub fn sigma_single(meas: &Measurement) -> Result<f64> {
    if meas.num_params() != 1 {
        return Err(Error::InvalidArgument(format!("sigma_single needs a one-parameter model, got {} parameters", meas.num_params())));
    }
    check_invertible(meas.fisher())?;
    check_two_outcomes(meas.bundle())?;
    let a = meas.a_tensor();
    let scores = meas.bundle().scores();
    let n = argmax_lowest(scores.iter().map(|l| l[0]));
    let m = argmax_lowest(scores.iter().map(|l| -l[0]));
    let spread = (a.get(n, 0, 0) - a.get(m, 0, 0)).trace_norm();
    let (ln, lm) = (scores[n][0], scores[m][0]);
    Ok(1.0 + (ln * ln + lm * lm + spread) / (2.0 * meas.fisher().get(0, 0)))
}

/// Quantities re-expressed in a parametrization where `F` is diagonal.
#[derive(Debug, Clone)]
pub struct DiagonalizedFrame {
    /// `J_ij = ∂θ̃_i/∂θ_j` direction cosines; rows are the new parameters.
    pub jacobian: DMatrix<f64>,
    pub fisher: RealSymmetricMatrix,
    pub derivatives: Vec<HermitianOperator>,
    /// `l̃_{α,j}` per kept outcome.
    pub scores: Vec<Vec<f64>>,
    pub a: ATensor,
    /// `L⃗_α` with components `l̃_{α,j} / √F̃_jj`.
    pub l_vectors: Vec<Vec<f64>>,
}

impl DiagonalizedFrame {
    pub fn num_params(&self) -> usize {
        self.jacobian.nrows()
    }

    /// Original outcome index of the `i`-th kept outcome.
    pub fn outcome(&self, i: usize) -> usize {
        self.a.outcomes[i]
    }

    fn fjj(&self, j: usize) -> f64 {
        self.fisher.get(j, j)
    }
}

/// Orthogonal `J` whose rows are eigenvectors of `F`.
///
/// Degenerate eigenspaces leave `J` undetermined; the rows chosen there
/// are the coordinate axes projected into the eigenspace and
/// orthonormalized, so an already diagonal `F` yields the identity.
pub fn canonical_jacobian(f: &RealSymmetricMatrix) -> DMatrix<f64> {
    let p = f.dim();
    let (values, vectors) = f.eigen();
    let scale = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut start = 0;
    while start < p {
        let mut end = start + 1;
        while end < p && (values[end - 1] - values[end]).abs() <= DEGENERACY_TOL * scale {
            end += 1;
        }
        let basis: Vec<Vec<f64>> = (start..end).map(|c| vectors.column(c).iter().copied().collect()).collect();
        rows.extend(canonical_subspace_basis(&basis));
        start = end;
    }
    for row in rows.iter_mut() {
        let lead = argmax_lowest(row.iter().map(|x| x.abs()));
        if row[lead] < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }
    rows.sort_by_key(|r| argmax_lowest(r.iter().map(|x| x.abs())));
    DMatrix::from_fn(p, p, |i, j| rows[i][j])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn canonical_subspace_basis(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if basis.len() == 1 {
        return basis.to_vec();
    }
    let p = basis[0].len();
    let project = |axis: usize| -> Vec<f64> {
        let mut out = vec![0.0; p];
        for b in basis {
            for (o, x) in out.iter_mut().zip(b) {
                *o += b[axis] * x;
            }
        }
        out
    };
    let mut axes: Vec<(usize, Vec<f64>)> = (0..p).map(|i| (i, project(i))).collect();
    axes.sort_by(|a, b| dot(&b.1, &b.1).total_cmp(&dot(&a.1, &a.1)).then(a.0.cmp(&b.0)));
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for (_, mut v) in axes {
        if out.len() == basis.len() {
            break;
        }
        for u in &out {
            let c = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            out.push(v.iter().map(|x| x / norm).collect());
        }
    }
    out
}

pub fn diagonalize_frame(meas: &Measurement) -> Result<DiagonalizedFrame> {
    check_invertible(meas.fisher())?;
    frame_with_jacobian(meas, canonical_jacobian(meas.fisher()))
}

/// Frame for a caller-supplied `J`, which must make `J F Jᵀ` diagonal.
pub fn frame_with_jacobian(meas: &Measurement, jacobian: DMatrix<f64>) -> Result<DiagonalizedFrame> {
    let p = meas.num_params();
    if jacobian.nrows() != p || jacobian.ncols() != p {
        return Err(Error::DimensionMismatch { expected: p, found: jacobian.nrows() });
    }
    check_invertible(meas.fisher())?;
    let fisher = meas.fisher().congruence(&jacobian);
    let diag_scale = (0..p).map(|j| fisher.get(j, j).abs()).fold(0.0, f64::max);
    for i in 0..p {
        for j in 0..p {
            if i != j && fisher.get(i, j).abs() > 1e-9 * diag_scale {
                return Err(Error::InvalidArgument(format!("J F Jᵀ is not diagonal: entry ({i},{j}) = {:.3e}", fisher.get(i, j))));
            }
        }
    }
    let originals: Vec<&HermitianOperator> = meas.derivatives().iter().collect();
    let derivatives = (0..p)
        .map(|i| {
            let w: Vec<f64> = (0..p).map(|k| jacobian[(i, k)]).collect();
            linear_combination(&w, &originals)
        })
        .collect();
    let scores: Vec<Vec<f64>> =
        meas.bundle().scores().iter().map(|l| (0..p).map(|i| (0..p).map(|k| jacobian[(i, k)] * l[k]).sum()).collect()).collect();
    let l_vectors = scores.iter().map(|l: &Vec<f64>| (0..p).map(|j| l[j] / fisher.get(j, j).sqrt()).collect()).collect();
    let a = meas.a_tensor().transformed(&jacobian);
    Ok(DiagonalizedFrame { jacobian, fisher, derivatives, scores, a, l_vectors })
}

/// `Σ_j (Ã_{a;jj} − Ã_{b;jj}) / F̃_jj` for kept-outcome positions `a`, `b`.
fn weighted_diag_difference(frame: &DiagonalizedFrame, a: usize, b: usize) -> HermitianOperator {
    let p = frame.num_params();
    let mut ops = Vec::with_capacity(2 * p);
    let mut w = Vec::with_capacity(2 * p);
    for j in 0..p {
        ops.push(frame.a.get(a, j, j));
        ops.push(frame.a.get(b, j, j));
        w.push(1.0 / frame.fjj(j));
        w.push(-1.0 / frame.fjj(j));
    }
    linear_combination(&w, &ops)
}

fn norm_sq(v: &[f64]) -> f64 {
    dot(v, v)
}

/// Largest value of `value(a, b)` over kept-outcome pairs `a < b`, ties to
/// the lexicographically first pair.
fn best_pair(frame: &DiagonalizedFrame, value: impl Fn(usize, usize) -> f64) -> (f64, (usize, usize)) {
    let e = frame.scores.len();
    let mut best = (f64::NEG_INFINITY, (0, 1));
    for a in 0..e {
        for b in a + 1..e {
            let v = value(a, b);
            if v > best.0 {
                best = (v, (a, b));
            }
        }
    }
    best
}

/// `P + ½(‖L⃗_{α′}‖² + ‖L⃗_{α″}‖²) + Σ_j ‖Ã_{α′;jj} − Ã_{α″;jj}‖₁ / (2F̃_jj)`,
/// maximized over outcome pairs. Returns the value and the original
/// indices of the maximizing pair.
pub fn sigma_lower(frame: &DiagonalizedFrame) -> Result<(f64, (usize, usize))> {
    check_frame_outcomes(frame)?;
    let p = frame.num_params();
    let (v, (a, b)) = best_pair(frame, |a, b| {
        let spread: f64 = (0..p).map(|j| (frame.a.get(a, j, j) - frame.a.get(b, j, j)).trace_norm() / (2.0 * frame.fjj(j))).sum();
        p as f64 + 0.5 * (norm_sq(&frame.l_vectors[a]) + norm_sq(&frame.l_vectors[b])) + spread
    });
    Ok((v, (frame.outcome(a), frame.outcome(b))))
}

/// Value of `X` reached by the best two-outcome noise in [`pair_witness`]:
/// `P + ½(‖L⃗_{α′}‖² + ‖L⃗_{α″}‖²) + ½‖Σ_j (Ã_{α′;jj} − Ã_{α″;jj})/F̃_jj‖₁`.
///
/// Unlike [`sigma_lower`] this is always attained, so it never exceeds
/// `max_N X[M,N]`.
pub fn attainable_pair_bound(frame: &DiagonalizedFrame) -> Result<(f64, (usize, usize))> {
    check_frame_outcomes(frame)?;
    let p = frame.num_params();
    let (v, (a, b)) = best_pair(frame, |a, b| {
        p as f64
            + 0.5 * (norm_sq(&frame.l_vectors[a]) + norm_sq(&frame.l_vectors[b]))
            + 0.5 * weighted_diag_difference(frame, a, b).trace_norm()
    });
    Ok((v, (frame.outcome(a), frame.outcome(b))))
}

fn position(frame: &DiagonalizedFrame, outcome: usize) -> Result<usize> {
    frame
        .a
        .outcomes
        .iter()
        .position(|&o| o == outcome)
        .ok_or_else(|| Error::InvalidArgument(format!("outcome {outcome} is not a kept outcome")))
}

/// Two-outcome noise sending the positive part of `op` to `first` and the
/// complement to `second`.
fn split_noise(op: &HermitianOperator, first: usize, second: usize, num_outcomes: usize) -> Result<Povm> {
    let dim = op.dim();
    let pi = op.positive_projector();
    let mut elements = vec![HermitianOperator::zeros(dim); num_outcomes];
    elements[second] = &HermitianOperator::identity(dim) - &pi;
    elements[first] = pi;
    Povm::unlabeled(elements)
}

/// Noise POVM attaining [`attainable_pair_bound`] for the outcome pair
/// `(first, second)` (original indices).
pub fn pair_witness(frame: &DiagonalizedFrame, first: usize, second: usize) -> Result<Povm> {
    let (a, b) = (position(frame, first)?, position(frame, second)?);
    split_noise(&weighted_diag_difference(frame, a, b), first, second, frame.a.num_outcomes)
}

/// Noise POVM attaining `σ_j` for parameter `j` alone.
pub fn parameter_witness(frame: &DiagonalizedFrame, j: usize) -> Result<Povm> {
    let (n, m) = extremal_outcomes(frame, j);
    let diff = frame.a.get(n, j, j) - frame.a.get(m, j, j);
    split_noise(&diff, frame.outcome(n), frame.outcome(m), frame.a.num_outcomes)
}

fn extremal_outcomes(frame: &DiagonalizedFrame, j: usize) -> (usize, usize) {
    let n = argmax_lowest(frame.scores.iter().map(|l| l[j]));
    let m = argmax_lowest(frame.scores.iter().map(|l| -l[j]));
    (n, m)
}

fn check_frame_outcomes(frame: &DiagonalizedFrame) -> Result<()> {
    if frame.scores.len() < 2 {
        return Err(Error::TooFewOutcomes { kept: frame.scores.len() });
    }
    Ok(())
}

/// Per-parameter susceptibilities in the diagonal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBound {
    pub value: f64,
    pub sigmas: Vec<f64>,
    /// `(n_j, m_j)`: original indices of the largest and smallest score.
    pub extremal: Vec<(usize, usize)>,
}

/// `Σ^U = Σ_j σ_j` with
/// `σ_j = 1 + (l̃_{n_j,j}² + l̃_{m_j,j}² + ‖Ã_{n_j;jj} − Ã_{m_j;jj}‖₁) / (2F̃_jj)`.
pub fn sigma_upper(frame: &DiagonalizedFrame) -> Result<UpperBound> {
    check_frame_outcomes(frame)?;
    let p = frame.num_params();
    let mut sigmas = Vec::with_capacity(p);
    let mut extremal = Vec::with_capacity(p);
    for j in 0..p {
        let (n, m) = extremal_outcomes(frame, j);
        let (ln, lm) = (frame.scores[n][j], frame.scores[m][j]);
        let spread = (frame.a.get(n, j, j) - frame.a.get(m, j, j)).trace_norm();
        sigmas.push(1.0 + (ln * ln + lm * lm + spread) / (2.0 * frame.fjj(j)));
        extremal.push((frame.outcome(n), frame.outcome(m)));
    }
    Ok(UpperBound { value: sigmas.iter().sum(), sigmas, extremal })
}

/// `X = P + Σ_α f_α(L⃗_α)` with `f_α(x) = c_α‖x‖² − x·δ⃗_α`,
/// `c_α = Tr[ρN_α]`, `δ_{α,j} = 2Tr[∂̃_jρ N_α]/√F̃_jj`.
pub fn x_via_convexity(meas: &Measurement, frame: &DiagonalizedFrame, noise: &Povm) -> Result<f64> {
    check_alignment(&frame.a, noise)?;
    let p = frame.num_params();
    let mut total = p as f64;
    for (i, l) in frame.l_vectors.iter().enumerate() {
        let Some(n) = noise.elements().get(frame.outcome(i)) else { continue };
        let c = meas.rho().trace_product(n);
        let delta: Vec<f64> = (0..p).map(|j| 2.0 * frame.derivatives[j].trace_product(n) / frame.fjj(j).sqrt()).collect();
        total += c * norm_sq(l) - dot(l, &delta);
    }
    Ok(total)
}

/// Bounds on the worst-case susceptibility of one measurement.
#[derive(Debug, Clone)]
pub struct SusceptibilityReport {
    pub sigma_lower: f64,
    pub best_pair: (usize, usize),
    /// Largest `X` reached by an explicit two-outcome noise POVM.
    pub attainable_lower: f64,
    pub attainable_pair: (usize, usize),
    pub sigma_upper: f64,
    pub per_parameter_sigmas: Vec<f64>,
    pub extremal_outcomes: Vec<(usize, usize)>,
    pub fisher_condition_number: f64,
    pub frame: DiagonalizedFrame,
    pub oracle_best: Option<f64>,
}

pub fn analyze(meas: &Measurement) -> Result<SusceptibilityReport> {
    let frame = diagonalize_frame(meas)?;
    analyze_in_frame(meas, frame)
}

pub fn analyze_in_frame(meas: &Measurement, frame: DiagonalizedFrame) -> Result<SusceptibilityReport> {
    let (sigma_lower, best_pair) = sigma_lower(&frame)?;
    let (attainable_lower, attainable_pair) = attainable_pair_bound(&frame)?;
    let upper = sigma_upper(&frame)?;
    Ok(SusceptibilityReport {
        sigma_lower,
        best_pair,
        attainable_lower,
        attainable_pair,
        sigma_upper: upper.value,
        per_parameter_sigmas: upper.sigmas,
        extremal_outcomes: upper.extremal,
        fisher_condition_number: meas.fisher().condition_number(),
        frame,
        oracle_best: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::qubit::{qubit_phase_dephasing, separable_povm};
    use std::f64::consts::FRAC_PI_4;

    fn qubit(phi: f64, delta: f64) -> Measurement {
        let model = qubit_phase_dephasing();
        Measurement::at(&model, &model.point(vec![phi, delta]).unwrap(), &separable_povm()).unwrap()
    }

    #[test]
    fn contraction_identity() {
        let meas = qubit(0.3, 0.2);
        let g = g_matrix(&meas.a_tensor(), meas.povm()).unwrap();
        let f = meas.fisher();
        for j in 0..2 {
            for k in 0..2 {
                assert!((g.get(j, k) + f.get(j, k)).abs() < 1e-10);
            }
        }
        assert!(meas.x(meas.povm()).unwrap().abs() < 1e-9);
        assert!(xi_matrix(f, &g).unwrap().amax() < 1e-9);
    }

    #[test]
    fn zero_noise_gives_identity_xi() {
        let meas = qubit(0.3, 0.2);
        let g = RealSymmetricMatrix::symmetrized(DMatrix::zeros(2, 2));
        assert_eq!(xi_matrix(meas.fisher(), &g).unwrap(), DMatrix::identity(2, 2));
        assert_eq!(x_scalar(meas.fisher(), &g).unwrap(), 2.0);
    }

    #[test]
    fn diagonal_fisher_gives_identity_frame() {
        let meas = qubit(FRAC_PI_4, 0.3);
        let frame = diagonalize_frame(&meas).unwrap();
        assert!((frame.jacobian.clone() - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn canonical_jacobian_of_rotated_matrix() {
        let f = RealSymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let j = canonical_jacobian(&f);
        let ft = f.congruence(&j);
        assert!(ft.get(0, 1).abs() < 1e-14);
        assert!((j.clone() * j.transpose() - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn oversized_noise_must_vanish_beyond_measurement() {
        let meas = qubit(0.3, 0.2);
        let mut elements = separable_povm().elements().to_vec();
        elements.push(HermitianOperator::zeros(2));
        let padded = Povm::unlabeled(elements.clone()).unwrap();
        assert!((meas.x(&padded).unwrap() - meas.x(&separable_povm()).unwrap()).abs() < 1e-12);
        elements[4] = HermitianOperator::identity(2).scaled(0.1);
        let bad = Povm::unlabeled(elements).unwrap();
        assert!(matches!(meas.x(&bad), Err(Error::OutcomeMismatch(_))));
    }

    #[test]
    fn witness_attains_pair_bound() {
        let meas = qubit(0.4, 0.3);
        let frame = diagonalize_frame(&meas).unwrap();
        let (v, (a, b)) = attainable_pair_bound(&frame).unwrap();
        let witness = pair_witness(&frame, a, b).unwrap();
        assert!((meas.x(&witness).unwrap() - v).abs() < 1e-9);
        let (lower, _) = sigma_lower(&frame).unwrap();
        assert!(v <= lower + 1e-12);
    }

    #[test]
    fn parameter_witness_attains_sigma_j_contribution() {
        let meas = qubit(0.4, 0.3);
        let frame = diagonalize_frame(&meas).unwrap();
        let upper = sigma_upper(&frame).unwrap();
        for j in 0..2 {
            let n = parameter_witness(&frame, j).unwrap();
            let g = g_matrix(&frame.a, &n).unwrap();
            assert!((1.0 + g.get(j, j) / frame.fisher.get(j, j) - upper.sigmas[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn convexity_path_matches() {
        let meas = qubit(0.9, 0.1);
        let frame = diagonalize_frame(&meas).unwrap();
        let noise = Povm::unlabeled(vec![HermitianOperator::identity(2).scaled(0.25); 4]).unwrap();
        let x = meas.x(&noise).unwrap();
        assert!((x_via_convexity(&meas, &frame, &noise).unwrap() - x).abs() < 1e-9);
    }

    #[test]
    fn sigma_single_rejects_multiparameter() {
        assert!(matches!(sigma_single(&qubit(0.3, 0.2)), Err(Error::InvalidArgument(_))));
    }
}
