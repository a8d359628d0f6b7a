//! Brute-force search for bad noise: evaluates `X[M,N]` on sampled and
//! structured noise POVMs and keeps the worst one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fisher::invert_fisher;
use crate::linalg::{linear_combination, HermitianOperator};
use crate::povm::Povm;
use crate::susceptibility::{diagonalize_frame, pair_witness, parameter_witness, Measurement};

/// Haar-distributed unitary from the QR decomposition of a complex
/// Ginibre matrix, with the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best_x: f64,
    pub best_noise: Povm,
    /// Structured candidates plus random samples.
    pub evaluated: usize,
}

/// Structured noise candidates: pair witnesses, per-parameter witnesses and
/// the identity placed on a single outcome.
pub fn structured_candidates(meas: &Measurement) -> Result<Vec<Povm>> {
    let frame = diagonalize_frame(meas)?;
    let kept = meas.bundle().kept_outcomes();
    let dim = meas.rho().dim();
    let len = meas.povm().len();
    let mut out = Vec::new();
    for (i, &a) in kept.iter().enumerate() {
        for &b in &kept[i + 1..] {
            out.push(pair_witness(&frame, a, b)?);
            out.push(pair_witness(&frame, b, a)?);
        }
    }
    for j in 0..meas.num_params() {
        out.push(parameter_witness(&frame, j)?);
    }
    for &a in kept {
        let mut elements = vec![HermitianOperator::zeros(dim); len];
        elements[a] = HermitianOperator::identity(dim);
        out.push(Povm::unlabeled(elements)?);
    }
    Ok(out)
}

/// `{N₁, I − N₁}` with `N₁ = U diag(u) U†`, placed on a random ordered pair
/// of kept outcomes. Sample `index` depends only on `(seed, index)`.
pub fn sample_noise(meas: &Measurement, seed: u64, index: u64) -> Result<Povm> {
    let kept = meas.bundle().kept_outcomes();
    if kept.len() < 2 {
        return Err(Error::TooFewOutcomes { kept: kept.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let dim = meas.rho().dim();
    let u = haar_unitary(dim, &mut rng);
    let weights: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let first = rng.random_range(0..kept.len());
    let mut second = rng.random_range(0..kept.len() - 1);
    if second >= first {
        second += 1;
    }
    let diag = DMatrix::from_fn(dim, dim, |i, j| if i == j { Complex64::new(weights[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let n1 = HermitianOperator::new(&u * diag * u.adjoint())?;
    let mut elements = vec![HermitianOperator::zeros(dim); meas.povm().len()];
    elements[kept[second]] = &HermitianOperator::identity(dim) - &n1;
    elements[kept[first]] = n1;
    Povm::unlabeled(elements)
}

/// `C_α = Σ_jk (F⁻¹)_kj A_{α;jk}`, so that `X = P + Σ_α Tr[C_α N_α]`.
fn contracted_operators(meas: &Measurement) -> Result<Vec<(usize, HermitianOperator)>> {
    let finv = invert_fisher(meas.fisher())?;
    let a = meas.a_tensor();
    let p = meas.num_params();
    Ok(a.outcomes()
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let mut w = Vec::with_capacity(p * p);
            let mut ops = Vec::with_capacity(p * p);
            for j in 0..p {
                for k in 0..p {
                    w.push(finv.get(k, j));
                    ops.push(a.get(i, j, k));
                }
            }
            (alpha, linear_combination(&w, &ops))
        })
        .collect())
}

fn fast_x(p: usize, contracted: &[(usize, HermitianOperator)], noise: &Povm) -> f64 {
    p as f64 + contracted.iter().filter_map(|(alpha, c)| noise.elements().get(*alpha).map(|n| c.trace_product(n))).sum::<f64>()
}

/// Largest `X[M,N]` over the structured candidates and `n_samples` random
/// two-outcome noise POVMs. Deterministic for a given seed regardless of
/// the thread count; ties go to the lowest candidate index.
pub fn noise_search_oracle(meas: &Measurement, n_samples: usize, seed: u64) -> Result<OracleResult> {
    let contracted = contracted_operators(meas)?;
    let p = meas.num_params();
    let structured = structured_candidates(meas)?;
    let offset = structured.len();

    let best_structured =
        structured.iter().enumerate().map(|(i, n)| (fast_x(p, &contracted, n), i)).fold((f64::NEG_INFINITY, usize::MAX), pick);
    let best_sampled = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<(f64, usize)> {
            let n = sample_noise(meas, seed, i as u64)?;
            Ok((fast_x(p, &contracted, &n), offset + i))
        })
        .try_reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| Ok(pick(a, b)))?;
    let (_, index) = pick(best_structured, best_sampled);

    let best_noise = if index < offset { structured[index].clone() } else { sample_noise(meas, seed, (index - offset) as u64)? };
    Ok(OracleResult { best_x: meas.x(&best_noise)?, best_noise, evaluated: offset + n_samples })
}

fn pick(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}
