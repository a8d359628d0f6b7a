//! Seeded random states, observables and POVMs for property checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fisher::DEFAULT_P_CUTOFF;
use crate::linalg::HermitianOperator;
use crate::oracle::haar_unitary;
use crate::povm::Povm;
use crate::susceptibility::Measurement;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let z = ginibre(dim, rng);
    HermitianOperator::from_hermitian_parts((&z + z.adjoint()).scale(0.5))
}

/// Full-rank density matrix `G G† / Tr[G G†]`.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let z = ginibre(dim, rng);
    let g = &z * z.adjoint();
    let tr = g.trace().re;
    HermitianOperator::from_hermitian_parts(g.unscale(tr))
}

pub fn random_traceless<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let h = random_hermitian(dim, rng);
    let shift = h.trace() / dim as f64;
    &h - &HermitianOperator::identity(dim).scaled(shift)
}

/// `S^{-1/2} B_α S^{-1/2}` with Wishart `B_α` and `S = Σ B_α`.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    let raw: Vec<DMatrix<Complex64>> = (0..outcomes)
        .map(|_| {
            let z = ginibre(dim, rng);
            &z * z.adjoint()
        })
        .collect();
    let total = raw.iter().fold(DMatrix::zeros(dim, dim), |acc, b| acc + b);
    let eig = HermitianOperator::from_hermitian_parts(total).eig();
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(dim, eig.values.iter().map(|l| Complex64::new(1.0 / l.sqrt(), 0.0))));
    let s = &eig.vectors * inv_sqrt * eig.vectors.adjoint();
    let elements = raw.iter().map(|b| HermitianOperator::from_hermitian_parts(&s * b * &s)).collect();
    Povm::unlabeled(elements)
}

/// Random projective measurement in a Haar-random basis.
pub fn random_projective<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Povm> {
    let u = haar_unitary(dim, rng);
    let elements = (0..dim).map(|k| HermitianOperator::projector(u.column(k).as_slice())).collect::<Result<Vec<_>>>()?;
    Povm::unlabeled(elements)
}

/// Random state with `params` traceless derivatives, measured by a random
/// POVM with `outcomes` elements. Draws until `F` has condition number
/// below `max_condition`.
pub fn random_instance(seed: u64, dim: usize, params: usize, outcomes: usize, max_condition: f64) -> Result<Measurement> {
    if outcomes <= params {
        return Err(Error::InvalidArgument(format!("{outcomes} outcomes cannot resolve {params} parameters")));
    }
    let mut r = rng(seed);
    for _ in 0..1000 {
        let rho = random_state(dim, &mut r);
        let derivs = (0..params).map(|_| random_traceless(dim, &mut r)).collect();
        let povm = random_povm(dim, outcomes, &mut r)?;
        if let Ok(m) = Measurement::new(rho, derivs, povm, DEFAULT_P_CUTOFF) {
            if m.fisher().condition_number() < max_condition {
                return Ok(m);
            }
        }
    }
    Err(Error::InvalidArgument(format!("no instance with condition number below {max_condition:e} for seed {seed}")))
}
