#![allow(dead_code)]

use menos::linalg::HermitianOperator;
use menos::povm::Povm;
use menos::random;
use menos::susceptibility::Measurement;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    random::rng(seed)
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> HermitianOperator {
    random::random_hermitian(dim, rng)
}

pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> HermitianOperator {
    random::random_state(dim, rng)
}

pub fn random_traceless<R: Rng>(dim: usize, rng: &mut R) -> HermitianOperator {
    random::random_traceless(dim, rng)
}

pub fn random_povm<R: Rng>(dim: usize, outcomes: usize, rng: &mut R) -> Povm {
    random::random_povm(dim, outcomes, rng).unwrap()
}

pub fn random_projective<R: Rng>(dim: usize, rng: &mut R) -> Povm {
    random::random_projective(dim, rng).unwrap()
}

pub fn random_instance(seed: u64, dim: usize, params: usize, outcomes: usize) -> Measurement {
    random::random_instance(seed, dim, params, outcomes, 1e6).unwrap()
}
