//! Joint phase and dephasing estimation on a qubit.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::model::{DerivativeMode, ModelFamily, StatisticalModel};
use crate::povm::Povm;

pub const PHASE: &str = "phi";
pub const DEPHASING: &str = "delta";

/// `ρ = ½ [[1, e^{−iφ−Δ}], [e^{iφ−Δ}, 1]]` in the σ_z basis.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseDephasing;

fn coherence(theta: &[f64]) -> Complex64 {
    Complex64::from_polar((-theta[1]).exp(), -theta[0])
}

fn off_diagonal(upper: Complex64) -> Result<HermitianOperator> {
    HermitianOperator::from_fn(2, |i, j| match (i, j) {
        (0, 1) => upper,
        (1, 0) => upper.conj(),
        _ => Complex64::new(0.0, 0.0),
    })
}

impl ModelFamily for PhaseDephasing {
    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec![PHASE.into(), DEPHASING.into()]
    }

    fn check_domain(&self, theta: &[f64]) -> Result<()> {
        if !theta.iter().all(|x| x.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameters {theta:?}")));
        }
        if theta[1] < 0.0 {
            return Err(Error::Domain(format!("dephasing must be non-negative, got {}", theta[1])));
        }
        Ok(())
    }

    fn state(&self, theta: &[f64]) -> Result<HermitianOperator> {
        let c = coherence(theta) * 0.5;
        HermitianOperator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c,
            (1, 0) => c.conj(),
            _ => Complex64::new(0.5, 0.0),
        })
    }

    fn analytic_derivatives(&self, theta: &[f64]) -> Option<Result<Vec<HermitianOperator>>> {
        let c = coherence(theta) * 0.5;
        let run = || Ok(vec![off_diagonal(c * Complex64::new(0.0, -1.0))?, off_diagonal(-c)?]);
        Some(run())
    }
}

pub fn qubit_phase_dephasing() -> StatisticalModel {
    StatisticalModel::new(PhaseDephasing, DerivativeMode::Analytic)
}

fn ket(a: (f64, f64), b: (f64, f64)) -> [Complex64; 2] {
    [Complex64::new(a.0, a.1), Complex64::new(b.0, b.1)]
}

/// Half-weight projectors onto the σ_x and σ_y eigenstates.
pub fn separable_povm() -> Povm {
    let kets = [ket((1.0, 0.0), (1.0, 0.0)), ket((1.0, 0.0), (-1.0, 0.0)), ket((1.0, 0.0), (0.0, 1.0)), ket((1.0, 0.0), (0.0, -1.0))];
    let elements = kets.iter().map(|k| HermitianOperator::projector(k).expect("non-zero ket").scaled(0.5)).collect();
    let labels = ["+x", "-x", "+y", "-y"].iter().map(|s| s.to_string()).collect();
    Povm::new(elements, labels).expect("well-formed POVM")
}

/// Projective measurement onto Ψ+, Ψ−, Φ+, Φ− (basis order |00⟩,|01⟩,|10⟩,|11⟩).
pub fn bell_povm() -> Povm {
    let s = FRAC_1_SQRT_2;
    let real = |v: [f64; 4]| v.map(|x| Complex64::new(x, 0.0));
    let kets = [real([0.0, s, s, 0.0]), real([0.0, s, -s, 0.0]), real([s, 0.0, 0.0, s]), real([s, 0.0, 0.0, -s])];
    let elements = kets.iter().map(|k| HermitianOperator::projector(k).expect("non-zero ket")).collect();
    let labels = ["Psi+", "Psi-", "Phi+", "Phi-"].iter().map(|s| s.to_string()).collect();
    Povm::new(elements, labels).expect("well-formed POVM")
}
