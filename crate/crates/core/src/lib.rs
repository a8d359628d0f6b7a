//! Measurement-noise susceptibility of the Fisher information matrix.
//!
//! Given a parametrized quantum state `ρ_θ` and a POVM `M`, the crate
//! computes the classical Fisher information, the quantum Fisher
//! information, and how fast `det F` degrades when `M` is mixed with an
//! arbitrary noise POVM `N`.
//!
//! ```
//! use menos::builtin::qubit::{qubit_phase_dephasing, separable_povm};
//! use menos::susceptibility::{analyze, Measurement};
//!
//! let model = qubit_phase_dephasing();
//! let theta = model.point(vec![std::f64::consts::FRAC_PI_4, 0.1]).unwrap();
//! let meas = Measurement::at(&model, &theta, &separable_povm()).unwrap();
//! let report = analyze(&meas).unwrap();
//! assert!(report.sigma_lower <= report.sigma_upper);
//! ```

pub mod builtin;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod povm;
pub mod quadrature;
pub mod random;
pub mod susceptibility;

pub use error::{Error, Result};
pub use fisher::{fisher_bundle, qfi_matrix, r_metric, r_nuisance, FisherBundle, QfiBundle};
pub use linalg::{HermitianOperator, RealSymmetricMatrix};
pub use model::{DerivativeMode, ModelFamily, ParamPoint, StatisticalModel};
pub use povm::{mix_povm, validate_povm, Povm};
pub use susceptibility::{analyze, Measurement, SusceptibilityReport};
