mod common;

use std::f64::consts::FRAC_PI_4;

use menos::builtin::point_sources::{
    optimal_povm_point_sources, point_source_model, PointSourceConfig, CENTROID, DEFAULT_N_MAX, INTENSITY, SEPARATION,
};
use menos::builtin::qubit::{bell_povm, qubit_phase_dephasing, separable_povm};
use menos::fisher::{
    fisher_bundle, qfi_matrix, r_metric, r_nuisance, sld, sld_residual, weak_commutativity, FisherBundle, QfiBundle, DEFAULT_P_CUTOFF,
    DEFAULT_SLD_CUTOFF,
};
use menos::model::{tensor_model, ParamPoint, StatisticalModel};
use menos::{Error, HermitianOperator, Povm};
use num_complex::Complex64;

/// `F_jk = Σ_α ∂_j p ∂_k p / p` with probability derivatives from central
/// differences of the Born rule.
fn fisher_from_probabilities(model: &StatisticalModel, theta: &ParamPoint, povm: &Povm) -> Vec<Vec<f64>> {
    let h = 1e-6;
    let probs = |t: &ParamPoint| -> Vec<f64> {
        let rho = model.state_at(t).unwrap();
        povm.elements().iter().map(|m| rho.trace_product(m)).collect()
    };
    let p0 = probs(theta);
    let grads: Vec<Vec<f64>> = (0..theta.len())
        .map(|j| {
            let (a, b) = (probs(&theta.shifted(j, h)), probs(&theta.shifted(j, -h)));
            a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
        })
        .collect();
    let p = theta.len();
    (0..p).map(|j| (0..p).map(|k| (0..p0.len()).map(|a| grads[j][a] * grads[k][a] / p0[a]).sum()).collect()).collect()
}

#[test]
fn separable_fisher_closed_form() {
    let model = qubit_phase_dephasing();
    for delta in [1e-3, 0.05, 0.3, 1.0] {
        let theta = model.point(vec![FRAC_PI_4, delta]).unwrap();
        let f = fisher_bundle(&model, &theta, &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
        let e = (-2.0 * delta).exp();
        let expected = e / (2.0 - e);
        let fm = f.fisher();
        assert!((fm.get(0, 0) - expected).abs() < 1e-12, "delta {delta}");
        assert!((fm.get(1, 1) - expected).abs() < 1e-12);
        assert!(fm.get(0, 1).abs() < 1e-14);
        let oracle = fisher_from_probabilities(&model, &theta, &separable_povm());
        for j in 0..2 {
            for k in 0..2 {
                assert!((oracle[j][k] - fm.get(j, k)).abs() < 1e-7);
            }
        }
    }
}

#[test]
fn fisher_matches_probability_oracle_off_symmetry_point() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![0.9, 0.4]).unwrap();
    let f = fisher_bundle(&model, &theta, &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
    let oracle = fisher_from_probabilities(&model, &theta, &separable_povm());
    for j in 0..2 {
        for k in 0..2 {
            assert!((oracle[j][k] - f.fisher().get(j, k)).abs() < 1e-7);
        }
    }
}

#[test]
fn trivial_povm_has_no_information() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![0.2, 0.2]).unwrap();
    let f = fisher_bundle(&model, &theta, &Povm::unlabeled(vec![HermitianOperator::identity(2)]).unwrap(), 1e-12).unwrap();
    assert!(f.fisher().matrix().iter().all(|x| *x == 0.0));
    assert!(matches!(f.inverse_fisher(), Err(Error::SingularFisher { .. })));
}

#[test]
fn single_parameter_reduction() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![0.7, 0.25]).unwrap();
    let rho = model.state_at(&theta).unwrap();
    let d = model.derivatives_at(&theta).unwrap();
    let one = FisherBundle::from_operators(&rho, &d[..1], &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
    let scalar: f64 = separable_povm().elements().iter().map(|m| d[0].trace_product(m).powi(2) / rho.trace_product(m)).sum();
    assert!((one.fisher().get(0, 0) - scalar).abs() < 1e-14);
    let two = FisherBundle::from_operators(&rho, &d, &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
    assert!((two.fisher().get(0, 0) - scalar).abs() < 1e-14);
}

#[test]
fn probabilities_and_score_sums() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![1.1, 0.6]).unwrap();
    let f = fisher_bundle(&model, &theta, &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
    assert!((f.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
    for j in 0..2 {
        let s: f64 = f.kept_outcomes().iter().zip(f.scores()).map(|(&a, l)| f.probabilities()[a] * l[j]).sum();
        assert!(s.abs() < 1e-10);
    }
    assert!(f.fisher().min_eigenvalue() >= -1e-9);
}

#[test]
fn zero_probability_outcome_is_dropped() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![0.3, 0.2]).unwrap();
    let f = fisher_bundle(&model, &theta, &separable_povm().padded_to(5), DEFAULT_P_CUTOFF).unwrap();
    assert_eq!(f.kept_outcomes(), &[0, 1, 2, 3]);
    assert_eq!(f.num_outcomes(), 5);
    let plain = fisher_bundle(&model, &theta, &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
    assert_eq!(f.fisher(), plain.fisher());
}

/// At `Δ = 0`, `p(−x|φ=0)` vanishes while its `Δ`-derivative does not.
#[test]
fn divergent_score_is_an_error() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![0.0, 0.0]).unwrap();
    let err = fisher_bundle(&model, &theta, &separable_povm(), DEFAULT_P_CUTOFF).unwrap_err();
    assert!(matches!(err, Error::SingularScore { outcome: 1, .. }));
}

#[test]
fn qfi_closed_form() {
    let model = qubit_phase_dephasing();
    for (phi, delta) in [(FRAC_PI_4, 0.3), (0.1, 0.05), (2.0, 1.2)] {
        let q = qfi_matrix(&model, &model.point(vec![phi, delta]).unwrap(), DEFAULT_SLD_CUTOFF).unwrap();
        let e = (-2.0 * delta).exp();
        assert!((q.qfi().get(0, 0) - e).abs() < 1e-12);
        assert!((q.qfi().get(1, 1) - e / (1.0 - e)).abs() < 1e-10);
        assert!(q.qfi().get(0, 1).abs() < 1e-12);
        assert!(q.qfi().min_eigenvalue() >= -1e-9);
    }
}

#[test]
fn sld_residual_on_qubit_model() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![FRAC_PI_4, 0.3]).unwrap();
    let rho = model.state_at(&theta).unwrap();
    for d in model.derivatives_at(&theta).unwrap() {
        let l = sld(&rho, &d, DEFAULT_SLD_CUTOFF);
        assert!(sld_residual(&rho, &d, &l) < 1e-10);
    }
}

#[test]
fn sld_of_maximally_mixed_state() {
    let rho = HermitianOperator::identity(2).scaled(0.5);
    let d = HermitianOperator::from_fn(2, |i, j| match (i, j) {
        (0, 0) => Complex64::new(0.3, 0.0),
        (1, 1) => Complex64::new(-0.3, 0.0),
        (0, 1) => Complex64::new(0.1, -0.2),
        _ => Complex64::new(0.1, 0.2),
    })
    .unwrap();
    assert!(sld(&rho, &d, DEFAULT_SLD_CUTOFF).max_abs_diff(&d.scaled(2.0)) < 1e-14);
}

#[test]
fn pure_state_qfi() {
    // |ψ(t)⟩ = (cos t, e^{it} sin t) on a qutrit padded with a zero level
    let t: f64 = 0.4;
    let psi = [Complex64::new(t.cos(), 0.0), Complex64::from_polar(t.sin(), t), Complex64::new(0.0, 0.0)];
    let dpsi = [
        Complex64::new(-t.sin(), 0.0),
        Complex64::from_polar(t.cos(), t) + Complex64::new(0.0, 1.0) * Complex64::from_polar(t.sin(), t),
        Complex64::new(0.0, 0.0),
    ];
    let rho = HermitianOperator::from_fn(3, |i, j| psi[i] * psi[j].conj()).unwrap();
    let drho = HermitianOperator::from_fn(3, |i, j| dpsi[i] * psi[j].conj() + psi[i] * dpsi[j].conj()).unwrap();
    let norm: f64 = dpsi.iter().map(|z| z.norm_sqr()).sum();
    let overlap: Complex64 = psi.iter().zip(&dpsi).map(|(a, b)| a.conj() * b).sum();
    let expected = 4.0 * (norm - overlap.norm_sqr());
    let q = QfiBundle::from_operators(&rho, std::slice::from_ref(&drho), DEFAULT_SLD_CUTOFF);
    assert!((q.qfi().get(0, 0) - expected).abs() < 1e-10);
    let l = &q.slds()[0];
    let tr_rho_l2 = (rho.matrix() * l.matrix() * l.matrix()).trace().re;
    assert!((tr_rho_l2 - expected).abs() < 1e-10);
}

#[test]
fn qfi_is_additive_over_copies() {
    let model = qubit_phase_dephasing();
    let two = tensor_model(&model, 2).unwrap();
    let theta = model.point(vec![0.3, 0.2]).unwrap();
    let q1 = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    let q2 = qfi_matrix(&two, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    let diff = &q2.qfi().clone() - &q1.qfi().scaled(2.0);
    assert!(diff.matrix().amax() < 1e-10);
}

#[test]
fn weak_commutativity_qubit() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![FRAC_PI_4, 0.3]).unwrap();
    let rho = model.state_at(&theta).unwrap();
    let q = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    assert!(weak_commutativity(&rho, &q.slds()[0], &q.slds()[1]) < 1e-9);
    assert_eq!(weak_commutativity(&rho, &q.slds()[0], &q.slds()[0]), 0.0);
}

fn point_source(dx: f64, q: f64) -> (StatisticalModel, ParamPoint, Povm) {
    let theta = ParamPoint::new([CENTROID, SEPARATION, INTENSITY], vec![0.0, dx, q]).unwrap();
    let cfg = PointSourceConfig::aligned(DEFAULT_N_MAX, &theta).unwrap();
    (point_source_model(cfg).unwrap(), theta, optimal_povm_point_sources(cfg).unwrap())
}

#[test]
fn weak_commutativity_point_sources_is_reported() {
    let (model, theta, _) = point_source(0.5, 0.3);
    let rho = model.state_at(&theta).unwrap();
    let q = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    let v = weak_commutativity(&rho, &q.slds()[0], &q.slds()[1]);
    assert!(v.is_finite() && v >= 0.0);
}

#[test]
fn separable_r_is_two() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![FRAC_PI_4, 0.3]).unwrap();
    let f = fisher_bundle(&model, &theta, &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
    let q = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    assert!((r_metric(f.fisher(), q.qfi(), 1).unwrap() - 2.0).abs() < 1e-9);
    assert!((r_metric(q.qfi(), q.qfi(), 1).unwrap() - 1.0).abs() < 1e-12);
    assert!((r_nuisance(q.qfi(), q.qfi(), 1).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn separable_r_is_two_across_phase_and_dephasing() {
    let model = qubit_phase_dephasing();
    for phi in [0.1, 0.5, FRAC_PI_4, 1.3, 2.5, -0.7] {
        for delta in [1e-3, 0.05, 0.4, 2.0] {
            let theta = model.point(vec![phi, delta]).unwrap();
            let f = fisher_bundle(&model, &theta, &separable_povm(), DEFAULT_P_CUTOFF).unwrap();
            let q = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
            let r = r_metric(f.fisher(), q.qfi(), 1).unwrap();
            assert!((r - 2.0).abs() < 1e-9, "phi {phi} delta {delta}: r = {r}");
        }
    }
}

#[test]
fn bell_r_at_moderate_dephasing() {
    let model = qubit_phase_dephasing();
    let two = tensor_model(&model, 2).unwrap();
    let theta = model.point(vec![FRAC_PI_4, 0.1]).unwrap();
    let f = fisher_bundle(&two, &theta, &bell_povm(), DEFAULT_P_CUTOFF).unwrap();
    let q = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    let r = r_metric(f.fisher(), q.qfi(), 2).unwrap();
    let expected = (1.0 - 2.0 * 0.4f64.exp()) / (1.0 - 2.0 * 0.2f64.exp());
    assert!((r - expected).abs() < 1e-10);
    assert!((r - 1.3748).abs() < 1e-4);
}

#[test]
fn singular_fisher_is_reported_with_condition_number() {
    let model = qubit_phase_dephasing();
    let theta = model.point(vec![0.3, 0.3]).unwrap();
    let f = fisher_bundle(&model, &theta, &Povm::unlabeled(vec![HermitianOperator::identity(2)]).unwrap(), 1e-12).unwrap();
    let q = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    let err = r_metric(f.fisher(), q.qfi(), 1).unwrap_err();
    assert!(matches!(err, Error::SingularFisher { .. }));
    assert!(err.to_string().contains("condition number"));
    assert!(r_nuisance(f.fisher(), q.qfi(), 0).is_err());
}

#[test]
fn quantum_bound_dominates_random_measurements() {
    for seed in 0..30 {
        let m = common::random_instance(seed, 2 + (seed as usize % 3), 1 + (seed as usize % 2), 3 + (seed as usize % 4));
        let q = QfiBundle::from_operators(m.rho(), m.derivatives(), DEFAULT_SLD_CUTOFF);
        assert!((q.qfi() - m.fisher()).min_eigenvalue() >= -1e-8);
        assert!(r_metric(m.fisher(), q.qfi(), 1).unwrap() >= 1.0 - 1e-9);
        for j in 0..m.num_params() {
            assert!(r_nuisance(m.fisher(), q.qfi(), j).unwrap() >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn point_source_ratios_are_at_least_one() {
    for (dx, q) in [(0.01, 0.5), (0.2, 0.3), (0.5, 0.1)] {
        let (model, theta, povm) = point_source(dx, q);
        let f = fisher_bundle(&model, &theta, &povm, DEFAULT_P_CUTOFF).unwrap();
        let qf = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
        assert!((qf.qfi() - f.fisher()).min_eigenvalue() >= -1e-8);
        assert!(r_metric(f.fisher(), qf.qfi(), 1).unwrap() >= 1.0 - 1e-9);
        for j in 0..3 {
            assert!(r_nuisance(f.fisher(), qf.qfi(), j).unwrap() >= 1.0 - 1e-9);
        }
    }
}

/// At `q = ½` the measurement leaves a third of the separation QFI unused as
/// `δx → 0`: `F_δxδx → 1/12` against `Q_δxδx → 1/4`.
#[test]
fn balanced_point_sources_separation_ratio() {
    let (model, theta, povm) = point_source(1e-2, 0.5);
    let f = fisher_bundle(&model, &theta, &povm, DEFAULT_P_CUTOFF).unwrap();
    let q = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
    assert!((q.qfi().get(1, 1) - 0.25).abs() < 1e-4);
    assert!((f.fisher().get(1, 1) - 1.0 / 12.0).abs() < 1e-4);
    assert!((r_nuisance(f.fisher(), q.qfi(), 1).unwrap() - 3.0).abs() < 1e-3);
    assert!((r_metric(f.fisher(), q.qfi(), 1).unwrap() - 1.0).abs() < 1e-3);
}

/// `r_δx` at `δx = 0.5` grows with `q` over {0.2, 0.5}.
#[test]
fn separation_ratio_depends_on_intensity() {
    let r = |q: f64| {
        let (model, theta, povm) = point_source(0.5, q);
        let f = fisher_bundle(&model, &theta, &povm, DEFAULT_P_CUTOFF).unwrap();
        let qf = qfi_matrix(&model, &theta, DEFAULT_SLD_CUTOFF).unwrap();
        r_nuisance(f.fisher(), qf.qfi(), 1).unwrap()
    };
    assert!(r(0.5) > r(0.2));
}
