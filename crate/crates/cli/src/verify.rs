//! Invariant suite behind `menos verify`. Each check reports its worst
//! observed value against a tolerance; nothing here panics or returns early.

use std::f64::consts::FRAC_PI_4;

use menos::builtin::point_sources::{
    hg_inner, optimal_povm_point_sources, optimal_weights, point_source_measurement, point_source_model, weight_orthonormality_residual,
    PointSourceConfig, CENTROID, DEFAULT_N_MAX, INTENSITY, SEPARATION,
};
use menos::builtin::qubit::{bell_povm, qubit_phase_dephasing, separable_povm};
use menos::fisher::{sld_residual, weak_commutativity, DEFAULT_SLD_CUTOFF};
use menos::linalg::linear_combination;
use menos::model::tensor_model;
use menos::oracle::noise_search_oracle;
use menos::random::{self, random_hermitian, random_instance, random_povm};
use menos::susceptibility::{finite_eps_quotient, g_matrix, sigma_single, x_scalar, xi_matrix};
use menos::{
    analyze, mix_povm, qfi_matrix, r_metric, validate_povm, DerivativeMode, HermitianOperator, Measurement, ParamPoint, QfiBundle,
    StatisticalModel,
};
use rand::Rng;
use serde::Serialize;

const ORACLE_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `value ≤ tolerance`.
    Max,
    /// Passes when `value ≥ tolerance`.
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub invariant: &'static str,
    pub passed: bool,
    pub value: f64,
    pub bound: Bound,
    pub tolerance: f64,
}

impl Check {
    fn at_most(module: &'static str, invariant: &'static str, value: f64, tolerance: f64) -> Self {
        Self { module, invariant, passed: value <= tolerance, value, bound: Bound::Max, tolerance }
    }

    fn at_least(module: &'static str, invariant: &'static str, value: f64, tolerance: f64) -> Self {
        Self { module, invariant, passed: value >= tolerance, value, bound: Bound::Min, tolerance }
    }

    /// Any evaluation error counts as a failure with a NaN value.
    fn from_result(module: &'static str, invariant: &'static str, bound: Bound, tolerance: f64, value: menos::Result<f64>) -> Self {
        match (value, bound) {
            (Ok(v), Bound::Max) => Self::at_most(module, invariant, v, tolerance),
            (Ok(v), Bound::Min) => Self::at_least(module, invariant, v, tolerance),
            (Err(_), _) => Self { module, invariant, passed: false, value: f64::NAN, bound, tolerance },
        }
    }
}

fn instance_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i)
}

/// Rejects NaN so a failed evaluation can never look like a pass.
fn finite(v: f64) -> menos::Result<f64> {
    if v.is_nan() {
        Err(menos::Error::InvalidArgument("NaN in check".into()))
    } else {
        Ok(v)
    }
}

/// `w·wᵀ = I` for the HG-mode weights.
pub fn weight_check(w: &[[f64; 4]; 4]) -> Check {
    Check::at_most("builtin-models", "weight_orthonormality", weight_orthonormality_residual(w), 1e-12)
}

fn linalg_checks(seed: u64) -> Vec<Check> {
    let mut r = random::rng(instance_seed(seed, 1));
    let mut recon = 0.0f64;
    let mut trace_gap = f64::INFINITY;
    for i in 0..20 {
        let h = random_hermitian(2 + i % 7, &mut r);
        let eig = h.eig();
        let err = (eig.reconstruct() - h.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        recon = recon.max(err / h.max_abs().max(1.0));
        trace_gap = trace_gap.min(h.trace_norm() - h.trace().abs());
    }
    vec![
        Check::at_most("linalg-core", "eigen_reconstruction", recon, 1e-10),
        Check::at_least("linalg-core", "trace_norm_dominates_trace", trace_gap, -1e-12),
    ]
}

fn state_and_derivative_errors(model: &StatisticalModel, theta: &ParamPoint) -> menos::Result<(f64, f64)> {
    let rho = model.state_at(theta)?;
    let state_err = (rho.trace() - 1.0).abs().max(-rho.min_eigenvalue());
    let analytic = model.derivatives_at(theta)?;
    let fd = model.with_mode(DerivativeMode::FiniteDifference { step: 1e-5 }).derivatives_at(theta)?;
    let deriv_err = analytic.iter().zip(&fd).map(|(a, n)| a.max_abs_diff(n).max(a.trace().abs())).fold(0.0, f64::max);
    Ok((state_err, deriv_err))
}

fn model_checks(seed: u64) -> Vec<Check> {
    let mut r = random::rng(instance_seed(seed, 2));
    let qubit = qubit_phase_dephasing();
    let qubit_errors = || -> menos::Result<(f64, f64)> {
        let two = tensor_model(&qubit, 2)?;
        let (mut s, mut d) = (0.0f64, 0.0f64);
        for _ in 0..10 {
            let theta = qubit.point(vec![r.random_range(-3.0..3.0), r.random_range(0.01..3.0)])?;
            for m in [&qubit, &two] {
                let (a, b) = state_and_derivative_errors(m, &theta)?;
                s = s.max(a);
                d = d.max(b);
            }
        }
        Ok((s, d))
    }();
    let point_errors = || -> menos::Result<(f64, f64)> {
        let (mut s, mut d) = (0.0f64, 0.0f64);
        for _ in 0..3 {
            let theta = ParamPoint::new(
                [CENTROID, SEPARATION, INTENSITY],
                vec![r.random_range(-0.3..0.3), r.random_range(0.02..0.8), r.random_range(0.1..0.9)],
            )?;
            let model = point_source_model(PointSourceConfig::aligned(DEFAULT_N_MAX, &theta)?)?;
            let (a, b) = state_and_derivative_errors(&model, &theta)?;
            s = s.max(a);
            d = d.max(b);
        }
        Ok((s, d))
    }();
    let povm_errors = || -> menos::Result<f64> {
        let mut worst = 0.0f64;
        let mut povms = vec![separable_povm(), bell_povm()];
        povms.push(optimal_povm_point_sources(PointSourceConfig::new(DEFAULT_N_MAX, 0.0))?);
        for _ in 0..5 {
            let dim = r.random_range(2..5);
            let a = random_povm(dim, r.random_range(1..5), &mut r)?;
            let b = random_povm(dim, r.random_range(1..5), &mut r)?;
            povms.push(mix_povm(&a, &b, r.random_range(0.0..=1.0))?);
        }
        for p in &povms {
            let report = validate_povm(p, 1e-9);
            worst = worst.max(report.completeness_residual).max(-report.min_eigenvalue);
        }
        Ok(worst)
    }();
    let split = |r: &menos::Result<(f64, f64)>, first: bool| match r {
        Ok((a, b)) => Ok(if first { *a } else { *b }),
        Err(e) => Err(e.clone()),
    };
    vec![
        Check::from_result("quantum-model", "qubit_state_valid", Bound::Max, 1e-10, split(&qubit_errors, true)),
        Check::from_result("quantum-model", "qubit_derivatives_match_fd", Bound::Max, 1e-7, split(&qubit_errors, false)),
        Check::from_result("quantum-model", "point_source_state_valid", Bound::Max, 1e-10, split(&point_errors, true)),
        Check::from_result("quantum-model", "point_source_derivatives_match_fd", Bound::Max, 1e-7, split(&point_errors, false)),
        Check::from_result("quantum-model", "povm_validity", Bound::Max, 1e-9, povm_errors),
    ]
}

fn r_ent_closed_form(delta: f64) -> f64 {
    (1.0 - 2.0 * (4.0 * delta).exp()) / (1.0 - 2.0 * (2.0 * delta).exp())
}

fn random_instances(seed: u64, count: usize) -> Vec<menos::Result<Measurement>> {
    let shapes = [(2, 1, 3), (2, 2, 4), (3, 2, 4), (3, 3, 5), (4, 2, 6)];
    (0..count)
        .map(|i| {
            let (d, p, e) = shapes[i % shapes.len()];
            random_instance(instance_seed(seed, 100 + i as u64), d, p, e, 1e6)
        })
        .collect()
}

fn fisher_checks(seed: u64, instances: &[menos::Result<Measurement>]) -> Vec<Check> {
    let qubit = qubit_phase_dephasing();
    let grid: Vec<f64> = (0..20).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 19.0)).collect();
    let ratios = || -> menos::Result<(f64, f64)> {
        let two = tensor_model(&qubit, 2)?;
        let (mut sep, mut ent) = (0.0f64, 0.0f64);
        for &d in &grid {
            let theta = qubit.point(vec![FRAC_PI_4, d])?;
            let q = qfi_matrix(&qubit, &theta, DEFAULT_SLD_CUTOFF)?;
            let f_sep = Measurement::at(&qubit, &theta, &separable_povm())?;
            let f_ent = Measurement::at(&two, &theta, &bell_povm())?;
            sep = sep.max((r_metric(f_sep.fisher(), q.qfi(), 1)? - 2.0).abs());
            ent = ent.max((r_metric(f_ent.fisher(), q.qfi(), 2)? - r_ent_closed_form(d)).abs());
        }
        Ok((finite(sep)?, finite(ent)?))
    }();
    let qfi = || -> menos::Result<(f64, f64)> {
        let (mut min_eig, mut residual) = (f64::INFINITY, 0.0f64);
        for m in instances.iter().flatten() {
            let q = QfiBundle::from_operators(m.rho(), m.derivatives(), DEFAULT_SLD_CUTOFF);
            let diff = menos::RealSymmetricMatrix::new(q.qfi().matrix() - m.fisher().matrix())?;
            min_eig = min_eig.min(diff.min_eigenvalue());
            for (d, l) in m.derivatives().iter().zip(q.slds()) {
                residual = residual.max(sld_residual(m.rho(), d, l));
            }
        }
        Ok((min_eig, residual))
    }();
    let mut r = random::rng(instance_seed(seed, 3));
    let commutativity = || -> menos::Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let theta = qubit.point(vec![r.random_range(-3.0..3.0), r.random_range(0.01..3.0)])?;
            let q = qfi_matrix(&qubit, &theta, DEFAULT_SLD_CUTOFF)?;
            let rho = qubit.state_at(&theta)?;
            worst = worst.max(weak_commutativity(&rho, &q.slds()[0], &q.slds()[1]));
        }
        finite(worst)
    }();
    let all_present = instances.iter().all(|m| m.is_ok());
    let pick = |r: &menos::Result<(f64, f64)>, first: bool| match r {
        Ok(_) if !all_present => Err(menos::Error::InvalidArgument("missing instance".into())),
        Ok((a, b)) => Ok(if first { *a } else { *b }),
        Err(e) => Err(e.clone()),
    };
    vec![
        Check::from_result("fisher-info", "separable_r_equals_two", Bound::Max, 1e-9, ratios.clone().map(|x| x.0)),
        Check::from_result("fisher-info", "bell_r_closed_form", Bound::Max, 1e-8, ratios.map(|x| x.1)),
        Check::from_result("fisher-info", "qfi_dominates_fisher", Bound::Min, -1e-8, pick(&qfi, true)),
        Check::from_result("fisher-info", "sld_equation_residual", Bound::Max, 1e-9, pick(&qfi, false)),
        Check::from_result("fisher-info", "qubit_weak_commutativity", Bound::Max, 1e-9, commutativity),
    ]
}

fn random_invertible<R: Rng>(p: usize, r: &mut R) -> nalgebra::DMatrix<f64> {
    loop {
        let k = nalgebra::DMatrix::from_fn(p, p, |_, _| r.random_range(-1.0..1.0));
        let s = k.clone().svd(false, false).singular_values;
        if s.min() > 0.2 {
            return k;
        }
    }
}

fn reparametrized(meas: &Measurement, k: &nalgebra::DMatrix<f64>) -> menos::Result<Measurement> {
    let derivs: Vec<&HermitianOperator> = meas.derivatives().iter().collect();
    let new = (0..meas.num_params())
        .map(|i| {
            let w: Vec<f64> = (0..meas.num_params()).map(|j| k[(i, j)]).collect();
            linear_combination(&w, &derivs)
        })
        .collect();
    Measurement::new(meas.rho().clone(), new, meas.povm().clone(), 1e-12)
}

struct XIdentities {
    self_noise: f64,
    xi_trace: f64,
    reparam: f64,
    eps_decade: f64,
}

fn x_identities(seed: u64, instances: &[menos::Result<Measurement>]) -> menos::Result<XIdentities> {
    let mut out = XIdentities { self_noise: 0.0, xi_trace: 0.0, reparam: 0.0, eps_decade: 0.0 };
    let mut r = random::rng(instance_seed(seed, 4));
    for m in instances {
        let m = m.as_ref().map_err(|e| e.clone())?;
        let a = m.a_tensor();
        let scale = |x: f64| x.abs().max(1.0);
        out.self_noise = out.self_noise.max(finite(m.x(m.povm())?.abs())?);
        let noise = random_povm(m.rho().dim(), m.povm().len(), &mut r)?;
        let g = g_matrix(&a, &noise)?;
        let x = x_scalar(m.fisher(), &g)?;
        out.xi_trace = out.xi_trace.max(finite((xi_matrix(m.fisher(), &g)?.trace() - x).abs() / scale(x))?);
        let k = random_invertible(m.num_params(), &mut r);
        out.reparam = out.reparam.max(finite((reparametrized(m, &k)?.x(&noise)? - x).abs() / scale(x))?);
        let errs =
            [1e-4, 1e-5].iter().map(|&eps| Ok((finite_eps_quotient(m, &noise, eps)? - x).abs())).collect::<menos::Result<Vec<f64>>>()?;
        // a tenfold smaller ε should leave a tenth of the error, unless it is
        // already at round-off level
        let ratio = if errs[1] < 1e-9 { 0.0 } else { errs[1] / errs[0] };
        out.eps_decade = out.eps_decade.max(finite(ratio)?);
    }
    Ok(out)
}

struct BoundOrdering {
    collapse: f64,
    ordering: f64,
    oracle: f64,
}

fn bound_checks(seed: u64, instances: &[menos::Result<Measurement>]) -> menos::Result<BoundOrdering> {
    let mut out = BoundOrdering { collapse: 0.0, ordering: 0.0, oracle: 0.0 };
    for i in 0..4 {
        let dim = 2 + i % 3;
        let m = random_instance(instance_seed(seed, 200 + i as u64), dim, 1, dim + 1, 1e6)?;
        let sigma = sigma_single(&m)?;
        let rep = analyze(&m)?;
        let gap = (rep.sigma_lower - sigma).abs().max((rep.sigma_upper - sigma).abs());
        out.collapse = out.collapse.max(finite(gap / sigma.abs().max(1.0))?);
    }
    for (i, m) in instances.iter().enumerate() {
        let m = m.as_ref().map_err(|e| e.clone())?;
        let rep = analyze(m)?;
        let slack = 1e-9 * rep.sigma_upper.abs().max(1.0);
        let violation = (rep.attainable_lower - rep.sigma_lower).max(rep.sigma_lower - rep.sigma_upper);
        out.ordering = out.ordering.max(finite(violation / slack)?);
        let best = noise_search_oracle(m, ORACLE_SAMPLES, instance_seed(seed, 300 + i as u64))?.best_x;
        let violation = (rep.attainable_lower - best).max(best - rep.sigma_upper);
        out.oracle = out.oracle.max(finite(violation / slack)?);
    }
    Ok(out)
}

fn point_source_checks() -> Vec<Check> {
    let hg = || -> menos::Result<f64> {
        let mut worst = 0.0f64;
        for x_m in [0.0, 0.7] {
            for n in 0..=8 {
                for m in n..=8 {
                    let target = if n == m { 1.0 } else { 0.0 };
                    worst = worst.max((hg_inner(n, m, x_m)? - target).abs());
                }
            }
        }
        finite(worst)
    }();
    let gap = || -> menos::Result<f64> {
        let mut worst = 0.0f64;
        for (dx, q) in [(0.05, 0.5), (0.3, 0.3), (0.1, 0.2)] {
            let theta = ParamPoint::new([CENTROID, SEPARATION, INTENSITY], vec![0.0, dx, q])?;
            let (_, m) = point_source_measurement(DEFAULT_N_MAX, &theta)?;
            let rep = analyze(&m)?;
            worst = worst.max((rep.sigma_upper - rep.sigma_lower) / rep.sigma_upper);
        }
        finite(worst)
    }();
    vec![
        Check::from_result("builtin-models", "hg_orthonormality", Bound::Max, 1e-12, hg),
        weight_check(&optimal_weights()),
        Check::from_result("builtin-models", "point_source_bound_gap", Bound::Max, 0.01, gap),
    ]
}

/// Runs every invariant. Random instances depend on `seed`; the verdicts
/// should not.
pub fn run_verify(seed: u64) -> Vec<Check> {
    let instances = random_instances(seed, 10);
    let mut checks = linalg_checks(seed);
    checks.extend(model_checks(seed));
    checks.extend(fisher_checks(seed, &instances));

    const S: &str = "susceptibility";
    let ids = x_identities(seed, &instances);
    let field = |f: fn(&XIdentities) -> f64| ids.as_ref().map(f).map_err(|e| e.clone());
    checks.push(Check::from_result(S, "self_noise_nullity", Bound::Max, 1e-9, field(|x| x.self_noise)));
    checks.push(Check::from_result(S, "xi_trace_equals_x", Bound::Max, 1e-10, field(|x| x.xi_trace)));
    checks.push(Check::from_result(S, "reparametrization_invariance", Bound::Max, 1e-8, field(|x| x.reparam)));
    checks.push(Check::from_result(S, "finite_eps_linear_convergence", Bound::Max, 0.2, field(|x| x.eps_decade)));

    let bounds = bound_checks(seed, &instances);
    let field = |f: fn(&BoundOrdering) -> f64| bounds.as_ref().map(f).map_err(|e| e.clone());
    checks.push(Check::from_result(S, "single_parameter_collapse", Bound::Max, 1e-10, field(|b| b.collapse)));
    // violations are measured in units of a 1e-9 relative slack
    checks.push(Check::from_result(S, "bound_ordering", Bound::Max, 1.0, field(|b| b.ordering)));
    checks.push(Check::from_result(S, "oracle_within_bounds", Bound::Max, 1.0, field(|b| b.oracle)));

    checks.extend(point_source_checks());
    checks
}
