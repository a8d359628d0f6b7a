//! Parameter sweeps: one CSV row per grid point, evaluated in parallel and
//! written in grid order.

use std::io::Write;

use menos::builtin::point_sources::{self, optimal_povm_point_sources, point_source_model, PointSourceConfig};
use menos::builtin::qubit::{bell_povm, qubit_phase_dephasing, separable_povm};
use menos::fisher::{DEFAULT_P_CUTOFF, DEFAULT_SLD_CUTOFF};
use menos::model::tensor_model;
use menos::oracle::noise_search_oracle;
use menos::{analyze, qfi_matrix, r_metric, r_nuisance, Measurement, ParamPoint, Povm, RealSymmetricMatrix, StatisticalModel};
use rayon::prelude::*;

use crate::error::CliError;
use crate::spec::{MeasurementId, ModelId, ModelSpec, SweepSpec};

/// The model that is actually measured (two copies for the Bell
/// measurement), the POVM acting on it and the probability cutoff.
pub struct Setup {
    pub model: StatisticalModel,
    pub povm: Povm,
    pub p_cutoff: f64,
}

impl Setup {
    pub fn measurement(&self, theta: &ParamPoint) -> menos::Result<Measurement> {
        Measurement::at_with_cutoff(&self.model, theta, &self.povm, self.p_cutoff)
    }
}

pub fn setup(spec: &ModelSpec, theta: &ParamPoint) -> menos::Result<Setup> {
    match (spec.model, spec.measurement) {
        (ModelId::PhaseDephasing, MeasurementId::Bell) => {
            Ok(Setup { model: tensor_model(&qubit_phase_dephasing(), 2)?, povm: bell_povm(), p_cutoff: DEFAULT_P_CUTOFF })
        }
        (ModelId::PhaseDephasing, _) => Ok(Setup { model: qubit_phase_dephasing(), povm: separable_povm(), p_cutoff: DEFAULT_P_CUTOFF }),
        (ModelId::PointSources, _) => {
            let config = PointSourceConfig::aligned(spec.n_max, theta)?;
            Ok(Setup { model: point_source_model(config)?, povm: optimal_povm_point_sources(config)?, p_cutoff: point_sources::P_CUTOFF })
        }
    }
}

fn upper_triangle_names(prefix: &str, names: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i..] {
            out.push(format!("{prefix}_{a}_{b}"));
        }
    }
    out
}

fn upper_triangle(m: &RealSymmetricMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(m.get(i, j));
        }
    }
    out
}

pub fn header(spec: &ModelSpec) -> Vec<String> {
    let names = spec.param_names();
    let mut h = vec!["sweep_value".to_string()];
    h.extend(upper_triangle_names("F", names));
    h.extend(upper_triangle_names("Q", names));
    h.push("r_multi".into());
    h.extend(names.iter().map(|n| format!("r_nuisance_{n}")));
    h.push("sigma_lower".into());
    h.push("sigma_upper".into());
    // frame parameters are rotated combinations, so they are numbered
    h.extend((0..names.len()).map(|k| format!("sigma_{k}")));
    h.push("oracle_best_X".into());
    h.push("condition_number_F".into());
    h.push("error".into());
    h
}

/// One evaluated grid point. Cells the evaluation did not reach are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_value: f64,
    pub f: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub r_multi: Option<f64>,
    pub r_nuisance: Option<Vec<f64>>,
    pub sigma_lower: Option<f64>,
    pub sigma_upper: Option<f64>,
    pub sigmas: Option<Vec<f64>>,
    pub oracle_best_x: Option<f64>,
    pub condition_number: Option<f64>,
    pub error: Option<String>,
}

impl Row {
    fn empty(sweep_value: f64) -> Self {
        Self {
            sweep_value,
            f: None,
            q: None,
            r_multi: None,
            r_nuisance: None,
            sigma_lower: None,
            sigma_upper: None,
            sigmas: None,
            oracle_best_x: None,
            condition_number: None,
            error: None,
        }
    }

    pub fn record(&self, num_params: usize) -> Vec<String> {
        let cell = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        let cells = |v: &Option<Vec<f64>>, n: usize| match v {
            Some(xs) => xs.iter().map(|&x| format_float(x)).collect(),
            None => vec![String::new(); n],
        };
        let tri = num_params * (num_params + 1) / 2;
        let mut out = vec![format_float(self.sweep_value)];
        out.extend(cells(&self.f, tri));
        out.extend(cells(&self.q, tri));
        out.push(cell(self.r_multi));
        out.extend(cells(&self.r_nuisance, num_params));
        out.push(cell(self.sigma_lower));
        out.push(cell(self.sigma_upper));
        out.extend(cells(&self.sigmas, num_params));
        out.push(cell(self.oracle_best_x));
        out.push(cell(self.condition_number));
        out.push(self.error.clone().unwrap_or_default());
        out
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fill(row: &mut Row, spec: &SweepSpec, theta: &ParamPoint, index: usize) -> menos::Result<()> {
    let s = setup(&spec.model, theta)?;
    let q = qfi_matrix(&s.model, theta, DEFAULT_SLD_CUTOFF)?;
    row.q = Some(upper_triangle(q.qfi()));
    let meas = s.measurement(theta)?;
    let f = meas.fisher();
    row.f = Some(upper_triangle(f));
    row.condition_number = Some(f.condition_number());
    row.r_multi = Some(r_metric(f, q.qfi(), 1)?);
    row.r_nuisance = Some((0..f.dim()).map(|j| r_nuisance(f, q.qfi(), j)).collect::<menos::Result<_>>()?);
    let report = analyze(&meas)?;
    row.sigma_lower = Some(report.sigma_lower);
    row.sigma_upper = Some(report.sigma_upper);
    row.sigmas = Some(report.per_parameter_sigmas.clone());
    if spec.oracle_samples > 0 {
        let seed = spec.seed.wrapping_add(index as u64);
        row.oracle_best_x = Some(noise_search_oracle(&meas, spec.oracle_samples, seed)?.best_x);
    }
    Ok(())
}

pub fn evaluate_point(spec: &SweepSpec, index: usize, value: f64) -> Row {
    let mut row = Row::empty(value);
    let result = spec
        .model
        .point(Some((&spec.sweep.param, value)))
        .map_err(|e| e.to_string())
        .and_then(|theta| fill(&mut row, spec, &theta, index).map_err(|e| e.to_string()));
    if let Err(message) = result {
        row.error = Some(message);
    }
    row
}

pub fn evaluate(spec: &SweepSpec) -> Result<Vec<Row>, CliError> {
    let values = spec.sweep.values();
    let run = || values.par_iter().enumerate().map(|(i, &v)| evaluate_point(spec, i, v)).collect::<Vec<_>>();
    if spec.workers == 0 {
        return Ok(run());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| CliError::InvalidSpec(format!("cannot start {} workers: {e}", spec.workers)))?;
    Ok(pool.install(run))
}

pub fn write_csv<W: Write>(spec: &ModelSpec, rows: &[Row], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(header(spec))?;
    let p = spec.param_names().len();
    for row in rows {
        w.write_record(row.record(p))?;
    }
    w.flush()?;
    Ok(())
}

/// Evaluates the sweep and writes the CSV. Fails with a numerical error
/// only if no grid point could be evaluated.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<Row>, CliError> {
    let rows = evaluate(spec)?;
    match &spec.out {
        Some(path) => write_csv(&spec.model, &rows, std::fs::File::create(path)?)?,
        None => write_csv(&spec.model, &rows, std::io::stdout().lock())?,
    }
    if rows.iter().all(|r| r.error.is_some()) {
        let first = rows[0].error.clone().unwrap_or_default();
        return Err(CliError::Numerical(format!("no sweep point could be evaluated; first error: {first}")));
    }
    Ok(rows)
}
