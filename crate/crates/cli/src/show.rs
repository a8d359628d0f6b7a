//! `menos show-model`: the state, its Fisher information and its quantum
//! Fisher information at one point.

use std::fmt::Write;

use menos::fisher::DEFAULT_SLD_CUTOFF;
use menos::{qfi_matrix, HermitianOperator, RealSymmetricMatrix};

use crate::error::CliError;
use crate::spec::ModelSpec;
use crate::sweep::setup;

fn real_matrix(out: &mut String, m: &RealSymmetricMatrix) {
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| format!("{:>24.16e}", m.get(i, j))).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

fn complex_matrix(out: &mut String, h: &HermitianOperator) {
    let m = h.matrix();
    for i in 0..h.dim() {
        let row: Vec<String> = (0..h.dim()).map(|j| format!("{:+.6e}{:+.6e}i", m[(i, j)].re, m[(i, j)].im)).collect();
        let _ = writeln!(out, "  {}", row.join("  "));
    }
}

pub fn show_model(spec: &ModelSpec) -> Result<String, CliError> {
    let theta = spec.point(None)?;
    spec.check_point(&theta)?;
    let numerical = |e: menos::Error| CliError::Numerical(e.to_string());
    let s = setup(spec, &theta).map_err(numerical)?;
    let rho = s.model.state_at(&theta).map_err(numerical)?;
    let q = qfi_matrix(&s.model, &theta, DEFAULT_SLD_CUTOFF).map_err(numerical)?;

    let mut out = String::new();
    let point: Vec<String> = theta.names().iter().zip(theta.values()).map(|(n, v)| format!("{n}={v}")).collect();
    let _ = writeln!(out, "model: {}", spec.model.name());
    let _ = writeln!(out, "measurement: {} ({} outcomes)", spec.measurement.name(), s.povm.len());
    let _ = writeln!(out, "point: {}", point.join(", "));
    let _ = writeln!(out, "rho ({}x{}):", rho.dim(), rho.dim());
    complex_matrix(&mut out, &rho);
    match s.measurement(&theta) {
        Ok(meas) => {
            let _ = writeln!(out, "F:");
            real_matrix(&mut out, meas.fisher());
        }
        Err(e) => {
            let _ = writeln!(out, "F: unavailable ({e})");
        }
    }
    let _ = writeln!(out, "Q:");
    real_matrix(&mut out, q.qfi());
    Ok(out)
}
