//! Parametrized quantum statistical models `θ ↦ ρ_θ` and their derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{linear_combination, HermitianOperator};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A point in parameter space with named coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    values: Vec<f64>,
    names: Vec<String>,
}

impl ParamPoint {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, values: Vec<f64>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "parameter point needs P >= 1 names and values of equal length (got {} names, {} values)",
                names.len(),
                values.len()
            )));
        }
        Ok(Self { values, names })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|k| self.values[k])
    }

    /// Copy with coordinate `index` shifted by `delta`.
    pub fn shifted(&self, index: usize, delta: f64) -> Self {
        let mut values = self.values.clone();
        values[index] += delta;
        Self { values, names: self.names.clone() }
    }
}

/// A family of density operators on a fixed Hilbert space.
///
/// Implementors provide the state map and the domain check; analytic
/// derivatives are optional.
pub trait ModelFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn param_names(&self) -> Vec<String>;

    fn check_domain(&self, theta: &[f64]) -> Result<()>;

    /// Evaluated only at points that passed `check_domain`.
    fn state(&self, theta: &[f64]) -> Result<HermitianOperator>;

    /// Analytic `∂_j ρ`, one per parameter, if the family knows them.
    fn analytic_derivatives(&self, _theta: &[f64]) -> Option<Result<Vec<HermitianOperator>>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Second-order central differences with the given step.
    FiniteDifference {
        step: f64,
    },
}

/// A statistical model together with the rule used to differentiate it.
#[derive(Clone)]
pub struct StatisticalModel {
    family: Arc<dyn ModelFamily>,
    mode: DerivativeMode,
}

impl fmt::Debug for StatisticalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticalModel").field("dim", &self.dim()).field("params", &self.param_names()).field("mode", &self.mode).finish()
    }
}

impl StatisticalModel {
    pub fn new(family: impl ModelFamily + 'static, mode: DerivativeMode) -> Self {
        Self { family: Arc::new(family), mode }
    }

    pub fn from_shared(family: Arc<dyn ModelFamily>, mode: DerivativeMode) -> Self {
        Self { family, mode }
    }

    pub fn with_mode(&self, mode: DerivativeMode) -> Self {
        Self { family: Arc::clone(&self.family), mode }
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn num_params(&self) -> usize {
        self.family.param_names().len()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.family.param_names()
    }

    /// Builds a point from values ordered as `param_names()`.
    pub fn point(&self, values: Vec<f64>) -> Result<ParamPoint> {
        ParamPoint::new(self.param_names(), values)
    }

    /// Checks parameter names and the domain without evaluating the state.
    pub fn check_point(&self, theta: &ParamPoint) -> Result<()> {
        let names = self.param_names();
        if theta.names() != names.as_slice() {
            return Err(Error::InvalidArgument(format!("parameter names {:?} do not match model parameters {:?}", theta.names(), names)));
        }
        self.family.check_domain(theta.values())
    }

    pub fn state_at(&self, theta: &ParamPoint) -> Result<HermitianOperator> {
        self.check_point(theta)?;
        self.family.state(theta.values())
    }

    pub fn derivatives_at(&self, theta: &ParamPoint) -> Result<Vec<HermitianOperator>> {
        self.check_point(theta)?;
        match self.mode {
            DerivativeMode::Analytic => match self.family.analytic_derivatives(theta.values()) {
                Some(d) => d,
                None => self.central_differences(theta, DEFAULT_FD_STEP),
            },
            DerivativeMode::FiniteDifference { step } => self.central_differences(theta, step),
        }
    }

    fn central_differences(&self, theta: &ParamPoint, step: f64) -> Result<Vec<HermitianOperator>> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
        }
        (0..theta.len())
            .map(|j| {
                let plus = theta.shifted(j, step);
                let minus = theta.shifted(j, -step);
                self.family.check_domain(plus.values()).map_err(|e| stencil_error(j, e))?;
                self.family.check_domain(minus.values()).map_err(|e| stencil_error(j, e))?;
                let rp = self.family.state(plus.values())?;
                let rm = self.family.state(minus.values())?;
                Ok(linear_combination(&[0.5 / step, -0.5 / step], &[&rp, &rm]))
            })
            .collect()
    }
}

fn stencil_error(j: usize, e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Domain(format!("central stencil for parameter {j} leaves the domain: {msg}")),
        other => other,
    }
}

/// `m`-fold tensor power of a model, with derivatives by the product rule.
struct TensorPower {
    base: StatisticalModel,
    copies: usize,
}

impl TensorPower {
    fn base_point(&self, theta: &[f64]) -> Result<ParamPoint> {
        self.base.point(theta.to_vec())
    }
}

fn tensor_power(op: &HermitianOperator, copies: usize) -> HermitianOperator {
    let mut out = op.clone();
    for _ in 1..copies {
        out = out.tensor(op);
    }
    out
}

impl ModelFamily for TensorPower {
    fn dim(&self) -> usize {
        self.base.dim().pow(self.copies as u32)
    }

    fn param_names(&self) -> Vec<String> {
        self.base.param_names()
    }

    fn check_domain(&self, theta: &[f64]) -> Result<()> {
        self.base.family.check_domain(theta)
    }

    fn state(&self, theta: &[f64]) -> Result<HermitianOperator> {
        let rho = self.base.state_at(&self.base_point(theta)?)?;
        Ok(tensor_power(&rho, self.copies))
    }

    fn analytic_derivatives(&self, theta: &[f64]) -> Option<Result<Vec<HermitianOperator>>> {
        let run = || -> Result<Vec<HermitianOperator>> {
            let point = self.base_point(theta)?;
            let rho = self.base.state_at(&point)?;
            let derivs = self.base.derivatives_at(&point)?;
            Ok(derivs
                .iter()
                .map(|d| {
                    // Σ_slot ρ ⊗ … ⊗ ∂ρ ⊗ … ⊗ ρ
                    let mut total: Option<HermitianOperator> = None;
                    for slot in 0..self.copies {
                        let mut term: Option<HermitianOperator> = None;
                        for k in 0..self.copies {
                            let factor = if k == slot { d } else { &rho };
                            term = Some(match term {
                                None => factor.clone(),
                                Some(t) => t.tensor(factor),
                            });
                        }
                        let term = term.expect("copies >= 1");
                        total = Some(match total {
                            None => term,
                            Some(acc) => &acc + &term,
                        });
                    }
                    total.expect("copies >= 1")
                })
                .collect())
        };
        Some(run())
    }
}

/// The `m`-copy model `ρ_θ^{⊗m}`.
pub fn tensor_model(model: &StatisticalModel, copies: usize) -> Result<StatisticalModel> {
    if copies == 0 {
        return Err(Error::InvalidArgument("tensor_model needs at least one copy".into()));
    }
    if copies == 1 {
        return Ok(model.clone());
    }
    Ok(StatisticalModel::new(TensorPower { base: model.clone(), copies }, DerivativeMode::Analytic))
}
