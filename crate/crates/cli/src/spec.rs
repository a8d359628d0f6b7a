//! Sweep specifications: the TOML config file, flag overrides and the
//! resolved, validated form.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use menos::builtin::point_sources::{self, PointSourceConfig, DEFAULT_N_MAX};
use menos::builtin::qubit;
use menos::{ParamPoint, StatisticalModel};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    PhaseDephasing,
    PointSources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementId {
    /// Single-qubit projective measurement.
    Separable,
    /// Bell-basis measurement on two copies.
    Bell,
    /// Four optimal HG-mode projectors plus their complement.
    OptimalHg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[serde(alias = "lin")]
    Linear,
    Log,
}

impl ModelId {
    pub fn name(self) -> &'static str {
        match self {
            ModelId::PhaseDephasing => "phase-dephasing",
            ModelId::PointSources => "point-sources",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::PhaseDephasing => &[qubit::PHASE, qubit::DEPHASING],
            ModelId::PointSources => &[point_sources::CENTROID, point_sources::SEPARATION, point_sources::INTENSITY],
        }
    }

    fn default_value(self, name: &str) -> Option<f64> {
        match (self, name) {
            (ModelId::PhaseDephasing, qubit::PHASE) => Some(FRAC_PI_4),
            (ModelId::PointSources, point_sources::CENTROID) => Some(0.0),
            (ModelId::PointSources, point_sources::INTENSITY) => Some(0.5),
            _ => None,
        }
    }

    fn default_measurement(self) -> MeasurementId {
        match self {
            ModelId::PhaseDephasing => MeasurementId::Separable,
            ModelId::PointSources => MeasurementId::OptimalHg,
        }
    }

    fn supports(self, m: MeasurementId) -> bool {
        matches!(
            (self, m),
            (ModelId::PhaseDephasing, MeasurementId::Separable | MeasurementId::Bell) | (ModelId::PointSources, MeasurementId::OptimalHg)
        )
    }

    /// Dephasing and separation are swept toward zero, so they default to a log grid.
    fn default_scale(self, param: &str) -> Scale {
        match (self, param) {
            (ModelId::PhaseDephasing, qubit::DEPHASING) | (ModelId::PointSources, point_sources::SEPARATION) => Scale::Log,
            _ => Scale::Linear,
        }
    }
}

impl MeasurementId {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementId::Separable => "separable",
            MeasurementId::Bell => "bell",
            MeasurementId::OptimalHg => "optimal-hg",
        }
    }
}

/// `[sweep]` table of the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Option<Scale>,
}

/// Config file contents. Every key is optional; flags override them.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<ModelId>,
    pub measurement: Option<MeasurementId>,
    #[serde(default)]
    pub fix: BTreeMap<String, f64>,
    pub sweep: Option<SweepTable>,
    pub oracle_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub n_max: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::InvalidSpec(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::InvalidSpec(format!("config: {e}")))
    }
}

/// Values given on the command line; `None` leaves the config value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelId>,
    pub measurement: Option<MeasurementId>,
    pub fix: Vec<String>,
    pub sweep: Option<String>,
    pub oracle_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRange {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.count - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Everything needed to build a model, a POVM and a parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub model: ModelId,
    pub measurement: MeasurementId,
    pub fixed: BTreeMap<String, f64>,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: ModelSpec,
    pub sweep: SweepRange,
    pub oracle_samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Zero means one worker per core.
    pub workers: usize,
}

fn parse_number(field: &str, text: &str) -> Result<f64, CliError> {
    let v: f64 = text.trim().parse().map_err(|_| CliError::InvalidSpec(format!("{field}: '{text}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::InvalidSpec(format!("{field}: value must be finite")));
    }
    Ok(v)
}

pub fn parse_fix(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text.split_once('=').ok_or_else(|| CliError::InvalidSpec(format!("--fix expects name=value, got '{text}'")))?;
    Ok((name.trim().to_string(), parse_number("--fix", value)?))
}

/// `name:start:stop:count[:log|:lin]`.
pub fn parse_sweep(text: &str) -> Result<SweepTable, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if !(4..=5).contains(&parts.len()) {
        return Err(CliError::InvalidSpec(format!("--sweep expects name:start:stop:count[:log], got '{text}'")));
    }
    let count = parts[3].trim().parse().map_err(|_| CliError::InvalidSpec(format!("--sweep: count '{}' is not an integer", parts[3])))?;
    let scale = match parts.get(4).map(|s| s.trim()) {
        None => None,
        Some("log") => Some(Scale::Log),
        Some("lin") | Some("linear") => Some(Scale::Linear),
        Some(other) => return Err(CliError::InvalidSpec(format!("--sweep: unknown scale '{other}'"))),
    };
    Ok(SweepTable {
        param: parts[0].trim().to_string(),
        start: parse_number("--sweep start", parts[1])?,
        stop: parse_number("--sweep stop", parts[2])?,
        count,
        scale,
    })
}

impl ModelSpec {
    pub fn resolve(file: &ConfigFile, flags: &Overrides) -> Result<Self, CliError> {
        let model = flags
            .model
            .or(file.model)
            .ok_or_else(|| CliError::InvalidSpec("no model given (use --model or `model` in the config)".into()))?;
        let measurement = flags.measurement.or(file.measurement).unwrap_or_else(|| model.default_measurement());
        if !model.supports(measurement) {
            return Err(CliError::InvalidSpec(format!("measurement {} is not defined for model {}", measurement.name(), model.name())));
        }
        let mut fixed = file.fix.clone();
        for f in &flags.fix {
            let (name, value) = parse_fix(f)?;
            fixed.insert(name, value);
        }
        if let Some(unknown) = fixed.keys().find(|k| !model.param_names().contains(&k.as_str())) {
            return Err(CliError::InvalidSpec(format!(
                "unknown parameter '{unknown}' for model {} (parameters: {})",
                model.name(),
                model.param_names().join(", ")
            )));
        }
        let n_max = file.n_max.unwrap_or(DEFAULT_N_MAX);
        if model == ModelId::PointSources && n_max < 3 {
            return Err(CliError::InvalidSpec(format!("n_max must be at least 3, got {n_max}")));
        }
        Ok(Self { model, measurement, fixed, n_max })
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        self.model.param_names()
    }

    /// Parameter point with `free` set and everything else taken from the
    /// fixed values or the model defaults.
    pub fn point(&self, free: Option<(&str, f64)>) -> Result<ParamPoint, CliError> {
        let values = self
            .param_names()
            .iter()
            .map(|&name| match free {
                Some((p, v)) if p == name => Ok(v),
                _ => self
                    .fixed
                    .get(name)
                    .copied()
                    .or_else(|| self.model.default_value(name))
                    .ok_or_else(|| CliError::InvalidSpec(format!("parameter '{name}' needs a value (use --fix {name}=...)"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        ParamPoint::new(self.param_names().iter().copied(), values).map_err(|e| CliError::InvalidSpec(e.to_string()))
    }

    /// Domain check that does not evaluate the state.
    pub fn check_point(&self, theta: &ParamPoint) -> Result<(), CliError> {
        let probe: StatisticalModel = match self.model {
            ModelId::PhaseDephasing => qubit::qubit_phase_dephasing(),
            ModelId::PointSources => {
                point_sources::point_source_model(PointSourceConfig::new(3, 0.0)).map_err(|e| CliError::Numerical(e.to_string()))?
            }
        };
        probe.check_point(theta).map_err(|e| CliError::InvalidSpec(e.to_string()))
    }
}

impl SweepSpec {
    pub fn resolve(file: &ConfigFile, flags: &Overrides) -> Result<Self, CliError> {
        let model = ModelSpec::resolve(file, flags)?;
        let table = match &flags.sweep {
            Some(text) => parse_sweep(text)?,
            None => file.sweep.clone().ok_or_else(|| CliError::InvalidSpec("no sweep given (use --sweep or a [sweep] table)".into()))?,
        };
        if !model.param_names().contains(&table.param.as_str()) {
            return Err(CliError::InvalidSpec(format!(
                "cannot sweep '{}': model {} has parameters {}",
                table.param,
                model.model.name(),
                model.param_names().join(", ")
            )));
        }
        if model.fixed.contains_key(&table.param) {
            return Err(CliError::InvalidSpec(format!("parameter '{}' is both fixed and swept", table.param)));
        }
        if table.count < 2 {
            return Err(CliError::InvalidSpec(format!("sweep count must be at least 2, got {}", table.count)));
        }
        if !table.start.is_finite() || !table.stop.is_finite() {
            return Err(CliError::InvalidSpec("sweep limits must be finite".into()));
        }
        let scale = table.scale.unwrap_or_else(|| model.model.default_scale(&table.param));
        if scale == Scale::Log && (table.start <= 0.0 || table.stop <= 0.0) {
            return Err(CliError::InvalidSpec("log sweeps need positive limits".into()));
        }
        // every built-in domain is a box, so checking both ends covers the range
        for end in [table.start, table.stop] {
            model.check_point(&model.point(Some((&table.param, end)))?)?;
        }
        Ok(Self {
            sweep: SweepRange { param: table.param, start: table.start, stop: table.stop, count: table.count, scale },
            oracle_samples: flags.oracle_samples.or(file.oracle_samples).unwrap_or(0),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or_else(|| file.out.clone()),
            workers: flags.workers.or(file.workers).unwrap_or(0),
            model,
        })
    }
}
