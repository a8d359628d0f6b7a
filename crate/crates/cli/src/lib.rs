//! Command-line front end for `menos`: parameter sweeps written as CSV,
//! a verification suite and a model inspector.

pub mod error;
pub mod show;
pub mod spec;
pub mod sweep;
pub mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;
use spec::{ConfigFile, MeasurementId, ModelId, ModelSpec, Overrides, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "menos", version, about = "Fisher-information noise susceptibility of quantum measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate Fisher information and susceptibility bounds along a parameter sweep.
    Sweep(SpecArgs),
    /// Run the invariant suite and print one JSON line per check.
    Verify(VerifyArgs),
    /// Print rho, F and Q at a single point.
    ShowModel(SpecArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelId>,
    #[arg(long, value_enum)]
    pub measurement: Option<MeasurementId>,
    /// Fix a parameter, e.g. `--fix phi=0.785`. Repeatable.
    #[arg(long = "fix", value_name = "NAME=VALUE")]
    pub fix: Vec<String>,
    /// Swept parameter and grid.
    #[arg(long, value_name = "NAME:START:STOP:COUNT[:log]")]
    pub sweep: Option<String>,
    /// Random noise POVMs tried per point; 0 disables the search.
    #[arg(long)]
    pub oracle_samples: Option<usize>,
    /// Oracle seed; row `i` uses `seed + i`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SpecArgs {
    fn resolve(&self) -> Result<(ConfigFile, Overrides), CliError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = Overrides {
            model: self.model,
            measurement: self.measurement,
            fix: self.fix.clone(),
            sweep: self.sweep.clone(),
            oracle_samples: self.oracle_samples,
            seed: self.seed,
            out: self.out.clone(),
            workers: self.workers,
        };
        Ok((file, flags))
    }
}

fn sweep(args: &SpecArgs) -> Result<(), CliError> {
    let (file, flags) = args.resolve()?;
    let spec = SweepSpec::resolve(&file, &flags)?;
    let rows = sweep::run_sweep(&spec)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} points failed; see the error column", rows.len());
    }
    Ok(())
}

fn show(args: &SpecArgs) -> Result<(), CliError> {
    let (file, flags) = args.resolve()?;
    print!("{}", show::show_model(&ModelSpec::resolve(&file, &flags)?)?);
    Ok(())
}

fn verify(args: &VerifyArgs) -> ExitCode {
    let checks = verify::run_verify(args.seed);
    for c in &checks {
        println!("{}", serde_json::to_string(c).expect("checks serialize"));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let summary = serde_json::json!({ "summary": { "checks": checks.len(), "failed": failed, "seed": args.seed } });
    println!("{summary}");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Sweep(args) => sweep(args),
        Command::ShowModel(args) => show(args),
        Command::Verify(args) => return verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
