//! Argument parsing; flags override keys from the scenario file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::ScenarioConfig;
use crate::exit::{CliError, ExitCode};

#[derive(Debug, Parser)]
#[command(name = "nlnls", version, about = "Nonlocal NLS density solver and estimate checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the scenario and write the solution record.
    Simulate(Common),
    /// Run the selected estimate ensembles.
    Verify(Common),
    /// Time-step, truncation-order and grid ladders.
    Convergence(Common),
    /// Measure `c_delta` for the scenario's delta.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = nlnls::propagators::calibrate::CACHED_ENSEMBLE)]
        ensemble: usize,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    pub config: PathBuf,
    #[arg(long, env = "NLNLS_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for ensembles and ladders.
    #[arg(long, env = "NLNLS_THREADS")]
    pub threads: Option<usize>,
    /// Overwrite a directory holding a run with a different config hash.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub steps_per_unit: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub c_delta: Option<f64>,
    #[arg(long)]
    pub fp_tolerance: Option<f64>,
    #[arg(long)]
    pub truncation_order: Option<usize>,
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    /// Comma-separated estimate ids, or `all`.
    #[arg(long, value_delimiter = ',')]
    pub estimates: Option<Vec<String>>,
}

impl Common {
    pub fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        let mut c = ScenarioConfig::load(&self.config)?;
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        set!(self.output_dir, c.output_dir);
        set!(self.seed, c.seed);
        set!(self.n, c.grid.n);
        set!(self.length, c.grid.length);
        set!(self.horizon, c.time.horizon);
        set!(self.steps_per_unit, c.time.steps_per_unit);
        set!(self.delta, c.symbol.delta);
        set!(self.fp_tolerance, c.solver.fp_tolerance);
        set!(self.truncation_order, c.solver.truncation_order);
        set!(self.ensemble_size, c.verify.ensemble_size);
        set!(self.estimates, c.verify.estimates);
        if self.c_delta.is_some() {
            c.solver.c_delta = self.c_delta;
        }
        Ok(c)
    }
}

fn threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        // a second call in one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        if n == 0 {
            return Err(CliError::new(ExitCode::Config, "configuration", "threads must be at least 1"));
        }
    }
    Ok(())
}

/// Runs one invocation; prints the summary on stdout or the error record
/// on stderr and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = (|| {
        let (common, ensemble) = match &cli.command {
            Command::Simulate(c) | Command::Verify(c) | Command::Convergence(c) => (c, None),
            Command::Calibrate { common, ensemble } => (common, Some(*ensemble)),
        };
        threads(common.threads)?;
        let cfg = common.resolve()?;
        match &cli.command {
            Command::Simulate(_) => commands::simulate(&cfg, common.force),
            Command::Verify(_) => commands::verify(&cfg, common.force),
            Command::Convergence(_) => commands::convergence(&cfg, common.force),
            Command::Calibrate { .. } => commands::calibrate(&cfg, ensemble.unwrap_or_default(), common.force),
        }
    })();
    match result {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.summary).expect("summary serialises"));
            out.code.code()
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code
        }
    }
}
