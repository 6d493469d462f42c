use std::path::PathBuf;
use std::process::ExitCode;

use batchbandit::PolicyKind;
use batchbandit_harness::commands::{execute, replay};
use batchbandit_harness::output::{Command, Manifest};
use batchbandit_harness::{ExperimentSpec, GridSpec, Profile, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "batchbandit", version, about = "Batched sparse contextual bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment spec (JSON). Defaults to the built-in configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// desk = 100 replications, full = 1000. `--reps` wins over both.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentSpec, PathBuf)> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::load(path)?,
            None => ExperimentSpec::default(),
        };
        if let Some(p) = self.profile {
            spec.replications = p.replications();
        }
        if let Some(r) = self.reps {
            spec.replications = r;
        }
        if let Some(s) = self.seed {
            spec.master_seed = s;
        }
        if let Some(out) = &self.out {
            spec.output_dir = out.clone();
        }
        spec.validate()?;
        let out = spec.output_dir.clone();
        Ok((spec, out))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Replicated comparison of every configured algorithm.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// OBSI regret and fairness across inclusion levels.
    SweepAlpha {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Regret of every algorithm across dimensions (equal signal/noise split).
    SweepDim {
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
    /// Tune LBGL or MCPB on a seed block disjoint from evaluation.
    GridSearch {
        #[arg(long)]
        algo: PolicyKind,
        /// JSON object with `lambda_0` (lbgl) or `lambda` and `a` (mcpb).
        #[arg(long)]
        grid: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the outputs recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to `replay/` next to the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Print the default experiment spec as JSON.
    DefaultConfig,
}

fn run(cli: Cli) -> Result<()> {
    let (command, spec, out, workers) = match cli.command {
        Cmd::Run { common } => {
            let (spec, out) = common.resolve()?;
            (Command::Run, spec, out, common.workers)
        }
        Cmd::SweepAlpha { alphas, common } => {
            let (spec, out) = common.resolve()?;
            let alphas = alphas.unwrap_or_else(|| spec.alpha_sweep.clone());
            (Command::SweepAlpha { alphas }, spec, out, common.workers)
        }
        Cmd::SweepDim { dims, common } => {
            let (spec, out) = common.resolve()?;
            let dims = dims.unwrap_or_else(|| spec.dimension_sweep.clone());
            (Command::SweepDim { dims }, spec, out, common.workers)
        }
        Cmd::GridSearch { algo, grid, common } => {
            let (spec, out) = common.resolve()?;
            let grid = match grid {
                Some(path) => serde_json::from_str::<GridSpec>(&std::fs::read_to_string(path)?)?,
                None => spec.tuning.grid.clone(),
            };
            (Command::GridSearch { algorithm: algo, grid }, spec, out, common.workers)
        }
        Cmd::Replay { manifest, out, workers } => {
            let m = Manifest::load(&manifest)?;
            let out = out.unwrap_or_else(|| manifest.parent().unwrap_or(std::path::Path::new(".")).join("replay"));
            let files = replay(&m, &out, workers)?;
            println!("replayed {} file(s) into {}", files.len(), out.display());
            return Ok(());
        }
        Cmd::DefaultConfig => {
            println!("{}", serde_json::to_string_pretty(&ExperimentSpec::default())?);
            return Ok(());
        }
    };
    let files = execute(&command, &spec, &out, workers)?;
    for f in files {
        println!("{}", out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
