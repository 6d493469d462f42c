//! Executes a [`Command`] into an output directory and records a manifest
//! from which the same files can be regenerated.

use std::path::Path;

use crate::error::Result;
use crate::output::*;
use crate::runner::run_replicated;
use crate::spec::ExperimentSpec;
use crate::sweep::{sweep_alpha, sweep_dimensions};
use crate::tuning::{grid_search, tune_spec};

/// Runs `command` and writes its artifacts plus `manifest.json` into `out`.
/// Returns the names of the files written.
pub fn execute(command: &Command, spec: &ExperimentSpec, out: &Path, workers: usize) -> Result<Vec<String>> {
    spec.validate()?;
    prepare_dir(out)?;
    let mut written: Vec<&str> = Vec::new();
    match command {
        Command::Run => {
            let (tuned, reports) = if spec.tuning.enabled { tune_spec(spec, workers)? } else { (spec.clone(), Vec::new()) };
            let exp = run_replicated(&tuned, workers)?;
            write_summary(out, &exp)?;
            write_regret_curve(out, &exp)?;
            write_regret_normalized(out, &exp)?;
            write_json(out, AUDIT_JSON, &exp.audit)?;
            written.extend([SUMMARY_CSV, REGRET_CURVE_CSV, REGRET_NORMALIZED_CSV, AUDIT_JSON]);
            if !reports.is_empty() {
                write_grid_search(out, &reports)?;
                written.push(GRID_SEARCH_CSV);
            }
        }
        Command::SweepAlpha { alphas } => {
            write_alpha_sweep(out, &sweep_alpha(spec, alphas, workers)?)?;
            written.push(ALPHA_SWEEP_CSV);
        }
        Command::SweepDim { dims } => {
            write_dim_sweep(out, &sweep_dimensions(spec, dims, workers)?.0)?;
            written.push(DIM_SWEEP_CSV);
        }
        Command::GridSearch { algorithm, grid } => {
            let report = grid_search(spec, *algorithm, grid, spec.tuning.replications, workers)?;
            write_grid_search(out, std::slice::from_ref(&report))?;
            written.push(GRID_SEARCH_CSV);
        }
    }
    let outputs: Vec<String> = written.iter().map(|s| s.to_string()).collect();
    write_json(out, MANIFEST_JSON, &Manifest::new(command.clone(), spec, outputs.clone()))?;
    Ok(outputs)
}

/// Re-executes the command recorded in `manifest` into `out`.
pub fn replay(manifest: &Manifest, out: &Path, workers: usize) -> Result<Vec<String>> {
    execute(&manifest.command, &manifest.spec, out, workers)
}
