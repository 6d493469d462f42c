use std::path::PathBuf;

use batchbandit::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{algorithm} failed on replication {replication} (master seed {seed}): {source}")]
    Run {
        algorithm: String,
        replication: u64,
        seed: u64,
        #[source]
        source: batchbandit::Error,
    },
    #[error("replication {replication}: algorithms saw different instances")]
    Unpaired { replication: u64 },
    #[error("cannot write to {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
