//! Experiment orchestration for duelsim: configs, seeded sweeps over the
//! horizon or the arm count, CSV output, aggregation and log-log slopes.

pub mod config;
pub mod output;
pub mod run;
pub mod slope;

use std::path::PathBuf;

pub use config::{Axis, ExperimentConfig, Grid, Preset};
pub use output::{aggregate, read_episodes, AggregateRow, EpisodeRow};
pub use run::{episode_seed, run_config, run_episodes, RunOptions, RunSummary};
pub use slope::{loglog_slope, Slope};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid config at `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("episode {policy} at {axis} = {value}, rep {rep}: {source}")]
    Episode {
        policy: String,
        axis: &'static str,
        value: usize,
        rep: usize,
        #[source]
        source: duelsim::Error,
    },
    #[error("slope fit needs at least 3 usable points, got {0}")]
    TooFewPoints(usize),
    #[error("slope rows are mixed: {0}")]
    MixedSeries(String),
    #[error(transparent)]
    Core(#[from] duelsim::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
