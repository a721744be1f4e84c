//! File formats: trajectory CSV, run and sweep configurations, sweep
//! summaries and gnuplot scripts.

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub mod config;
pub mod csv;
pub mod plot;
pub mod sweep;

pub use config::{
    parse_run_config, parse_run_template, parse_sweep_config, read_json, read_run_config,
    read_sweep_config, InitialSpec, Outputs, RunConfig, SampleBox, SweepConfig, VelocitySpec,
};
pub use csv::{
    read_trajectory_csv, trajectory_header, write_trajectory_csv, write_trajectory_csv_to,
    TrajectoryTable,
};
pub use plot::{emit_plot_script, FieldSample, PlotKind, PlotSource};
pub use sweep::{
    run_seed, sample_initial_point, sweep_header, write_sweep_index, write_sweep_summary,
    RunSummary, SweepIndex, SweepIndexEntry,
};

/// One schema violation, located by its dotted path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn list_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("\n  {i}"))
        .collect::<String>()
}

#[derive(Debug, Error)]
pub enum TrajioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration ({} issue(s)):{}", issues.len(), list_issues(issues))]
    Invalid { issues: Vec<ConfigIssue> },
    #[error("{path}:{line}: {message}")]
    Csv {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl TrajioError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        TrajioError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// 17 significant digits, enough for any `f64` to round-trip.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<(), TrajioError> {
    std::fs::write(path, contents).map_err(|e| TrajioError::io(path, e))
}
