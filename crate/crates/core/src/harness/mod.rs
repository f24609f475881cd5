//! Experiment campaigns behind the command-line tool.
//!
//! Each campaign is a pure function of a [`CampaignConfig`], a master seed
//! and a worker count; trials draw from their own derived streams and are
//! merged by index, so the emitted CSV is byte-identical across reruns and
//! thread counts.

mod anytime;
mod complexity;
pub mod config;
mod control;
pub mod csvio;
mod exponents;
mod seeds;
pub mod stats;

pub use anytime::{run_anytime, AnytimeProfile, AnytimeSummary, DelayRow};
pub use complexity::{run_complexity, ComplexityReport, ComplexityRow, ComplexitySummary};
pub use config::{BiasSetting, CampaignConfig};
pub use control::{run_control, ControlReport, ControlStepRow, ControlSummary, ControlTrialRow};
pub use csvio::{from_csv_str, read_csv, to_csv_string, write_csv, Metadata};
pub use exponents::{run_exponents, ExponentRow};
pub use seeds::{seed_split, stream};

use crate::Result;

/// Runs `f(0..count)` on `workers` threads and returns results in index
/// order.
pub fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| crate::Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

fn base_metadata(cfg: &CampaignConfig, command: &str, seed: u64) -> Metadata {
    let mut meta = Metadata::default();
    meta.push("command", command);
    meta.push("seed", seed);
    for line in cfg.echo() {
        meta.push("config", line);
    }
    meta
}
