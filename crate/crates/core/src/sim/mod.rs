//! Round-synchronized simulation, diagnostics and result files.

mod config;
mod output;
mod run;
mod sweep;

pub use config::{phase_count, Algorithm, Overrides, Resolved, RunConfig};
pub use output::{config_hash, phases_csv, rounds_csv, summarize, write_run_outputs, Summary};
pub use run::{median, run_episode, run_episode_traced, simulate, PhaseDiag, RunResult, Trace};
pub use sweep::{sweep, sweep_configs, SweepAxis, SweepCell};
