//! Declarative Monte Carlo experiments and their CSV/JSON output.

pub mod cache;
pub mod config;
pub mod report;
pub mod runs;

pub use cache::{cache_dir, cached_oracle, truth_diagram, CACHE_ENV};
pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{emit_report, Check, ExperimentReport, RawRow, SummaryRow, Table};
pub use runs::{
    run, run_concentration, run_convergence, run_lower_bound_kl, run_noise_tail, run_sandwich, run_timing,
};
