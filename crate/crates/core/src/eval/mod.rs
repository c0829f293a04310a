//! Exact values, error metrics, single trials and parameter sweeps.

pub mod metrics;
pub mod sweep;
pub mod trial;
pub mod values;

pub use metrics::{msve, return_horizon, true_return, truncated_returns, RETURN_TRUNCATION};
pub use sweep::{
    aggregate, alpha_summary, best_per_lambda, mean_stderr, run_sweep, AlphaSummary, BestCell, CellAggregate,
    MethodGrid, SweepResult, SweepSpec,
};
pub use trial::{run_trial, AlphaTrace, CellId, Environment, IndexSet, MetricKind, RunRecord, TrialSettings};
pub use values::solve_true_values;
