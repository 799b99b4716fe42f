//! Security experiment with pluggable adversaries, timing sweeps and
//! operation-count audits.

mod audit;
mod experiment;
mod sweep;

pub use audit::{cost_audit, table_prediction, AuditReport, PhaseCounts};
pub use experiment::{run_experiment, AdversaryStrategy, ExperimentConfig, ExperimentReport, TrialOutcome};
pub use sweep::{
    bench_sweep, write_csv, BenchReport, BenchRow, Cell, Grid, ThresholdSpec, CLIENT_EXTRACT, CLIENT_QUERY,
    CLIENT_VERIFY, PHASES, SERVER_ANSWER, SERVER_WITNESS,
};
