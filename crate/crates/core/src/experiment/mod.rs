//! Presets, run configs, sweeps with CSV/JSON output, and the verification
//! suites behind the `fracprop` binary.

mod config;
mod run;
mod verify;

pub use config::{
    preset, ForcingConfig, HolderConfig, InitialData, OperatorConfig, OutputConfig, OutputSpace, PotentialConfig, RunConfig,
    RunMode, SweepPoint, PRESETS, SCHEMA_VERSION,
};
pub use run::{
    compute_point, run, summary_line, trajectory_csv, write_atomic, Fitted, PointOutcome, RunReport, Sidecar, SummaryRow,
    SUMMARY_HEADER,
};
pub use verify::{criterion, suite, Check, Relation, SUITES};
