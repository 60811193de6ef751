//! Scenario files, sweeps and searches behind the `noma-outage` binary.

pub mod scenario;
pub mod search;
pub mod sweep;

pub use scenario::{apply_overrides, parse_assignments, Scenario, ScenarioFile, Variant};
pub use search::{find_optimal_w, find_snr_for_op};
pub use sweep::{run_sweep, write_csv, Grid, Method, RowOutcome, Spacing, SweepRow, SweepSection, SweepSpec, SweepVariable};
