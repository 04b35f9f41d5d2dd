//! End-to-end experiments: generate, demote, bound, report.

mod config;
mod experiment;
mod hexfloat;
mod report;
mod verify;

pub use config::{parse_cluster_spec, ExperimentConfig, DESK_COLUMNS};
pub use experiment::{median, run_experiment, run_trial, run_trials, ExperimentReport, SpectrumRow, TrialMedians};
pub use hexfloat::{format_hex, parse_hex};
pub use report::{emit_report, emit_trials, parse_spectrum_csv, plot_svg, spectrum_csv, SPECTRUM_HEADER, SUMMARY_HEADER};
pub use verify::{verify, CheckOutcome, VerifyLedger, CONDITIONING_SLACK, EXACT_REL_TOL, SQUARED_SLACK, WEYL_SLACK};
