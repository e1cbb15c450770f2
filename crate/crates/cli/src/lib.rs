//! Scenario runner for the spin-driven phonon maser: reads flat scenario
//! files, runs the dynamics from `maser-core` and writes plot-ready CSV
//! files with a JSON summary.

// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod format;
pub mod output;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use output::{emit_outputs, summary_text, SUMMARY_FILE};
pub use runner::{run_scenario, Bundle, OutputFile};
pub use scenario::{Curve, Output, RunMode, ScenarioSpec, BUNDLED};
