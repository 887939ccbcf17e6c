//! Experiment orchestration: configuration, the two comparison
//! experiments, CSV tables and SVG plots.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod table;

pub use config::{Budgets, ExperimentConfig};
pub use experiment::{execute_fig2, execute_fig3, run_fig2, run_fig3, Algorithm, ExperimentRow, RunOutcome};
pub use plot::{emit_plot, write_plot, PlotKind};
pub use table::{read_csv, write_csv, TableStatus};
