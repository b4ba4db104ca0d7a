//! Command-line harness around `adaptnet-core`: strict config loading,
//! flat-file artifacts, checkpoints and parallel sweeps.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;

pub use config::{load_config, load_config_str};
pub use error::{AppError, AppResult};
pub use metrics::{emit_plot_data, Cell, MetricsFrame, PlotKind};
