//! Monte Carlo experiments, statistical verdicts, CSV/SVG output and the
//! command-line front end.

mod cli;
mod config;
mod experiments;
pub mod stats;
pub mod svg;

pub use cli::{exit_code, run_cli};
pub use config::{parse_ensemble, ExperimentConfig, MIN_TRIALS};
pub use experiments::*;
