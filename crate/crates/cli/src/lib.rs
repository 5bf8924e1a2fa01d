//! Implementation of the `motionbrush` command: `perform`, `analyze`,
//! `calibrate` and `simulate`.

mod batch;
mod error;
pub mod perform;
pub mod source;

pub use batch::{analyze, calibrate, parse_grid, simulate, simulated_reference_pose, AnalyzeOptions, CalibrateOptions, SimulateKind, SimulateOptions};
pub use error::CliError;
