//! Offline analysis of rehearsal sessions: energy traces, orientation
//! paths, solid-angle-normalized heat maps and range-of-motion bounds.

mod bounds;
mod export;
mod heatmap;
mod trace;

use thiserror::Error;

use crate::motion::{Placement, SensorFrame};
use crate::recording::SessionRecording;

pub(crate) use bounds::bounds_for_frames;
pub use bounds::{nearest_rank, range_bounds, BoundsOptions, RangeBounds, MIN_BOUNDS_FRAMES};
pub use export::{read_csv, read_export, write_export, AnalysisOutput, ExportFormat, ExportKind, HeatmapRow, EXPORT_VERSION};
pub use heatmap::{sphere_heatmap, GridResolution, SphereHistogram};
pub use trace::{energy_trace, energy_trace_frames, orientation_path, PathPoint, TracePoint};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("placement {0} is not in the session")]
    UnknownPlacement(Placement),
    #[error("no samples to analyze")]
    Empty,
    #[error("need at least {needed} frames, have {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid grid resolution {n_lat}×{n_lon}")]
    InvalidResolution { n_lat: usize, n_lon: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("export i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("export schema: {0}")]
    Schema(String),
}

/// Frames for one placement, sorted by timestamp so results do not depend
/// on how devices were interleaved in the file.
pub(crate) fn placement_frames(session: &SessionRecording, placement: Placement) -> Result<Vec<SensorFrame>, AnalysisError> {
    let dev = session.header.placements.device(placement).ok_or(AnalysisError::UnknownPlacement(placement))?;
    let mut frames: Vec<SensorFrame> = session.device_frames(dev).copied().collect();
    frames.sort_by_key(|f| f.t_us);
    Ok(frames)
}
