use nalgebra::UnitQuaternion;
use serde::{Deserialize, Serialize};

use super::trace::energy_trace_frames;
use super::{placement_frames, AnalysisError};
use crate::motion::{pointing_direction, yaw_pitch, Placement, SensorFrame, DEFAULT_WINDOW_S};
use crate::recording::SessionRecording;

pub const MIN_BOUNDS_FRAMES: usize = 20;

/// Percentile range of pitch and energy for one placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeBounds {
    pub placement: Placement,
    pub p_lo: f64,
    pub p_hi: f64,
    /// rad
    pub pitch_lo: f64,
    pub pitch_hi: f64,
    /// m/s
    pub energy_lo: f64,
    pub energy_hi: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsOptions {
    /// Reference orientation pitch is measured against.
    pub q_ref: UnitQuaternion<f64>,
    pub window_s: f64,
    pub p_lo: f64,
    pub p_hi: f64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions { q_ref: UnitQuaternion::identity(), window_s: DEFAULT_WINDOW_S, p_lo: 5.0, p_hi: 95.0 }
    }
}

/// Nearest-rank percentile of an ascending slice: the value at rank
/// `⌈p/100 · n⌉` (1-based), with p = 0 giving the minimum.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = (p * n as f64 / 100.0).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn range_bounds(session: &SessionRecording, placement: Placement, opts: &BoundsOptions) -> Result<RangeBounds, AnalysisError> {
    bounds_for_frames(&placement_frames(session, placement)?, placement, opts)
}

pub(crate) fn bounds_for_frames(frames: &[SensorFrame], placement: Placement, opts: &BoundsOptions) -> Result<RangeBounds, AnalysisError> {
    if !(0.0..=100.0).contains(&opts.p_lo) || !(0.0..=100.0).contains(&opts.p_hi) || opts.p_lo > opts.p_hi {
        return Err(AnalysisError::InvalidParameter(format!("percentiles {} / {}", opts.p_lo, opts.p_hi)));
    }
    if frames.len() < MIN_BOUNDS_FRAMES {
        return Err(AnalysisError::InsufficientData { needed: MIN_BOUNDS_FRAMES, got: frames.len() });
    }
    let mut pitch = frames
        .iter()
        .map(|f| {
            let q = f.orientation().map_err(|e| AnalysisError::InvalidParameter(e.to_string()))?;
            Ok(yaw_pitch(&pointing_direction(&q, &opts.q_ref)).pitch)
        })
        .collect::<Result<Vec<f64>, AnalysisError>>()?;
    let mut energy: Vec<f64> = energy_trace_frames(frames, opts.window_s)?.into_iter().map(|p| p.energy).collect();
    pitch.sort_by(f64::total_cmp);
    energy.sort_by(f64::total_cmp);
    Ok(RangeBounds {
        placement,
        p_lo: opts.p_lo,
        p_hi: opts.p_hi,
        pitch_lo: nearest_rank(&pitch, opts.p_lo),
        pitch_hi: nearest_rank(&pitch, opts.p_hi),
        energy_lo: nearest_rank(&energy, opts.p_lo),
        energy_hi: nearest_rank(&energy, opts.p_hi),
        samples: frames.len(),
    })
}
