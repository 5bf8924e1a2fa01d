//! Building per-placement calibration profiles from a rehearsal session.
//!
//! The capture protocol: the performer faces the centre of the projection
//! screen and holds still for at least two seconds, then moves through
//! their full range. The first still segment fixes the reference
//! orientation; pitch and energy percentiles over the whole session fix the
//! canvas and brush-width ranges.

mod profile_io;

use std::ops::Range;

use nalgebra::{Matrix4, SymmetricEigen, UnitQuaternion, Vector4};
use thiserror::Error;

use crate::analysis::{bounds_for_frames, energy_trace_frames, placement_frames, AnalysisError, BoundsOptions, TracePoint};
use crate::motion::{seconds_to_us, CalibrationProfile, Placement, DEFAULT_SAMPLE_RATE_HZ, DEFAULT_WINDOW_S};
use crate::recording::SessionRecording;

pub use profile_io::{load_profile, read_profile, save_profile, write_profile, ProfileIoError};

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub window_s: f64,
    /// Energy (m/s) below which the performer counts as still.
    pub noise_floor: f64,
    pub min_still_s: f64,
    pub min_duration_s: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    /// Pitch spans narrower than this (rad) are rejected.
    pub min_pitch_range: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            window_s: DEFAULT_WINDOW_S,
            noise_floor: 0.1,
            min_still_s: 2.0,
            min_duration_s: 10.0,
            p_lo: 5.0,
            p_hi: 95.0,
            min_pitch_range: 2f64.to_radians(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("placement {0} is not in the session")]
    UnknownPlacement(Placement),
    #[error("need at least {need_s} s of data for the placement, have {have_s:.2} s")]
    InsufficientData { have_s: f64, need_s: f64 },
    #[error("no still segment of at least {min_s} s with energy below {floor} m/s; record a reference pose facing the screen")]
    NoStillness { min_s: f64, floor: f64 },
    #[error("pitch range {range_deg:.2}° is too narrow; capture again with wider movement")]
    DegeneratePitchRange { range_deg: f64 },
    #[error("energy range {lo}..{hi} m/s is empty; capture again with more varied movement")]
    DegenerateEnergyRange { lo: f64, hi: f64 },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl CalibrationError {
    /// True for errors caused by what was captured rather than how the tool
    /// was invoked.
    pub fn is_data_quality(&self) -> bool {
        !matches!(self, CalibrationError::UnknownPlacement(_) | CalibrationError::Analysis(_))
    }
}

/// Index range of the first run of consecutive trace points below `floor`
/// spanning at least `min_s` seconds. The whole maximal run is returned.
pub fn find_stillness(trace: &[TracePoint], floor: f64, min_s: f64) -> Option<Range<usize>> {
    let min_us = (min_s * 1e6).round() as u64;
    let mut i = 0;
    while i < trace.len() {
        if trace[i].energy >= floor {
            i += 1;
            continue;
        }
        let start = i;
        while i < trace.len() && trace[i].energy < floor {
            i += 1;
        }
        if trace[i - 1].t_us - trace[start].t_us >= min_us {
            return Some(start..i);
        }
    }
    None
}

/// Average orientation: the dominant eigenvector of `Σ q·qᵀ` over the
/// `[w, x, y, z]` vectors, which is indifferent to the `q ≡ −q` sign.
/// The result is returned with `w ≥ 0`.
pub fn mean_quaternion(quats: &[UnitQuaternion<f64>]) -> Option<UnitQuaternion<f64>> {
    if quats.is_empty() {
        return None;
    }
    let mut m = Matrix4::<f64>::zeros();
    for q in quats {
        let v = Vector4::new(q.w, q.i, q.j, q.k);
        m += v * v.transpose();
    }
    let eig = SymmetricEigen::new(m);
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let mut v: Vector4<f64> = eig.eigenvectors.column(best).into_owned();
    if v[0] < 0.0 {
        v = -v;
    }
    Some(UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(v[0], v[1], v[2], v[3])))
}

pub fn build_profile(
    session: &SessionRecording,
    placement: Placement,
    config: &CalibrationConfig,
) -> Result<CalibrationProfile, CalibrationError> {
    let frames = placement_frames(session, placement).map_err(|e| match e {
        AnalysisError::UnknownPlacement(p) => CalibrationError::UnknownPlacement(p),
        other => other.into(),
    })?;
    let nominal = 1.0 / DEFAULT_SAMPLE_RATE_HZ;
    let have_s = match (frames.first(), frames.last()) {
        (Some(a), Some(b)) => (b.t_us - a.t_us) as f64 * 1e-6 + nominal,
        _ => 0.0,
    };
    // Sub-microsecond slack for the float sum above.
    if have_s + 1e-6 < config.min_duration_s {
        return Err(CalibrationError::InsufficientData { have_s, need_s: config.min_duration_s });
    }

    let trace = energy_trace_frames(&frames, config.window_s)?;
    let still = find_stillness(&trace, config.noise_floor, config.min_still_s)
        .ok_or(CalibrationError::NoStillness { min_s: config.min_still_s, floor: config.noise_floor })?;
    // The energy window trails motion onset, so the last window of the run
    // may already be moving.
    let end_us = trace[still.end - 1].t_us.saturating_sub(seconds_to_us(config.window_s));
    let settled = still.start..frames[still.clone()].partition_point(|f| f.t_us <= end_us).max(1) + still.start;
    let still_quats = frames[settled]
        .iter()
        .map(|f| f.orientation())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| AnalysisError::InvalidParameter(e.to_string()))?;
    let q_ref = mean_quaternion(&still_quats).expect("stillness segment is nonempty");

    let bounds = bounds_for_frames(
        &frames,
        placement,
        &BoundsOptions { q_ref, window_s: config.window_s, p_lo: config.p_lo, p_hi: config.p_hi },
    )?;
    let range = bounds.pitch_hi - bounds.pitch_lo;
    if range < config.min_pitch_range {
        return Err(CalibrationError::DegeneratePitchRange { range_deg: range.to_degrees() });
    }
    let energy_lo = bounds.energy_lo.max(0.0);
    if energy_lo >= bounds.energy_hi {
        return Err(CalibrationError::DegenerateEnergyRange { lo: energy_lo, hi: bounds.energy_hi });
    }
    Ok(CalibrationProfile {
        placement,
        q_ref,
        pitch_lo: bounds.pitch_lo,
        pitch_hi: bounds.pitch_hi,
        energy_lo,
        energy_hi: bounds.energy_hi,
        window_s: config.window_s,
    })
}
