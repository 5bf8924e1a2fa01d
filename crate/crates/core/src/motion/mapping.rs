//! Orientation and energy to canvas coordinates.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::profile::CalibrationProfile;

/// Normalized canvas position. `x`: 0 stage-right edge, 1 stage-left edge.
/// `y`: 0 floor edge, 1 ceiling edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasPoint {
    pub x: f64,
    pub y: f64,
}

impl CanvasPoint {
    pub const CENTRE: CanvasPoint = CanvasPoint { x: 0.5, y: 0.5 };
}

/// Folds a yaw angle onto [−π/2, π/2] so that `θ` and `π − θ` land on the
/// same value. Facing the screen (0) and facing the audience (π) both fold
/// to exactly 0.
pub fn fold_yaw(yaw: f64) -> f64 {
    let wrapped = if yaw > PI || yaw <= -PI {
        let w = (yaw + PI).rem_euclid(TAU) - PI;
        if w == -PI { PI } else { w }
    } else {
        yaw
    };
    if wrapped > FRAC_PI_2 {
        PI - wrapped
    } else if wrapped < -FRAC_PI_2 {
        -PI - wrapped
    } else {
        wrapped
    }
}

/// Canvas position for a yaw/pitch pair.
///
/// `x = 0.5 + 0.5·sin(yaw)`, so the screen-audience axis is symmetric and
/// stage left/right reach the canvas edges. `y` is pitch scaled linearly
/// between the profile's pitch bounds. Both are clamped to [0, 1].
pub fn map_to_canvas(yaw: f64, pitch: f64, profile: &CalibrationProfile) -> CanvasPoint {
    let x = (0.5 + 0.5 * fold_yaw(yaw).sin()).clamp(0.0, 1.0);
    let y = ((pitch - profile.pitch_lo) / (profile.pitch_hi - profile.pitch_lo)).clamp(0.0, 1.0);
    CanvasPoint { x, y }
}

/// Energy rescaled into [0, 1] between the profile's energy bounds.
pub fn normalize_energy(energy: f64, profile: &CalibrationProfile) -> f64 {
    ((energy - profile.energy_lo) / (profile.energy_hi - profile.energy_lo)).clamp(0.0, 1.0)
}
