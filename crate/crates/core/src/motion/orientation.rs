//! Stage-frame geometry.
//!
//! Stage frame: +Z toward the projection screen, +X toward stage left, +Y
//! toward the ceiling. A device points along its local +Z axis; the
//! reference quaternion captured during calibration (facing screen centre)
//! maps the device frame onto the stage frame.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{UnitQuaternion, Vector3};

/// Device axis treated as the pointing direction.
pub fn forward_axis() -> Vector3<f64> {
    Vector3::z()
}

/// Direction the device points in, expressed in the stage frame:
/// `conj(q_ref) ⊗ quat` applied to the forward axis.
pub fn pointing_direction(quat: &UnitQuaternion<f64>, q_ref: &UnitQuaternion<f64>) -> Vector3<f64> {
    let relative = q_ref.inverse() * quat;
    relative.transform_vector(&forward_axis()).normalize()
}

/// Horizontal (yaw) and vertical (pitch) angles of a stage-frame direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YawPitch {
    /// `atan2(dx, dz)` in (−π, π]: 0 faces the screen, +π/2 stage left.
    pub yaw: f64,
    /// `asin(dy)` in [−π/2, π/2]: positive toward the ceiling.
    pub pitch: f64,
}

/// Past this `|dy|` the yaw is undefined and reported as 0.
const GIMBAL_LIMIT: f64 = 1.0 - 1e-9;

pub fn yaw_pitch(d: &Vector3<f64>) -> YawPitch {
    let dy = d.y.clamp(-1.0, 1.0);
    let pitch = dy.asin();
    if dy.abs() > GIMBAL_LIMIT {
        return YawPitch { yaw: 0.0, pitch };
    }
    let mut yaw = d.x.atan2(d.z);
    // atan2 returns −π for (−0, −1); keep the half-open range (−π, π].
    if yaw == -std::f64::consts::PI {
        yaw = std::f64::consts::PI;
    }
    YawPitch { yaw, pitch }
}

/// Device orientation (relative to the reference) whose forward axis points
/// at the given yaw and pitch. Pitch is applied first, then yaw about +Y.
pub fn orientation_from_yaw_pitch(yaw: f64, pitch: f64) -> UnitQuaternion<f64> {
    let yaw_q = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), yaw);
    // Rotating +Z about +X by −pitch tilts it toward +Y.
    let pitch_q = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), -pitch);
    yaw_q * pitch_q
}

/// Clamp helper for pitch values fed back into [`orientation_from_yaw_pitch`].
pub fn clamp_pitch(pitch: f64) -> f64 {
    pitch.clamp(-FRAC_PI_2, FRAC_PI_2)
}
