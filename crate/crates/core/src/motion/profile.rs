use nalgebra::UnitQuaternion;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::energy::DEFAULT_WINDOW_S;
use super::frame::{quat_wxyz, unit_quat, Placement};

/// Version written into every serialized profile.
pub const PROFILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("pitch bounds must satisfy lo < hi (got {lo} .. {hi})")]
    PitchBounds { lo: f64, hi: f64 },
    #[error("energy bounds must satisfy lo < hi (got {lo} .. {hi})")]
    EnergyBounds { lo: f64, hi: f64 },
    #[error("invalid energy window {0} s")]
    Window(f64),
    #[error("non-finite profile value")]
    NonFinite,
}

/// Per-placement constants that personalize the mapping to a performer.
///
/// Serializes as
/// `{"version":1,"placement":"left_wrist","q_ref":[w,x,y,z],"pitch_lo":..,"pitch_hi":..,"energy_lo":..,"energy_hi":..,"window_s":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct CalibrationProfile {
    pub placement: Placement,
    /// Device orientation while facing the centre of the projection screen.
    pub q_ref: UnitQuaternion<f64>,
    /// Pitch (rad) mapped to the floor edge of the canvas.
    pub pitch_lo: f64,
    /// Pitch (rad) mapped to the ceiling edge of the canvas.
    pub pitch_hi: f64,
    /// Energy (m/s) at or below which the brush is at its thinnest.
    pub energy_lo: f64,
    /// Energy (m/s) at or above which the brush is at its broadest.
    pub energy_hi: f64,
    pub window_s: f64,
}

impl CalibrationProfile {
    /// Uncalibrated profile: identity reference, ±0.8 rad pitch and
    /// 0.1–2.0 m/s energy.
    pub fn uncalibrated(placement: Placement) -> Self {
        CalibrationProfile {
            placement,
            q_ref: UnitQuaternion::identity(),
            pitch_lo: -0.8,
            pitch_hi: 0.8,
            energy_lo: 0.1,
            energy_hi: 2.0,
            window_s: DEFAULT_WINDOW_S,
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let scalars = [self.pitch_lo, self.pitch_hi, self.energy_lo, self.energy_hi, self.window_s];
        let q = self.q_ref.quaternion();
        if scalars.iter().chain(q.coords.iter()).any(|v| !v.is_finite()) {
            return Err(ProfileError::NonFinite);
        }
        if self.pitch_lo >= self.pitch_hi {
            return Err(ProfileError::PitchBounds { lo: self.pitch_lo, hi: self.pitch_hi });
        }
        if self.energy_lo >= self.energy_hi {
            return Err(ProfileError::EnergyBounds { lo: self.energy_lo, hi: self.energy_hi });
        }
        if !(self.window_s > 0.0 && self.window_s <= 60.0) {
            return Err(ProfileError::Window(self.window_s));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRepr {
    version: u32,
    placement: Placement,
    q_ref: [f64; 4],
    pitch_lo: f64,
    pitch_hi: f64,
    energy_lo: f64,
    energy_hi: f64,
    window_s: f64,
}

impl TryFrom<ProfileRepr> for CalibrationProfile {
    type Error = String;

    fn try_from(r: ProfileRepr) -> Result<Self, Self::Error> {
        if r.version != PROFILE_VERSION {
            return Err(format!("unsupported profile version {}", r.version));
        }
        let profile = CalibrationProfile {
            placement: r.placement,
            q_ref: unit_quat(r.q_ref).map_err(|e| e.to_string())?,
            pitch_lo: r.pitch_lo,
            pitch_hi: r.pitch_hi,
            energy_lo: r.energy_lo,
            energy_hi: r.energy_hi,
            window_s: r.window_s,
        };
        profile.validate().map_err(|e| e.to_string())?;
        Ok(profile)
    }
}

impl From<CalibrationProfile> for ProfileRepr {
    fn from(p: CalibrationProfile) -> Self {
        ProfileRepr {
            version: PROFILE_VERSION,
            placement: p.placement,
            q_ref: quat_wxyz(&p.q_ref),
            pitch_lo: p.pitch_lo,
            pitch_hi: p.pitch_hi,
            energy_lo: p.energy_lo,
            energy_hi: p.energy_hi,
            window_s: p.window_s,
        }
    }
}
