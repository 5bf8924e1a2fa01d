//! Motion data model and the mathematics of the instrument: quaternion
//! pointing directions, the windowed acceleration energy, and the mapping
//! from orientation and energy onto the canvas.

mod energy;
mod frame;
mod mapping;
mod orientation;
mod profile;

pub use energy::{EnergyError, EnergyTracker, DEFAULT_SAMPLE_RATE_HZ, DEFAULT_WINDOW_S};
pub(crate) use energy::seconds_to_us;
pub use frame::{
    quat_wxyz, unit_quat, FrameError, Placement, PlacementMap, PlacementMapError, SensorFrame,
    UnknownPlacement, ACC_LIMIT, DEVICE_COUNT, MAX_DEVICE_ID, QUAT_NORM_TOLERANCE,
};
pub use mapping::{fold_yaw, map_to_canvas, normalize_energy, CanvasPoint};
pub use orientation::{
    clamp_pitch, forward_axis, orientation_from_yaw_pitch, pointing_direction, yaw_pitch, YawPitch,
};
pub use profile::{CalibrationProfile, ProfileError, PROFILE_VERSION};
