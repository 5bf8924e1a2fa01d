//! Getting frames in: the binary wire codec, per-device reordering, and
//! simulated wearables.

mod codec;
mod reorder;
mod sim;

pub use codec::{decode_frame, encode_frame, DecodeError, Decoded, EncodeError, StreamDecoder, FRAME_LEN, MAGIC, VERSION};
pub use reorder::{ingest_stream, IngestStats, ReorderBuffer, DEFAULT_REORDER_WINDOW_US};
pub use sim::{
    jittered_arrival, placement_centre, sim_calibration_capture, sim_generate, sim_performance, smooth_phase_for_seed, smooth_sweep_angles,
    CalibrationCapture, GestureKind, GestureScript, SimError, STILL_ACC_SIGMA, STILL_ANGLE_SIGMA_DEG, SWEEP_HZ, SWEEP_PITCH_AMPLITUDE,
    SWEEP_YAW_AMPLITUDE,
};

/// UDP port the wearables (or the bridge standing in for them) send to.
pub const DEFAULT_UDP_PORT: u16 = 7401;
