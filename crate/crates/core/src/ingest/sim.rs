//! Deterministic gesture generators standing in for the wearables.
//!
//! Three movement regimes:
//! - `Smooth`: a 0.2 Hz sinusoidal yaw/pitch sweep with gentle acceleration
//!   (peak |acc| below 1 m/s²).
//! - `Staccato`: held poses broken by quick snaps to a new pose, each snap
//!   an acceleration burst of 12–18 m/s² peak.
//! - `Still`: a fixed pose with sensor noise.
//!
//! Output is a pure function of the script; the seed drives a ChaCha8 stream.

use std::f64::consts::{PI, TAU};

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::motion::{orientation_from_yaw_pitch, Placement, PlacementMap, SensorFrame};

pub const SWEEP_HZ: f64 = 0.2;
/// Yaw amplitude of the smooth sweep (rad).
pub const SWEEP_YAW_AMPLITUDE: f64 = 0.8;
/// Pitch amplitude of the smooth sweep (rad).
pub const SWEEP_PITCH_AMPLITUDE: f64 = 0.3;
/// Lever arm used to derive the smooth sweep's tangential acceleration (m).
const SWEEP_RADIUS_M: f64 = 0.5;

pub const STILL_ACC_SIGMA: f64 = 0.05;
pub const STILL_ANGLE_SIGMA_DEG: f64 = 0.2;

const BURST_S: f64 = 0.25;
const BURST_PEAK: (f64, f64) = (12.0, 18.0);
const HOLD_S: (f64, f64) = (0.3, 0.9);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureKind {
    Smooth,
    Staccato,
    Still,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("sample rate {0} Hz outside 50..=500")]
    InvalidRate(f64),
    #[error("duration {0} s must be positive")]
    InvalidDuration(f64),
    #[error("invalid calibration capture: {0}")]
    InvalidCapture(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureScript {
    pub kind: GestureKind,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub seed: u64,
    pub placement: Placement,
    pub device_id: u8,
    /// Timestamp of the first sample.
    pub start_us: u64,
}

impl GestureScript {
    /// Ten seconds at 100 Hz, device bound by the default placement map.
    pub fn new(kind: GestureKind, placement: Placement, seed: u64) -> Self {
        GestureScript {
            kind,
            duration_s: 10.0,
            sample_rate_hz: 100.0,
            seed,
            placement,
            device_id: PlacementMap::default().device(placement).unwrap_or(0),
            start_us: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(50.0..=500.0).contains(&self.sample_rate_hz) {
            return Err(SimError::InvalidRate(self.sample_rate_hz));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(SimError::InvalidDuration(self.duration_s));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }
}

/// Resting pointing direction (yaw, pitch) for each placement.
pub fn placement_centre(placement: Placement) -> (f64, f64) {
    match placement {
        Placement::RightUpperArm => (-0.1, 0.1),
        Placement::LeftWrist => (0.1, 0.0),
        Placement::LeftAnkle => (0.2, -0.4),
        Placement::RightAnkle => (-0.2, -0.4),
    }
}

/// Yaw and pitch of the smooth sweep at `t` seconds into the segment.
pub fn smooth_sweep_angles(centre: (f64, f64), phase: f64, t: f64) -> (f64, f64) {
    let w = TAU * SWEEP_HZ;
    (
        centre.0 + SWEEP_YAW_AMPLITUDE * (w * t + phase).sin(),
        centre.1 + SWEEP_PITCH_AMPLITUDE * (w * t + phase).cos(),
    )
}

pub fn sim_generate(script: &GestureScript) -> Result<Vec<SensorFrame>, SimError> {
    script.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
    let seg = Segment {
        device_id: script.device_id,
        start_us: script.start_us,
        first_seq: 0,
        samples: script.sample_count(),
        rate_hz: script.sample_rate_hz,
        centre: placement_centre(script.placement),
    };
    let mut out = Vec::with_capacity(seg.samples);
    seg.generate(script.kind, &mut rng, &mut out);
    Ok(out)
}

/// The smooth-sweep phase that [`sim_generate`] draws for a given seed.
pub fn smooth_phase_for_seed(seed: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed).random_range(0.0..TAU)
}

struct Segment {
    device_id: u8,
    start_us: u64,
    first_seq: u32,
    samples: usize,
    rate_hz: f64,
    centre: (f64, f64),
}

impl Segment {
    fn t_us(&self, i: usize) -> u64 {
        self.start_us + (i as f64 * 1e6 / self.rate_hz).round() as u64
    }

    fn push(&self, out: &mut Vec<SensorFrame>, i: usize, q: UnitQuaternion<f64>, acc: Vector3<f64>) {
        out.push(SensorFrame {
            device_id: self.device_id,
            seq: self.first_seq.wrapping_add(i as u32),
            t_us: self.t_us(i),
            quat: [q.w as f32, q.i as f32, q.j as f32, q.k as f32],
            acc: [acc.x as f32, acc.y as f32, acc.z as f32],
        });
    }

    fn generate(&self, kind: GestureKind, rng: &mut ChaCha8Rng, out: &mut Vec<SensorFrame>) {
        match kind {
            GestureKind::Smooth => self.smooth(rng, out),
            GestureKind::Staccato => self.staccato(rng, out),
            GestureKind::Still => self.still(rng, out),
        }
    }

    fn smooth(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SensorFrame>) {
        let phase = rng.random_range(0.0..TAU);
        let w = TAU * SWEEP_HZ;
        let (ax_amp, ay_amp) =
            (SWEEP_RADIUS_M * SWEEP_YAW_AMPLITUDE * w * w, SWEEP_RADIUS_M * SWEEP_PITCH_AMPLITUDE * w * w);
        for i in 0..self.samples {
            let t = i as f64 / self.rate_hz;
            let (yaw, pitch) = smooth_sweep_angles(self.centre, phase, t);
            let acc = Vector3::new(-ax_amp * (w * t + phase).sin(), -ay_amp * (w * t + phase).cos(), 0.0);
            self.push(out, i, orientation_from_yaw_pitch(yaw, pitch), acc);
        }
    }

    fn staccato(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SensorFrame>) {
        let mut pose = self.random_pose(rng);
        let mut i = 0;
        while i < self.samples {
            let hold = (rng.random_range(HOLD_S.0..HOLD_S.1) * self.rate_hz).round() as usize;
            for _ in 0..hold.min(self.samples - i) {
                self.push(out, i, orientation_from_yaw_pitch(pose.0, pose.1), Vector3::zeros());
                i += 1;
            }
            let target = self.random_pose(rng);
            let peak = rng.random_range(BURST_PEAK.0..BURST_PEAK.1);
            let dir: [f64; 3] = UnitSphere.sample(rng);
            let dir = Vector3::from(dir);
            let burst = (BURST_S * self.rate_hz).round() as usize;
            for k in 0..burst.min(self.samples - i) {
                let s = k as f64 / burst as f64;
                // Smoothstep snap between poses.
                let blend = s * s * (3.0 - 2.0 * s);
                let yaw = pose.0 + (target.0 - pose.0) * blend;
                let pitch = pose.1 + (target.1 - pose.1) * blend;
                let acc = dir * (peak * (TAU * s).sin());
                self.push(out, i, orientation_from_yaw_pitch(yaw, pitch), acc);
                i += 1;
            }
            pose = target;
        }
    }

    fn still(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SensorFrame>) {
        // Per-axis sigma so that the RMS of the noise vector is STILL_ACC_SIGMA.
        let acc_noise = Normal::new(0.0, STILL_ACC_SIGMA / 3f64.sqrt()).unwrap();
        let angle_noise = Normal::new(0.0, STILL_ANGLE_SIGMA_DEG.to_radians()).unwrap();
        for i in 0..self.samples {
            let yaw = self.centre.0 + angle_noise.sample(rng);
            let pitch = self.centre.1 + angle_noise.sample(rng);
            let acc = Vector3::from_fn(|_, _| acc_noise.sample(rng));
            self.push(out, i, orientation_from_yaw_pitch(yaw, pitch), acc);
        }
    }

    fn random_pose(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        (
            (self.centre.0 + rng.random_range(-1.2..1.2)).clamp(-PI + 0.01, PI),
            (self.centre.1 + rng.random_range(-0.5..0.5)).clamp(-1.4, 1.4),
        )
    }
}

/// Four-device rehearsal stream: each device runs a seeded sequence of
/// smooth, staccato and still segments. Frames are merged in timestamp
/// order (ties by device id).
pub fn sim_performance(seed: u64, duration_s: f64, sample_rate_hz: f64) -> Result<Vec<SensorFrame>, SimError> {
    GestureScript { duration_s, sample_rate_hz, ..GestureScript::new(GestureKind::Still, Placement::LeftWrist, seed) }
        .validate()?;
    let total = (duration_s * sample_rate_hz).round() as usize;
    let mut all = Vec::with_capacity(total * 4);
    for (dev, placement) in PlacementMap::default().iter() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(dev) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let centre = placement_centre(placement);
        let mut done = 0usize;
        while done < total {
            let kind = match rng.random_range(0..20) {
                0..8 => GestureKind::Smooth,
                8..15 => GestureKind::Staccato,
                _ => GestureKind::Still,
            };
            let len_s = if kind == GestureKind::Still { rng.random_range(2.5..5.0) } else { rng.random_range(2.0..6.0) };
            let samples = ((len_s * sample_rate_hz).round() as usize).min(total - done);
            let seg = Segment {
                device_id: dev,
                start_us: (done as f64 * 1e6 / sample_rate_hz).round() as u64,
                first_seq: done as u32,
                samples,
                rate_hz: sample_rate_hz,
                centre: (centre.0 + rng.random_range(-0.3..0.3), centre.1 + rng.random_range(-0.2..0.2)),
            };
            seg.generate(kind, &mut rng, &mut all);
            done += samples;
        }
    }
    all.sort_by_key(|f| (f.t_us, f.device_id));
    Ok(all)
}

/// Simulates network jitter: each frame is delayed by a uniform random
/// amount up to `max_jitter_us` and the stream is returned in arrival order.
pub fn jittered_arrival(frames: &[SensorFrame], max_jitter_us: u64, seed: u64) -> Vec<SensorFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(u64, usize, SensorFrame)> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| (f.t_us + rng.random_range(0..=max_jitter_us), i, *f))
        .collect();
    keyed.sort_by_key(|(arrival, i, _)| (*arrival, *i));
    keyed.into_iter().map(|(_, _, f)| f).collect()
}

/// A calibration capture: hold still at `q0`, then sweep pitch (relative
/// to `q0`) at constant angular speed through `[pitch_lo, pitch_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCapture {
    pub q0: UnitQuaternion<f64>,
    pub still_s: f64,
    pub sweep_s: f64,
    /// Full down-up-down cycles in the sweep.
    pub cycles: u32,
    /// Must be below zero.
    pub pitch_lo: f64,
    /// Must be above zero.
    pub pitch_hi: f64,
    pub sample_rate_hz: f64,
    pub seed: u64,
    pub device_id: u8,
}

impl CalibrationCapture {
    pub fn new(q0: UnitQuaternion<f64>, pitch_lo: f64, pitch_hi: f64, seed: u64) -> Self {
        CalibrationCapture {
            q0,
            still_s: 3.0,
            sweep_s: 10.0,
            cycles: 4,
            pitch_lo,
            pitch_hi,
            sample_rate_hz: 100.0,
            seed,
            device_id: PlacementMap::default().device(Placement::LeftWrist).unwrap_or(0),
        }
    }

    /// Pitch at `t` seconds into the sweep: starts at 0 heading down.
    pub fn sweep_pitch(&self, t: f64) -> f64 {
        let span = self.pitch_hi - self.pitch_lo;
        let period = self.sweep_s / f64::from(self.cycles);
        let l = ((t / period) * 2.0 * span + 2.0 * span + self.pitch_lo).rem_euclid(2.0 * span);
        if l < span { self.pitch_lo + l } else { self.pitch_hi - (l - span) }
    }
}

pub fn sim_calibration_capture(c: &CalibrationCapture) -> Result<Vec<SensorFrame>, SimError> {
    GestureScript { duration_s: c.still_s + c.sweep_s, sample_rate_hz: c.sample_rate_hz, ..GestureScript::new(GestureKind::Still, Placement::LeftWrist, c.seed) }
        .validate()?;
    if !(c.pitch_lo < 0.0 && c.pitch_hi > 0.0) {
        return Err(SimError::InvalidCapture("pitch range must straddle zero"));
    }
    if !(c.cycles > 0 && c.still_s > 0.0 && c.sweep_s > 0.0) {
        return Err(SimError::InvalidCapture("still and sweep phases must be nonempty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let acc_noise = Normal::new(0.0, STILL_ACC_SIGMA / 3f64.sqrt()).unwrap();
    let angle_noise = Normal::new(0.0, STILL_ANGLE_SIGMA_DEG.to_radians()).unwrap();
    let seg = Segment {
        device_id: c.device_id,
        start_us: 0,
        first_seq: 0,
        samples: ((c.still_s + c.sweep_s) * c.sample_rate_hz).round() as usize,
        rate_hz: c.sample_rate_hz,
        centre: (0.0, 0.0),
    };
    let still = (c.still_s * c.sample_rate_hz).round() as usize;
    let omega = 2.0 * (c.pitch_hi - c.pitch_lo) * f64::from(c.cycles) / c.sweep_s;
    let mut out = Vec::with_capacity(seg.samples);
    for i in 0..seg.samples {
        if i < still {
            let jitter = orientation_from_yaw_pitch(angle_noise.sample(&mut rng), angle_noise.sample(&mut rng));
            seg.push(&mut out, i, c.q0 * jitter, Vector3::from_fn(|_, _| acc_noise.sample(&mut rng)));
        } else {
            let t = (i - still) as f64 / c.sample_rate_hz;
            let q = c.q0 * orientation_from_yaw_pitch(0.0, c.sweep_pitch(t));
            seg.push(&mut out, i, q, Vector3::new(0.0, SWEEP_RADIUS_M * omega * omega, 0.0));
        }
    }
    Ok(out)
}
