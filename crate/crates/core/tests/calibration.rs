use motionbrush::calibration::{build_profile, read_profile, write_profile, CalibrationConfig, CalibrationError};
use motionbrush::ingest::{sim_calibration_capture, sim_generate, CalibrationCapture, GestureKind, GestureScript};
use motionbrush::motion::{pointing_direction, yaw_pitch, Placement, SensorFrame};
use motionbrush::recording::{SessionHeader, SessionRecording};
use nalgebra::UnitQuaternion;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn session(frames: Vec<SensorFrame>) -> SessionRecording {
    SessionRecording { header: SessionHeader::new("calibration", 0), frames }
}

fn nearest_rank_oracle(mut v: Vec<f64>, p: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    v[k - 1]
}

fn windowed_energy(frames: &[SensorFrame], window_us: u64) -> Vec<f64> {
    let contrib: Vec<f64> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let dt = if i == 0 { 10_000 } else { (f.t_us - frames[i - 1].t_us).min(20_000) };
            f.acc_l1() * (dt as f64 * 1e-6)
        })
        .collect();
    (0..frames.len())
        .map(|i| (0..=i).filter(|&j| frames[i].t_us - frames[j].t_us < window_us).map(|j| contrib[j]).sum())
        .collect()
}

fn capture(seed: u64) -> (CalibrationCapture, Vec<SensorFrame>) {
    let q0 = UnitQuaternion::from_euler_angles(0.1 * seed as f64, -0.3, 0.7 + 0.05 * seed as f64);
    let c = CalibrationCapture::new(q0, -0.5, 0.8, seed);
    let frames = sim_calibration_capture(&c).unwrap();
    (c, frames)
}

#[test]
fn recovers_constructed_ground_truth() {
    for seed in 0..5 {
        let (c, frames) = capture(seed);
        let p = build_profile(&session(frames.clone()), Placement::LeftWrist, &CalibrationConfig::default()).unwrap();
        let err_deg = p.q_ref.angle_to(&c.q0).to_degrees();
        assert!(err_deg < 0.5, "q_ref off by {err_deg}°");

        // Analytic percentiles: still samples sit at pitch 0, sweep samples are
        // uniform over [lo, hi].
        let n = frames.len() as f64;
        let sweep = c.sweep_s * c.sample_rate_hz;
        let span = c.pitch_hi - c.pitch_lo;
        let offset = span * (0.05 * n).ceil() / sweep;
        assert!((p.pitch_lo - (c.pitch_lo + offset)).abs() < 0.01, "{} vs {}", p.pitch_lo, c.pitch_lo + offset);
        assert!((p.pitch_hi - (c.pitch_hi - offset)).abs() < 0.01, "{} vs {}", p.pitch_hi, c.pitch_hi - offset);

        // Sort-based oracle over the same pitch and energy values.
        let pitches: Vec<f64> = frames.iter().map(|f| yaw_pitch(&pointing_direction(&f.orientation().unwrap(), &p.q_ref)).pitch).collect();
        assert_eq!(p.pitch_lo, nearest_rank_oracle(pitches.clone(), 5.0));
        assert_eq!(p.pitch_hi, nearest_rank_oracle(pitches, 95.0));
        let energy = windowed_energy(&frames, 500_000);
        assert_eq!(p.energy_lo, nearest_rank_oracle(energy.clone(), 5.0).max(0.0));
        assert_eq!(p.energy_hi, nearest_rank_oracle(energy, 95.0));
        assert_eq!(p.window_s, 0.5);
    }
}

#[test]
fn frame_order_does_not_matter() {
    let (_, frames) = capture(2);
    let mut shuffled = frames.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let cfg = CalibrationConfig::default();
    let a = build_profile(&session(frames), Placement::LeftWrist, &cfg).unwrap();
    let b = build_profile(&session(shuffled), Placement::LeftWrist, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn profile_survives_serialization() {
    let (_, frames) = capture(3);
    let p = build_profile(&session(frames), Placement::LeftWrist, &CalibrationConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_profile(&p, &mut buf).unwrap();
    assert_eq!(read_profile(buf.as_slice()).unwrap(), p);
}

#[test]
fn pure_stillness_is_a_degenerate_range() {
    let script = GestureScript { duration_s: 12.0, ..GestureScript::new(GestureKind::Still, Placement::LeftWrist, 4) };
    let err = build_profile(&session(sim_generate(&script).unwrap()), Placement::LeftWrist, &CalibrationConfig::default()).unwrap_err();
    assert!(matches!(err, CalibrationError::DegeneratePitchRange { .. }), "{err}");
    assert!(err.is_data_quality());
}

#[test]
fn constant_motion_has_no_stillness() {
    let script = GestureScript { duration_s: 12.0, ..GestureScript::new(GestureKind::Smooth, Placement::LeftWrist, 4) };
    let err = build_profile(&session(sim_generate(&script).unwrap()), Placement::LeftWrist, &CalibrationConfig::default()).unwrap_err();
    assert!(matches!(err, CalibrationError::NoStillness { .. }), "{err}");
}

#[test]
fn short_or_missing_data_is_reported() {
    let (_, frames) = capture(1);
    let cfg = CalibrationConfig::default();
    let short = frames[..500].to_vec();
    assert!(matches!(
        build_profile(&session(short), Placement::LeftWrist, &cfg),
        Err(CalibrationError::InsufficientData { .. })
    ));
    assert!(matches!(
        build_profile(&session(frames), Placement::RightAnkle, &cfg),
        Err(CalibrationError::InsufficientData { .. })
    ));
}
