use std::f64::consts::{FRAC_PI_2, PI};

use motionbrush::motion::{
    fold_yaw, map_to_canvas, normalize_energy, orientation_from_yaw_pitch, pointing_direction, yaw_pitch,
    CalibrationProfile, Placement,
};
use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn profile() -> CalibrationProfile {
    CalibrationProfile::uncalibrated(Placement::LeftWrist)
}

/// Rotation matrix of a unit quaternion written out from its components.
fn rotation_matrix(q: &UnitQuaternion<f64>) -> Matrix3<f64> {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y),
    )
}

fn random_quat(rng: &mut ChaCha8Rng) -> UnitQuaternion<f64> {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    UnitQuaternion::from_scaled_axis(axis.normalize() * rng.random_range(-PI..PI))
}

#[test]
fn screen_audience_symmetry_over_random_yaws() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = profile();
    for _ in 0..10_000 {
        let theta = rng.random_range(-4.0 * PI..4.0 * PI);
        let pitch = rng.random_range(-1.0..1.0);
        let a = map_to_canvas(theta, pitch, &p);
        let b = map_to_canvas(PI - theta, pitch, &p);
        assert!((a.x - b.x).abs() < 1e-9, "θ = {theta}");
        assert_eq!(a.y, b.y);
    }
}

#[test]
fn facing_screen_or_audience_is_centre() {
    let p = profile();
    assert_eq!(map_to_canvas(0.0, 0.0, &p).x, 0.5);
    assert_eq!(map_to_canvas(PI, 0.0, &p).x, 0.5);
    assert_eq!(map_to_canvas(-PI, 0.0, &p).x, 0.5);
    // Through the full chain: device turned to face the audience.
    let q = orientation_from_yaw_pitch(PI, 0.0);
    let yp = yaw_pitch(&pointing_direction(&q, &UnitQuaternion::identity()));
    assert_eq!(map_to_canvas(yp.yaw, yp.pitch, &p).x, 0.5);
}

#[test]
fn stage_sides_reach_the_edges() {
    let p = profile();
    assert_eq!(map_to_canvas(FRAC_PI_2, 0.0, &p).x, 1.0);
    assert_eq!(map_to_canvas(-FRAC_PI_2, 0.0, &p).x, 0.0);
    assert_eq!(fold_yaw(3.0 * FRAC_PI_2), -FRAC_PI_2);
}

#[test]
fn pitch_and_energy_scale_between_profile_bounds() {
    let p = profile();
    assert_eq!(map_to_canvas(0.0, p.pitch_lo, &p).y, 0.0);
    assert_eq!(map_to_canvas(0.0, p.pitch_hi, &p).y, 1.0);
    assert_eq!(map_to_canvas(0.0, 0.0, &p).y, 0.5);
    assert_eq!(map_to_canvas(0.0, 5.0, &p).y, 1.0);
    assert_eq!(normalize_energy(p.energy_lo, &p), 0.0);
    assert_eq!(normalize_energy(p.energy_hi * 3.0, &p), 1.0);
    assert!((normalize_energy(1.05, &p) - 0.5).abs() < 1e-15);
}

#[test]
fn pointing_direction_matches_rotation_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let (q, r) = (random_quat(&mut rng), random_quat(&mut rng));
        let expected = rotation_matrix(&r).transpose() * rotation_matrix(&q) * Vector3::z();
        let got = pointing_direction(&q, &r);
        assert!((got - expected).norm() < 1e-12);
        assert!((got.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn yaw_pitch_inverts_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10_000 {
        let yaw = rng.random_range(-PI + 1e-6..PI);
        let pitch = rng.random_range(-1.5..1.5);
        let yp = yaw_pitch(&pointing_direction(&orientation_from_yaw_pitch(yaw, pitch), &UnitQuaternion::identity()));
        assert!((yp.yaw - yaw).abs() < 1e-9 && (yp.pitch - pitch).abs() < 1e-9);
    }
}

#[test]
fn positions_stay_on_canvas() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = profile();
    for _ in 0..10_000 {
        let yp = yaw_pitch(&pointing_direction(&random_quat(&mut rng), &random_quat(&mut rng)));
        let c = map_to_canvas(yp.yaw, yp.pitch, &p);
        assert!((0.0..=1.0).contains(&c.x) && (0.0..=1.0).contains(&c.y));
    }
}
