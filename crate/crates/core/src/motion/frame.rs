use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest device id a frame may carry.
pub const MAX_DEVICE_ID: u8 = 3;
/// Number of wearable devices the instrument is configured for.
pub const DEVICE_COUNT: usize = 4;

/// Tolerance on `|‖q‖ − 1|` accepted at ingest.
pub const QUAT_NORM_TOLERANCE: f64 = 1e-4;
/// Sanity bound on any single acceleration component (m/s²).
pub const ACC_LIMIT: f32 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("device id {0} out of range 0..={MAX_DEVICE_ID}")]
    DeviceOutOfRange(u8),
    #[error("non-finite value in frame")]
    NonFinite,
    #[error("quaternion norm {0} is not within {QUAT_NORM_TOLERANCE} of 1")]
    NonUnitQuaternion(f64),
    #[error("acceleration component {0} exceeds ±{ACC_LIMIT} m/s²")]
    AccelerationOutOfRange(f32),
}

/// One timestamped reading from a wearable.
///
/// The quaternion and acceleration are kept exactly as they travel on the
/// wire (f32). [`SensorFrame::orientation`] gives the renormalized f64 form
/// used by the math.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub device_id: u8,
    pub seq: u32,
    pub t_us: u64,
    /// Orientation as `[w, x, y, z]`.
    pub quat: [f32; 4],
    /// Linear acceleration in the sensor frame, m/s².
    pub acc: [f32; 3],
}

impl SensorFrame {
    pub fn validate(&self) -> Result<(), FrameError> {
        if self.device_id > MAX_DEVICE_ID {
            return Err(FrameError::DeviceOutOfRange(self.device_id));
        }
        if self.quat.iter().chain(self.acc.iter()).any(|v| !v.is_finite()) {
            return Err(FrameError::NonFinite);
        }
        if let Some(&a) = self.acc.iter().find(|a| a.abs() >= ACC_LIMIT) {
            return Err(FrameError::AccelerationOutOfRange(a));
        }
        self.orientation().map(|_| ())
    }

    /// Renormalized orientation. Fails if the stored quaternion is further
    /// than [`QUAT_NORM_TOLERANCE`] from unit length.
    pub fn orientation(&self) -> Result<UnitQuaternion<f64>, FrameError> {
        let [w, x, y, z] = self.quat.map(f64::from);
        unit_quat([w, x, y, z])
    }

    /// `|ax| + |ay| + |az|`, the per-sample input to the energy tracker.
    pub fn acc_l1(&self) -> f64 {
        self.acc.iter().map(|a| f64::from(a.abs())).sum()
    }
}

/// Builds a unit quaternion from `[w, x, y, z]`, renormalizing when the
/// input is within tolerance of unit length.
pub fn unit_quat(wxyz: [f64; 4]) -> Result<UnitQuaternion<f64>, FrameError> {
    if wxyz.iter().any(|v| !v.is_finite()) {
        return Err(FrameError::NonFinite);
    }
    let q = Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
    let norm = q.norm();
    if (norm - 1.0).abs() >= QUAT_NORM_TOLERANCE {
        return Err(FrameError::NonUnitQuaternion(norm));
    }
    if (norm - 1.0).abs() < 1e-12 {
        // Already unit to well within the internal tolerance; keeping the
        // components untouched makes serialized quaternions round-trip.
        return Ok(UnitQuaternion::new_unchecked(q));
    }
    Ok(UnitQuaternion::from_quaternion(q))
}

/// `[w, x, y, z]` components of a unit quaternion.
pub fn quat_wxyz(q: &UnitQuaternion<f64>) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

/// Body location a device is worn at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    RightUpperArm,
    LeftWrist,
    LeftAnkle,
    RightAnkle,
}

impl Placement {
    pub const ALL: [Placement; 4] = [
        Placement::RightUpperArm,
        Placement::LeftWrist,
        Placement::LeftAnkle,
        Placement::RightAnkle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Placement::RightUpperArm => "right_upper_arm",
            Placement::LeftWrist => "left_wrist",
            Placement::LeftAnkle => "left_ankle",
            Placement::RightAnkle => "right_ankle",
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown placement `{0}`")]
pub struct UnknownPlacement(pub String);

impl FromStr for Placement {
    type Err = UnknownPlacement;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Placement::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownPlacement(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementMapError {
    #[error("device id {0} out of range")]
    DeviceOutOfRange(u8),
    #[error("placement {0} bound to more than one device")]
    DuplicatePlacement(Placement),
}

/// Binding of device ids to body placements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, Placement>", into = "BTreeMap<String, Placement>")]
pub struct PlacementMap(BTreeMap<u8, Placement>);

impl PlacementMap {
    pub fn new(bindings: impl IntoIterator<Item = (u8, Placement)>) -> Result<Self, PlacementMapError> {
        let mut map = BTreeMap::new();
        for (dev, placement) in bindings {
            if dev > MAX_DEVICE_ID {
                return Err(PlacementMapError::DeviceOutOfRange(dev));
            }
            if map.values().any(|p| *p == placement) {
                return Err(PlacementMapError::DuplicatePlacement(placement));
            }
            map.insert(dev, placement);
        }
        Ok(PlacementMap(map))
    }

    pub fn placement(&self, device_id: u8) -> Option<Placement> {
        self.0.get(&device_id).copied()
    }

    pub fn device(&self, placement: Placement) -> Option<u8> {
        self.0.iter().find(|(_, p)| **p == placement).map(|(d, _)| *d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, Placement)> + '_ {
        self.0.iter().map(|(d, p)| (*d, *p))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for PlacementMap {
    /// Device 0 on the right upper arm, 1 on the left wrist, 2 and 3 on the
    /// left and right ankle.
    fn default() -> Self {
        PlacementMap(Placement::ALL.into_iter().enumerate().map(|(i, p)| (i as u8, p)).collect())
    }
}

impl TryFrom<BTreeMap<String, Placement>> for PlacementMap {
    type Error = String;

    fn try_from(raw: BTreeMap<String, Placement>) -> Result<Self, Self::Error> {
        let mut bindings = Vec::with_capacity(raw.len());
        for (k, p) in raw {
            let dev: u8 = k.parse().map_err(|_| format!("invalid device id key `{k}`"))?;
            bindings.push((dev, p));
        }
        PlacementMap::new(bindings).map_err(|e| e.to_string())
    }
}

impl From<PlacementMap> for BTreeMap<String, Placement> {
    fn from(map: PlacementMap) -> Self {
        map.0.into_iter().map(|(d, p)| (d.to_string(), p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> SensorFrame {
        SensorFrame { device_id: 0, seq: 0, t_us: 0, quat: [1.0, 0.0, 0.0, 0.0], acc: [0.0; 3] }
    }

    #[test]
    fn validation_catches_each_violation() {
        assert!(frame().validate().is_ok());
        assert_eq!(SensorFrame { device_id: 4, ..frame() }.validate(), Err(FrameError::DeviceOutOfRange(4)));
        assert_eq!(SensorFrame { acc: [f32::NAN, 0.0, 0.0], ..frame() }.validate(), Err(FrameError::NonFinite));
        assert_eq!(
            SensorFrame { acc: [0.0, 250.0, 0.0], ..frame() }.validate(),
            Err(FrameError::AccelerationOutOfRange(250.0))
        );
        assert!(matches!(
            SensorFrame { quat: [0.0; 4], ..frame() }.validate(),
            Err(FrameError::NonUnitQuaternion(_))
        ));
    }

    #[test]
    fn near_unit_quaternion_is_renormalized() {
        let q = unit_quat([1.00005, 0.0, 0.0, 0.0]).unwrap();
        assert!((q.quaternion().norm() - 1.0).abs() < 1e-12);
        assert!(unit_quat([1.0002, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn placement_names_round_trip() {
        for p in Placement::ALL {
            assert_eq!(p.as_str().parse::<Placement>().unwrap(), p);
        }
        assert!("left_elbow".parse::<Placement>().is_err());
    }

    #[test]
    fn placement_map_rejects_duplicates() {
        assert_eq!(
            PlacementMap::new([(0, Placement::LeftWrist), (1, Placement::LeftWrist)]),
            Err(PlacementMapError::DuplicatePlacement(Placement::LeftWrist))
        );
        let json = serde_json::to_string(&PlacementMap::default()).unwrap();
        assert_eq!(
            json,
            r#"{"0":"right_upper_arm","1":"left_wrist","2":"left_ankle","3":"right_ankle"}"#
        );
        assert_eq!(serde_json::from_str::<PlacementMap>(&json).unwrap(), PlacementMap::default());
    }
}
