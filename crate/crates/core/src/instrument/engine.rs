//! The brush engine: frames in, canvas snapshots out, one tick at a time.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stillness::{StillnessDetector, StillnessParams};
use crate::motion::{
    map_to_canvas, normalize_energy, pointing_direction, seconds_to_us, yaw_pitch, CalibrationProfile, CanvasPoint,
    EnergyTracker, Placement, PlacementMap, ProfileError, SensorFrame, DEVICE_COUNT,
};
use crate::sequencer::{cycle_texture, pick_texture, SceneConfigError, Sequencer, SequencerEvent};

pub const DEFAULT_TICK_HZ: f64 = 60.0;
pub const DEFAULT_STALE_AFTER_S: f64 = 0.5;
pub const DEFAULT_W_MIN: f64 = 0.02;
pub const DEFAULT_W_MAX: f64 = 0.15;
pub const DEFAULT_FADE_HALF_LIFE_S: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub tick_hz: f64,
    pub stale_after_s: f64,
    /// Stroke width at zero energy, as a fraction of canvas height.
    pub w_min: f64,
    /// Stroke width at full energy.
    pub w_max: f64,
    /// Renderer fade half-life. The engine only relays it.
    pub fade_half_life_s: f64,
    pub stillness: StillnessParams,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tick_hz: DEFAULT_TICK_HZ,
            stale_after_s: DEFAULT_STALE_AFTER_S,
            w_min: DEFAULT_W_MIN,
            w_max: DEFAULT_W_MAX,
            fade_half_life_s: DEFAULT_FADE_HALF_LIFE_S,
            stillness: StillnessParams::default(),
        }
    }
}

/// Time of tick `k` for a clock started at `t0_us`.
pub fn tick_time_us(t0_us: u64, k: u64, tick_hz: f64) -> u64 {
    t0_us + (k as f64 * 1e6 / tick_hz).round() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrushState {
    pub brush_id: u8,
    pub position: CanvasPoint,
    /// Normalized energy in [0, 1].
    pub e: f64,
    /// `w_min + e·(w_max − w_min)`.
    pub width: f64,
    pub texture_id: String,
    pub still: bool,
    /// No frame for longer than the staleness limit.
    pub stale: bool,
    pub last_cycle_t_us: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EngineEvent {
    TextureCycle { id: u8, tex: String },
    SceneChange { scene: String },
    KeyMoment { tex: String },
    /// A parameter change applied before this tick.
    Param { name: Param, dev: Option<u8>, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanvasFrameState {
    pub t_us: u64,
    pub scene_id: String,
    pub brushes: Vec<BrushState>,
    pub events: Vec<EngineEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Epsilon,
    HoldS,
    CooldownS,
    WindowS,
    WMin,
    WMax,
    FadeHalfLife,
}

impl Param {
    pub const ALL: [Param; 7] =
        [Param::Epsilon, Param::HoldS, Param::CooldownS, Param::WindowS, Param::WMin, Param::WMax, Param::FadeHalfLife];

    pub fn as_str(self) -> &'static str {
        match self {
            Param::Epsilon => "epsilon",
            Param::HoldS => "hold_s",
            Param::CooldownS => "cooldown_s",
            Param::WindowS => "window_s",
            Param::WMin => "w_min",
            Param::WMax => "w_max",
            Param::FadeHalfLife => "fade_half_life",
        }
    }

    /// Whether the parameter can be set for a single device.
    pub fn per_device(self) -> bool {
        matches!(self, Param::Epsilon | Param::HoldS | Param::CooldownS | Param::WindowS)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Param {
    type Err = ParamError;
    fn from_str(s: &str) -> Result<Self, ParamError> {
        Param::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| ParamError::UnknownParam(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("{name} = {value} rejected: {reason}")]
    InvalidValue { name: Param, value: f64, reason: &'static str },
    #[error("no brush with device id {0}")]
    UnknownDevice(u8),
    #[error("{0} applies to all brushes and takes no device")]
    NotPerDevice(Param),
    #[error("texture `{0}` is not in the catalog")]
    UnknownTexture(String),
}

impl ParamError {
    /// Stable machine-readable code for wire error replies.
    pub fn code(&self) -> &'static str {
        match self {
            ParamError::UnknownParam(_) => "unknown_param",
            ParamError::InvalidValue { .. } => "invalid_value",
            ParamError::UnknownDevice(_) => "unknown_device",
            ParamError::NotPerDevice(_) => "not_per_device",
            ParamError::UnknownTexture(_) => "unknown_texture",
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("tick at {t_us} µs does not follow the previous tick at {last_us} µs")]
    NonMonotonicTick { t_us: u64, last_us: u64 },
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scenes(#[from] SceneConfigError),
    #[error("profile for {placement}: {source}")]
    Profile { placement: Placement, source: ProfileError },
}

/// Counters for frames the engine refused.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub folded: [u64; DEVICE_COUNT],
    pub rejected: [u64; DEVICE_COUNT],
}

#[derive(Debug, Clone)]
struct Slot {
    profile: CalibrationProfile,
    energy: EnergyTracker,
    detector: StillnessDetector,
    inbox: VecDeque<SensorFrame>,
    last_frame_us: Option<u64>,
    state: BrushState,
}

/// Single-owner brush engine. Deterministic in (frames, profiles, scenes,
/// seed, tick times).
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: EngineConfig,
    slots: BTreeMap<u8, Slot>,
    sequencer: Sequencer,
    rng: ChaCha8Rng,
    t0_us: Option<u64>,
    last_tick_us: Option<u64>,
    queued: Vec<EngineEvent>,
    stats: EngineStats,
}

impl Engine {
    /// One brush per entry in `placements`. Placements without a profile
    /// run uncalibrated.
    pub fn new(
        placements: &PlacementMap,
        profiles: &[CalibrationProfile],
        sequencer: Sequencer,
        seed: u64,
        cfg: EngineConfig,
    ) -> Result<Self, EngineError> {
        validate_config(&cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut slots = BTreeMap::new();
        for (dev, placement) in placements.iter() {
            let profile = profiles
                .iter()
                .find(|p| p.placement == placement)
                .cloned()
                .unwrap_or_else(|| CalibrationProfile::uncalibrated(placement));
            profile.validate().map_err(|source| EngineError::Profile { placement, source })?;
            let energy = EnergyTracker::new(profile.window_s)
                .map_err(|e| EngineError::Config(format!("{placement}: {e}")))?;
            let state = BrushState {
                brush_id: dev,
                position: CanvasPoint::CENTRE,
                e: 0.0,
                width: cfg.w_min,
                texture_id: pick_texture(sequencer.pool(), &mut rng),
                still: false,
                stale: true,
                last_cycle_t_us: None,
            };
            let detector = StillnessDetector::new(cfg.stillness);
            slots.insert(dev, Slot { profile, energy, detector, inbox: VecDeque::new(), last_frame_us: None, state });
        }
        Ok(Engine { cfg, slots, sequencer, rng, t0_us: None, last_tick_us: None, queued: Vec::new(), stats: EngineStats::default() })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn sequencer(&self) -> &Sequencer {
        &self.sequencer
    }

    pub fn stats(&self) -> &EngineStats {
        &self.stats
    }

    pub fn brushes(&self) -> impl Iterator<Item = &BrushState> {
        self.slots.values().map(|s| &s.state)
    }

    pub fn last_tick_us(&self) -> Option<u64> {
        self.last_tick_us
    }

    /// Queues an ordered frame. It is folded on the first tick at or after
    /// its timestamp.
    pub fn push_frame(&mut self, frame: SensorFrame) {
        let dev = frame.device_id as usize;
        match self.slots.get_mut(&frame.device_id) {
            Some(slot) if frame.validate().is_ok() => slot.inbox.push_back(frame),
            _ if dev < DEVICE_COUNT => self.stats.rejected[dev] += 1,
            _ => {}
        }
    }

    /// Applies an operator parameter change and returns the value now in
    /// effect. `dev = None` applies to every brush.
    pub fn set_param(&mut self, name: Param, dev: Option<u8>, value: f64) -> Result<f64, ParamError> {
        let bad = |reason| ParamError::InvalidValue { name, value, reason };
        if !value.is_finite() {
            return Err(bad("not a finite number"));
        }
        if let Some(d) = dev {
            if !name.per_device() {
                return Err(ParamError::NotPerDevice(name));
            }
            if !self.slots.contains_key(&d) {
                return Err(ParamError::UnknownDevice(d));
            }
        }
        match name {
            Param::Epsilon if value <= 0.0 => return Err(bad("must be positive")),
            Param::HoldS if value <= 0.0 => return Err(bad("must be positive")),
            Param::CooldownS if value < 0.0 => return Err(bad("must not be negative")),
            Param::WindowS if value <= 0.0 => return Err(bad("must be positive")),
            Param::WMin if !(0.0..self.cfg.w_max).contains(&value) => return Err(bad("must lie in [0, w_max)")),
            Param::WMax if !(value > self.cfg.w_min && value <= 1.0) => return Err(bad("must lie in (w_min, 1]")),
            Param::FadeHalfLife if value <= 0.0 => return Err(bad("must be positive")),
            _ => {}
        }
        match name {
            Param::WMin => self.cfg.w_min = value,
            Param::WMax => self.cfg.w_max = value,
            Param::FadeHalfLife => self.cfg.fade_half_life_s = value,
            _ => {
                for (_, slot) in self.slots.iter_mut().filter(|(d, _)| dev.is_none_or(|x| x == **d)) {
                    let mut p = slot.detector.params();
                    match name {
                        Param::Epsilon => p.epsilon = value,
                        Param::HoldS => p.hold_s = value,
                        Param::CooldownS => p.cooldown_s = value,
                        _ => {
                            slot.energy.set_window(value).map_err(|_| bad("must be positive"))?;
                            slot.profile.window_s = value;
                        }
                    }
                    slot.detector.set_params(p);
                }
                if dev.is_none() {
                    let p = &mut self.cfg.stillness;
                    match name {
                        Param::Epsilon => p.epsilon = value,
                        Param::HoldS => p.hold_s = value,
                        Param::CooldownS => p.cooldown_s = value,
                        _ => {}
                    }
                }
            }
        }
        self.queued.push(EngineEvent::Param { name, dev, value });
        Ok(value)
    }

    /// Every brush takes `texture` on the next tick.
    pub fn trigger_key_moment(&mut self, texture: &str) -> Result<(), ParamError> {
        self.sequencer.request_key_moment(texture).map_err(|e| ParamError::UnknownTexture(e.0))
    }

    /// Moves to the next scene on the next tick.
    pub fn advance_scene(&mut self) {
        self.sequencer.request_advance_scene();
    }

    /// Produces the snapshot for time `t_us`. The first tick starts the
    /// scene timeline.
    pub fn tick(&mut self, t_us: u64) -> Result<CanvasFrameState, EngineError> {
        if let Some(last) = self.last_tick_us {
            if t_us <= last {
                return Err(EngineError::NonMonotonicTick { t_us, last_us: last });
            }
        }
        self.last_tick_us = Some(t_us);
        let t0 = *self.t0_us.get_or_insert(t_us);
        let mut events = std::mem::take(&mut self.queued);

        for ev in self.sequencer.advance((t_us - t0) as f64 * 1e-6) {
            match ev {
                SequencerEvent::SceneChange { scene } => {
                    if !self.sequencer.cycling_suspended() {
                        self.reassign_from_pool();
                    }
                    events.push(EngineEvent::SceneChange { scene });
                }
                SequencerEvent::KeyMomentStart { texture } => {
                    for slot in self.slots.values_mut() {
                        slot.state.texture_id.clone_from(&texture);
                    }
                    events.push(EngineEvent::KeyMoment { tex: texture });
                }
                SequencerEvent::KeyMomentEnd => self.reassign_from_pool(),
            }
        }

        let stale_us = seconds_to_us(self.cfg.stale_after_s);
        let (w_min, w_max) = (self.cfg.w_min, self.cfg.w_max);
        let suspended = self.sequencer.cycling_suspended();
        for (&dev, slot) in self.slots.iter_mut() {
            let mut newest = None;
            while slot.inbox.front().is_some_and(|f| f.t_us <= t_us) {
                let f = slot.inbox.pop_front().expect("front checked");
                match (slot.energy.update(f.t_us, f.acc_l1()), f.orientation()) {
                    (Ok(_), Ok(q)) => {
                        newest = Some(q);
                        slot.last_frame_us = Some(f.t_us);
                        self.stats.folded[dev as usize] += 1;
                    }
                    _ => self.stats.rejected[dev as usize] += 1,
                }
            }
            if let Some(q) = newest {
                let yp = yaw_pitch(&pointing_direction(&q, &slot.profile.q_ref));
                slot.state.position = map_to_canvas(yp.yaw, yp.pitch, &slot.profile);
            }
            let energy = slot.energy.decay_to(t_us);
            let st = &mut slot.state;
            st.e = normalize_energy(energy, &slot.profile);
            st.width = w_min + st.e * (w_max - w_min);
            st.stale = slot.last_frame_us.is_none_or(|l| t_us.saturating_sub(l) > stale_us);
            if st.stale {
                slot.detector.disarm();
                st.still = false;
                continue;
            }
            if slot.detector.update(energy, t_us) && !suspended {
                st.texture_id = cycle_texture(&st.texture_id, self.sequencer.pool(), &mut self.rng);
                st.last_cycle_t_us = Some(t_us);
                events.push(EngineEvent::TextureCycle { id: dev, tex: st.texture_id.clone() });
            }
            st.still = slot.detector.is_still();
        }

        Ok(CanvasFrameState {
            t_us,
            scene_id: self.sequencer.scene_id().to_owned(),
            brushes: self.slots.values().map(|s| s.state.clone()).collect(),
            events,
        })
    }

    fn reassign_from_pool(&mut self) {
        let pool = self.sequencer.pool();
        for slot in self.slots.values_mut() {
            slot.state.texture_id = pick_texture(pool, &mut self.rng);
        }
    }
}

fn validate_config(cfg: &EngineConfig) -> Result<(), EngineError> {
    let fail = |m: &str| Err(EngineError::Config(m.to_owned()));
    if !(cfg.tick_hz.is_finite() && cfg.tick_hz > 0.0) {
        return fail("tick rate must be positive");
    }
    if !(cfg.stale_after_s.is_finite() && cfg.stale_after_s > 0.0) {
        return fail("staleness limit must be positive");
    }
    if !(0.0 <= cfg.w_min && cfg.w_min < cfg.w_max && cfg.w_max <= 1.0) {
        return fail("widths must satisfy 0 <= w_min < w_max <= 1");
    }
    if !(cfg.fade_half_life_s.is_finite() && cfg.fade_half_life_s > 0.0) {
        return fail("fade half-life must be positive");
    }
    let s = &cfg.stillness;
    if !(s.epsilon > 0.0 && s.hold_s > 0.0 && s.cooldown_s >= 0.0) || !(s.epsilon + s.hold_s + s.cooldown_s).is_finite() {
        return fail("stillness parameters must be positive");
    }
    Ok(())
}
