//! Stillness detection: sustained low energy fires a texture cycle.

use serde::{Deserialize, Serialize};

use crate::motion::seconds_to_us;

pub const DEFAULT_EPSILON: f64 = 0.15;
pub const DEFAULT_HOLD_S: f64 = 1.5;
pub const DEFAULT_COOLDOWN_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StillnessParams {
    /// Energy threshold (m/s).
    pub epsilon: f64,
    pub hold_s: f64,
    pub cooldown_s: f64,
}

impl Default for StillnessParams {
    fn default() -> Self {
        StillnessParams { epsilon: DEFAULT_EPSILON, hold_s: DEFAULT_HOLD_S, cooldown_s: DEFAULT_COOLDOWN_S }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StillnessState {
    Moving,
    Candidate { since_us: u64 },
    Still,
}

/// Per-device detector.
///
/// Moving → Candidate when energy drops below `epsilon`; Candidate → Still
/// after `hold_s` below threshold, which fires one event; any reading at or
/// above threshold returns to Moving. A new candidate cannot begin until
/// `cooldown_s` after the last event.
#[derive(Debug, Clone)]
pub struct StillnessDetector {
    params: StillnessParams,
    state: StillnessState,
    cooldown_until_us: u64,
}

impl StillnessDetector {
    pub fn new(params: StillnessParams) -> Self {
        StillnessDetector { params, state: StillnessState::Moving, cooldown_until_us: 0 }
    }

    pub fn params(&self) -> StillnessParams {
        self.params
    }

    pub fn set_params(&mut self, params: StillnessParams) {
        self.params = params;
    }

    pub fn state(&self) -> StillnessState {
        self.state
    }

    pub fn is_still(&self) -> bool {
        self.state == StillnessState::Still
    }

    /// Advances the machine with energy `e` observed at `t_us`. Returns
    /// true when a cycle event fires.
    pub fn update(&mut self, e: f64, t_us: u64) -> bool {
        if e.is_nan() || e >= self.params.epsilon {
            self.state = StillnessState::Moving;
            return false;
        }
        match self.state {
            StillnessState::Moving => {
                if t_us >= self.cooldown_until_us {
                    self.state = StillnessState::Candidate { since_us: t_us };
                    return self.fire_if_held(t_us, t_us);
                }
                false
            }
            StillnessState::Candidate { since_us } => self.fire_if_held(since_us, t_us),
            StillnessState::Still => false,
        }
    }

    /// Parks the detector so that it needs movement before it can fire
    /// again. Used while a device is stale.
    pub fn disarm(&mut self) {
        self.state = StillnessState::Still;
    }

    fn fire_if_held(&mut self, since_us: u64, t_us: u64) -> bool {
        if t_us.saturating_sub(since_us) >= seconds_to_us(self.params.hold_s) {
            self.state = StillnessState::Still;
            self.cooldown_until_us = t_us + seconds_to_us(self.params.cooldown_s);
            true
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TICK_US: u64 = 16_667;

    fn run(trace: impl Fn(u64) -> f64, ticks: u64) -> Vec<u64> {
        let mut d = StillnessDetector::new(StillnessParams::default());
        (0..ticks).map(|k| k * TICK_US).filter(|&t| d.update(trace(t), t)).collect()
    }

    #[test]
    fn always_above_threshold_never_fires() {
        assert!(run(|_| 0.15, 10_000).is_empty());
    }

    #[test]
    fn fires_once_hold_after_crossing() {
        let t0 = 1_000_000;
        let events = run(|t| if t < t0 { 1.0 } else { 0.0 }, 1_000);
        assert_eq!(events.len(), 1);
        let lag = events[0] as i64 - (t0 + 1_500_000) as i64;
        assert!((0..=TICK_US as i64).contains(&lag), "lag {lag}");
    }

    #[test]
    fn short_dip_fires_nothing() {
        let t0 = 1_000_000;
        let t1 = t0 + 1_500_000 - TICK_US;
        assert!(run(|t| if (t0..t1).contains(&t) { 0.0 } else { 1.0 }, 1_000).is_empty());
    }

    #[test]
    fn needs_movement_and_cooldown_to_refire() {
        let mut d = StillnessDetector::new(StillnessParams::default());
        assert!(!d.update(0.0, 0));
        assert!(d.update(0.0, 1_500_000));
        assert!(d.is_still());
        assert!(!d.update(0.0, 5_000_000));
        assert!(!d.update(1.0, 1_600_000 + 3_000_000));
        // Inside cooldown of the event at 1.5 s: no candidate starts.
        let mut d = StillnessDetector::new(StillnessParams::default());
        d.update(0.0, 0);
        d.update(0.0, 1_500_000);
        d.update(1.0, 1_600_000);
        d.update(0.0, 1_700_000);
        assert_eq!(d.state(), StillnessState::Moving);
        d.update(0.0, 2_500_000);
        assert_eq!(d.state(), StillnessState::Candidate { since_us: 2_500_000 });
        assert!(d.update(0.0, 4_000_000));
    }
}
