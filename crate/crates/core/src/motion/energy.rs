//! Windowed acceleration energy.
//!
//! Each sample contributes `(|ax| + |ay| + |az|) · Δt`, where `Δt` is the
//! gap to the previous sample capped at twice the nominal sample period.
//! The energy is the sum of contributions whose timestamps lie within the
//! window behind the newest sample, so it builds up under sustained
//! movement and falls back to zero one window after the movement stops.

use std::collections::VecDeque;

use thiserror::Error;

pub const DEFAULT_WINDOW_S: f64 = 0.5;
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("timestamp {t_us} µs is not after previous sample at {last_us} µs")]
    OutOfOrder { t_us: u64, last_us: u64 },
    #[error("invalid energy window {0} s")]
    InvalidWindow(f64),
    #[error("invalid nominal sample rate {0} Hz")]
    InvalidRate(f64),
}

pub(crate) fn seconds_to_us(s: f64) -> u64 {
    (s * 1e6).round() as u64
}

/// Sliding-window energy for one device.
#[derive(Debug, Clone)]
pub struct EnergyTracker {
    window_us: u64,
    nominal_period_us: u64,
    /// `(t_us, contribution)` oldest first.
    samples: VecDeque<(u64, f64)>,
    last_t_us: Option<u64>,
    energy: f64,
}

impl EnergyTracker {
    pub fn new(window_s: f64) -> Result<Self, EnergyError> {
        Self::with_rate(window_s, DEFAULT_SAMPLE_RATE_HZ)
    }

    /// Tracker whose dropout cap is derived from `sample_rate_hz`.
    pub fn with_rate(window_s: f64, sample_rate_hz: f64) -> Result<Self, EnergyError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(EnergyError::InvalidRate(sample_rate_hz));
        }
        let nominal_period_us = seconds_to_us(1.0 / sample_rate_hz).max(1);
        Ok(EnergyTracker {
            window_us: validate_window(window_s)?,
            nominal_period_us,
            samples: VecDeque::new(),
            last_t_us: None,
            energy: 0.0,
        })
    }

    pub fn window_s(&self) -> f64 {
        self.window_us as f64 * 1e-6
    }

    pub fn nominal_period_us(&self) -> u64 {
        self.nominal_period_us
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn last_t_us(&self) -> Option<u64> {
        self.last_t_us
    }

    /// Changes the window length and re-evaluates at the newest sample.
    pub fn set_window(&mut self, window_s: f64) -> Result<(), EnergyError> {
        self.window_us = validate_window(window_s)?;
        if let Some(t) = self.last_t_us {
            self.evict(t);
        }
        self.energy = self.sum();
        Ok(())
    }

    /// Folds one sample of `|ax|+|ay|+|az|` (m/s²) taken at `t_us` and
    /// returns the new energy in m/s.
    pub fn update(&mut self, t_us: u64, acc_l1: f64) -> Result<f64, EnergyError> {
        let gap_us = match self.last_t_us {
            Some(last) if t_us <= last => return Err(EnergyError::OutOfOrder { t_us, last_us: last }),
            Some(last) => (t_us - last).min(2 * self.nominal_period_us),
            None => self.nominal_period_us,
        };
        self.samples.push_back((t_us, acc_l1 * (gap_us as f64 * 1e-6)));
        self.last_t_us = Some(t_us);
        self.evict(t_us);
        self.energy = self.sum();
        Ok(self.energy)
    }

    /// Energy as seen at a later time `t_us` with no new samples. Samples that
    /// have left the window are discarded.
    pub fn decay_to(&mut self, t_us: u64) -> f64 {
        if self.last_t_us.is_some_and(|last| t_us > last) {
            self.evict(t_us);
            self.energy = self.sum();
        }
        self.energy
    }

    pub fn reset(&mut self) {
        self.samples.clear();
        self.last_t_us = None;
        self.energy = 0.0;
    }

    fn evict(&mut self, now_us: u64) {
        while let Some(&(t, _)) = self.samples.front() {
            if now_us - t >= self.window_us {
                self.samples.pop_front();
            } else {
                break;
            }
        }
    }

    fn sum(&self) -> f64 {
        self.samples.iter().map(|(_, c)| c).sum()
    }
}

fn validate_window(window_s: f64) -> Result<u64, EnergyError> {
    if !(window_s.is_finite() && window_s > 0.0 && window_s <= 60.0) {
        return Err(EnergyError::InvalidWindow(window_s));
    }
    Ok(seconds_to_us(window_s).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stream_has_zero_energy() {
        let mut tr = EnergyTracker::new(0.5).unwrap();
        for i in 0..200u64 {
            assert_eq!(tr.update(i * 10_000, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_unit_acceleration_settles_at_one_and_a_half() {
        let mut tr = EnergyTracker::new(0.5).unwrap();
        let mut e = 0.0;
        for i in 0..300u64 {
            e = tr.update(i * 10_000, 3.0).unwrap();
        }
        assert!((e - 1.5).abs() / 1.5 < 0.02, "{e}");
    }

    #[test]
    fn build_up_is_monotone_until_full() {
        let mut tr = EnergyTracker::new(0.5).unwrap();
        let mut prev = 0.0;
        for i in 0..50u64 {
            let e = tr.update(i * 10_000, 2.0).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn spike_leaves_after_one_window() {
        let mut tr = EnergyTracker::new(0.5).unwrap();
        assert!(tr.update(0, 30.0).unwrap() > 0.0);
        let mut t = 0;
        while t < 500_000 {
            t += 10_000;
            let e = tr.update(t, 0.0).unwrap();
            if t < 500_000 {
                assert!(e > 0.0);
            } else {
                assert_eq!(e, 0.0);
            }
        }
    }

    #[test]
    fn dropout_gap_is_capped() {
        let mut tr = EnergyTracker::new(2.0).unwrap();
        tr.update(0, 0.0).unwrap();
        // 1 s gap counts as 20 ms.
        let e = tr.update(1_000_000, 10.0).unwrap();
        assert!((e - 0.2).abs() < 1e-12, "{e}");
    }

    #[test]
    fn out_of_order_rejected_and_state_kept() {
        let mut tr = EnergyTracker::new(0.5).unwrap();
        let e = tr.update(10_000, 1.0).unwrap();
        assert_eq!(
            tr.update(10_000, 5.0),
            Err(EnergyError::OutOfOrder { t_us: 10_000, last_us: 10_000 })
        );
        assert_eq!(tr.energy(), e);
    }

    #[test]
    fn decay_to_empties_the_window() {
        let mut tr = EnergyTracker::new(0.5).unwrap();
        for i in 0..10u64 {
            tr.update(i * 10_000, 5.0).unwrap();
        }
        assert!(tr.decay_to(200_000) > 0.0);
        assert_eq!(tr.decay_to(590_000), 0.0);
    }

    #[test]
    fn invalid_windows() {
        assert!(EnergyTracker::new(0.0).is_err());
        assert!(EnergyTracker::new(f64::NAN).is_err());
        assert!(EnergyTracker::with_rate(0.5, 0.0).is_err());
    }
}
