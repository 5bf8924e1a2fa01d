//! Re-emitting a recorded session with its original relative timing.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::motion::SensorFrame;

/// Replay rate relative to the recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    Factor(f64),
    /// As fast as possible.
    Unlimited,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("replay speed must be a positive number or `inf` (got `{0}`)")]
pub struct InvalidSpeed(pub String);

impl Speed {
    pub fn factor(f: f64) -> Result<Self, InvalidSpeed> {
        if f == f64::INFINITY {
            Ok(Speed::Unlimited)
        } else if f.is_finite() && f > 0.0 {
            Ok(Speed::Factor(f))
        } else {
            Err(InvalidSpeed(f.to_string()))
        }
    }
}

impl FromStr for Speed {
    type Err = InvalidSpeed;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "max" => Ok(Speed::Unlimited),
            _ => s.parse::<f64>().map_err(|_| InvalidSpeed(s.into())).and_then(Speed::factor),
        }
    }
}

impl fmt::Display for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speed::Factor(x) => write!(f, "{x}"),
            Speed::Unlimited => f.write_str("inf"),
        }
    }
}

/// Time source for paced replay. Times are microseconds since the replay
/// started.
pub trait Clock {
    fn now_us(&self) -> u64;
    fn sleep_until(&mut self, t_us: u64);
}

/// Wall clock.
#[derive(Debug)]
pub struct SystemClock {
    start: Instant,
}

impl SystemClock {
    pub fn start() -> Self {
        SystemClock { start: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now_us(&self) -> u64 {
        self.start.elapsed().as_micros() as u64
    }

    fn sleep_until(&mut self, t_us: u64) {
        let now = self.now_us();
        if t_us > now {
            std::thread::sleep(Duration::from_micros(t_us - now));
        }
    }
}

/// Clock that jumps straight to whatever time it is asked to wait for.
#[derive(Debug, Default, Clone)]
pub struct FakeClock {
    now: u64,
}

impl FakeClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for FakeClock {
    fn now_us(&self) -> u64 {
        self.now
    }

    fn sleep_until(&mut self, t_us: u64) {
        self.now = self.now.max(t_us);
    }
}

/// Emission offset of each frame, in the order given. Offsets are
/// `(t − t_first) / speed`, never decreasing so the file order is kept.
pub fn replay_schedule(frames: &[SensorFrame], speed: Speed) -> Vec<u64> {
    let Some(t0) = frames.iter().map(|f| f.t_us).min() else { return Vec::new() };
    let mut last = 0u64;
    frames
        .iter()
        .map(|f| {
            let offset = match speed {
                Speed::Unlimited => 0,
                Speed::Factor(x) => ((f.t_us - t0) as f64 / x).round() as u64,
            };
            last = last.max(offset);
            last
        })
        .collect()
}

/// Plays `frames` through `emit`, waiting on `clock` between frames. `emit`
/// receives the clock time at emission.
pub fn replay<C: Clock>(frames: &[SensorFrame], speed: Speed, clock: &mut C, mut emit: impl FnMut(&SensorFrame, u64)) {
    let start = clock.now_us();
    for (f, offset) in frames.iter().zip(replay_schedule(frames, speed)) {
        if speed != Speed::Unlimited {
            clock.sleep_until(start + offset);
        }
        emit(f, clock.now_us());
    }
}
