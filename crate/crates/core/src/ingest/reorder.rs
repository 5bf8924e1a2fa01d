//! Per-device ordering with a short hold-back buffer.
//!
//! A frame is held until the newest timestamp seen for its device is at
//! least `window` ahead of it, then released in timestamp order. A frame that
//! arrives behind something already released can no longer be placed and is
//! dropped.

use std::collections::BTreeMap;

use crate::motion::{SensorFrame, DEVICE_COUNT};

pub const DEFAULT_REORDER_WINDOW_US: u64 = 20_000;

/// Drop counters, per device.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub accepted: [u64; DEVICE_COUNT],
    pub dropped_late: [u64; DEVICE_COUNT],
    pub dropped_duplicate: [u64; DEVICE_COUNT],
}

impl IngestStats {
    pub fn total_dropped(&self) -> u64 {
        self.dropped_late.iter().chain(&self.dropped_duplicate).sum()
    }

    pub fn total_accepted(&self) -> u64 {
        self.accepted.iter().sum()
    }
}

#[derive(Debug, Default, Clone)]
struct DeviceQueue {
    pending: BTreeMap<u64, SensorFrame>,
    newest_seen: Option<u64>,
    last_emitted: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct ReorderBuffer {
    window_us: u64,
    devices: [DeviceQueue; DEVICE_COUNT],
    stats: IngestStats,
}

impl Default for ReorderBuffer {
    fn default() -> Self {
        Self::new(DEFAULT_REORDER_WINDOW_US)
    }
}

impl ReorderBuffer {
    pub fn new(window_us: u64) -> Self {
        ReorderBuffer { window_us, devices: Default::default(), stats: IngestStats::default() }
    }

    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    /// Accepts one frame. Frames for devices outside `0..DEVICE_COUNT` must
    /// have been rejected by validation upstream.
    pub fn push(&mut self, frame: SensorFrame) {
        let dev = frame.device_id as usize;
        let q = &mut self.devices[dev];
        if q.last_emitted.is_some_and(|last| frame.t_us <= last) {
            self.stats.dropped_late[dev] += 1;
            return;
        }
        if q.pending.contains_key(&frame.t_us) {
            self.stats.dropped_duplicate[dev] += 1;
            return;
        }
        q.pending.insert(frame.t_us, frame);
        q.newest_seen = Some(q.newest_seen.map_or(frame.t_us, |n| n.max(frame.t_us)));
        self.stats.accepted[dev] += 1;
    }

    /// Moves every frame that is at least one window behind its device's
    /// newest timestamp into `out`, device by device.
    pub fn drain_ready(&mut self, out: &mut Vec<SensorFrame>) {
        let window = self.window_us;
        for q in &mut self.devices {
            let Some(newest) = q.newest_seen else { continue };
            let Some(cutoff) = newest.checked_sub(window) else { continue };
            let rest = q.pending.split_off(&(cutoff + 1));
            let ready = std::mem::replace(&mut q.pending, rest);
            if let Some((&t, _)) = ready.last_key_value() {
                q.last_emitted = Some(t);
            }
            out.extend(ready.into_values());
        }
    }

    /// Releases everything still held.
    pub fn flush(&mut self, out: &mut Vec<SensorFrame>) {
        for q in &mut self.devices {
            let ready = std::mem::take(&mut q.pending);
            if let Some((&t, _)) = ready.last_key_value() {
                q.last_emitted = Some(t);
            }
            out.extend(ready.into_values());
        }
    }

    pub fn pending(&self) -> usize {
        self.devices.iter().map(|q| q.pending.len()).sum()
    }
}

/// Runs a whole arrival sequence through a [`ReorderBuffer`] and returns
/// the released frames with the drop counters.
pub fn ingest_stream(
    source: impl IntoIterator<Item = SensorFrame>,
    window_us: u64,
) -> (Vec<SensorFrame>, IngestStats) {
    let mut buf = ReorderBuffer::new(window_us);
    let mut out = Vec::new();
    for f in source {
        buf.push(f);
        buf.drain_ready(&mut out);
    }
    buf.flush(&mut out);
    (out, *buf.stats())
}
