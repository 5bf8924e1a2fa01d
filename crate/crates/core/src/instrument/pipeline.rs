//! Reorder buffer in front of the engine.

use super::engine::{CanvasFrameState, Engine, EngineError};
use crate::ingest::{IngestStats, ReorderBuffer};
use crate::motion::SensorFrame;

/// Ingest queue plus engine, driven by one tick source.
#[derive(Debug)]
pub struct Pipeline {
    reorder: ReorderBuffer,
    engine: Engine,
    released: Vec<SensorFrame>,
    invalid: u64,
}

impl Pipeline {
    pub fn new(engine: Engine, reorder_window_us: u64) -> Self {
        Pipeline { reorder: ReorderBuffer::new(reorder_window_us), engine, released: Vec::new(), invalid: 0 }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn ingest_stats(&self) -> &IngestStats {
        self.reorder.stats()
    }

    /// Frames rejected before reordering (bad device id, bad quaternion).
    pub fn invalid(&self) -> u64 {
        self.invalid
    }

    /// Accepts one frame as it arrives.
    pub fn offer(&mut self, frame: SensorFrame) {
        if frame.validate().is_err() {
            self.invalid += 1;
            return;
        }
        self.reorder.push(frame);
    }

    /// Releases ordered frames into the engine, copies them to `released`,
    /// then ticks.
    pub fn tick(&mut self, t_us: u64, released: &mut Vec<SensorFrame>) -> Result<CanvasFrameState, EngineError> {
        self.reorder.drain_ready(&mut self.released);
        self.forward(released);
        self.engine.tick(t_us)
    }

    /// Releases everything held, without ticking.
    pub fn flush(&mut self, released: &mut Vec<SensorFrame>) {
        self.reorder.flush(&mut self.released);
        self.forward(released);
    }

    fn forward(&mut self, released: &mut Vec<SensorFrame>) {
        for f in self.released.drain(..) {
            self.engine.push_frame(f);
            released.push(f);
        }
    }
}
