//! The live instrument: stillness detection, the brush engine and the
//! ingest pipeline that feeds it.

mod engine;
mod pipeline;
mod stillness;

pub use engine::{
    tick_time_us, BrushState, CanvasFrameState, Engine, EngineConfig, EngineError, EngineEvent, EngineStats, Param,
    ParamError, DEFAULT_FADE_HALF_LIFE_S, DEFAULT_STALE_AFTER_S, DEFAULT_TICK_HZ, DEFAULT_W_MAX, DEFAULT_W_MIN,
};
pub use pipeline::Pipeline;
pub use stillness::{
    StillnessDetector, StillnessParams, StillnessState, DEFAULT_COOLDOWN_S, DEFAULT_EPSILON, DEFAULT_HOLD_S,
};
