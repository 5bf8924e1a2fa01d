//! Scene timeline and texture pools.

mod config;
mod timeline;

pub use config::{
    current_scene, load_scenes, scene_index_at, ConfigIssue, KeyMoment, Scene, SceneConfig, SceneConfigError,
    DEFAULT_KEY_MOMENT_S,
};
pub use timeline::{cycle_texture, pick_texture, Sequencer, SequencerEvent, Takeover, UnknownTexture};
