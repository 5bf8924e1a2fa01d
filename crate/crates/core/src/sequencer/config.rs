use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_KEY_MOMENT_S: f64 = 30.0;

/// One timed segment of the performance and its texture pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: String,
    /// Offset from the start of the performance.
    pub start_s: f64,
    /// Texture ids (asset paths relative to the texture root).
    pub textures: Vec<String>,
    /// Operator-facing cue, e.g. a marker in the soundtrack.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyMoment {
    pub time_s: f64,
    pub texture: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub scenes: Vec<Scene>,
    /// Textures that only appear at key moments.
    #[serde(default)]
    pub paintings: Vec<String>,
    #[serde(default)]
    pub key_moments: Vec<KeyMoment>,
    #[serde(default = "default_key_moment_s")]
    pub key_moment_duration_s: f64,
}

fn default_key_moment_s() -> f64 {
    DEFAULT_KEY_MOMENT_S
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// JSON-path-like location, e.g. `scenes[2].textures`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum SceneConfigError {
    #[error("reading scene config: {0}")]
    Io(#[from] std::io::Error),
    #[error("scene config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scene config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ConfigIssue>),
}

impl SceneConfig {
    /// Every invariant violation, not just the first.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut push = |location: String, message: String| issues.push(ConfigIssue { location, message });
        if self.scenes.is_empty() {
            push("scenes".into(), "at least one scene is required".into());
        }
        let mut ids = HashSet::new();
        for (i, scene) in self.scenes.iter().enumerate() {
            let here = format!("scenes[{i}]");
            if !ids.insert(scene.id.as_str()) {
                push(format!("{here}.id"), format!("duplicate scene id `{}`", scene.id));
            }
            if !(scene.start_s.is_finite() && scene.start_s >= 0.0) {
                push(format!("{here}.start_s"), format!("start {} must be a non-negative number", scene.start_s));
            }
            if i > 0 && scene.start_s <= self.scenes[i - 1].start_s {
                push(
                    format!("{here}.start_s"),
                    format!("start {} must be after previous scene start {}", scene.start_s, self.scenes[i - 1].start_s),
                );
            }
            if scene.textures.is_empty() {
                push(format!("{here}.textures"), format!("scene `{}` has an empty texture pool", scene.id));
            }
            let mut seen = HashSet::new();
            for (j, t) in scene.textures.iter().enumerate() {
                if t.is_empty() {
                    push(format!("{here}.textures[{j}]"), "empty texture id".into());
                } else if !seen.insert(t.as_str()) {
                    push(format!("{here}.textures[{j}]"), format!("duplicate texture `{t}`"));
                }
            }
        }
        for (i, km) in self.key_moments.iter().enumerate() {
            if !(km.time_s.is_finite() && km.time_s >= 0.0) {
                push(format!("key_moments[{i}].time_s"), format!("time {} must be a non-negative number", km.time_s));
            }
            if !self.in_catalog(&km.texture) {
                push(format!("key_moments[{i}].texture"), format!("texture `{}` is not in the catalog", km.texture));
            }
        }
        if !(self.key_moment_duration_s.is_finite() && self.key_moment_duration_s > 0.0) {
            push("key_moment_duration_s".into(), "must be positive".into());
        }
        issues
    }

    pub fn validate(&self) -> Result<(), SceneConfigError> {
        let issues = self.issues();
        if issues.is_empty() { Ok(()) } else { Err(SceneConfigError::Invalid(issues)) }
    }

    /// Scene pools plus paintings.
    pub fn catalog(&self) -> impl Iterator<Item = &str> {
        self.scenes.iter().flat_map(|s| s.textures.iter()).chain(&self.paintings).map(String::as_str)
    }

    pub fn in_catalog(&self, texture: &str) -> bool {
        self.catalog().any(|t| t == texture)
    }

    pub fn from_json(text: &str) -> Result<Self, SceneConfigError> {
        let mut config: SceneConfig = serde_json::from_str(text)?;
        config.validate()?;
        config.key_moments.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        Ok(config)
    }
}

pub fn load_scenes(path: impl AsRef<Path>) -> Result<SceneConfig, SceneConfigError> {
    SceneConfig::from_json(&fs::read_to_string(path)?)
}

/// Index of the scene active at `t_s`: the last scene starting at or before
/// `t_s`, or the first scene before the timeline begins.
pub fn scene_index_at(t_s: f64, config: &SceneConfig) -> usize {
    config.scenes.partition_point(|s| s.start_s <= t_s).saturating_sub(1)
}

pub fn current_scene(t_s: f64, config: &SceneConfig) -> &str {
    &config.scenes[scene_index_at(t_s, config)].id
}
