//! JSON messages on the feed and control sockets.

use motionbrush::instrument::{CanvasFrameState, EngineEvent, Param};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireBrush {
    pub id: u8,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub e: f64,
    pub tex: String,
    pub still: bool,
    pub stale: bool,
}

/// Server-to-renderer messages on `/feed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeedMessage {
    Frame { t_us: u64, scene: String, brushes: Vec<WireBrush> },
    TextureCycle { id: u8, tex: String },
    SceneChange { scene: String },
    KeyMoment { tex: String },
    Param { name: Param, dev: Option<u8>, value: f64 },
}

impl FeedMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("feed messages always serialize")
    }
}

/// The frame message for a tick followed by one message per event.
pub fn feed_messages(state: &CanvasFrameState) -> Vec<FeedMessage> {
    let brushes = state
        .brushes
        .iter()
        .map(|b| WireBrush {
            id: b.brush_id,
            x: b.position.x,
            y: b.position.y,
            w: b.width,
            e: b.e,
            tex: b.texture_id.clone(),
            still: b.still,
            stale: b.stale,
        })
        .collect();
    let mut out = vec![FeedMessage::Frame { t_us: state.t_us, scene: state.scene_id.clone(), brushes }];
    out.extend(state.events.iter().map(|ev| match ev {
        EngineEvent::TextureCycle { id, tex } => FeedMessage::TextureCycle { id: *id, tex: tex.clone() },
        EngineEvent::SceneChange { scene } => FeedMessage::SceneChange { scene: scene.clone() },
        EngineEvent::KeyMoment { tex } => FeedMessage::KeyMoment { tex: tex.clone() },
        EngineEvent::Param { name, dev, value } => FeedMessage::Param { name: *name, dev: *dev, value: *value },
    }));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordAction {
    Start,
    Stop,
}

/// Operator commands on `/control`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    SetParam {
        name: String,
        #[serde(default)]
        dev: Option<u8>,
        value: f64,
    },
    TriggerKeyMoment { tex: String },
    AdvanceScene,
    Record { action: RecordAction },
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::SetParam { .. } => "set_param",
            Command::TriggerKeyMoment { .. } => "trigger_key_moment",
            Command::AdvanceScene => "advance_scene",
            Command::Record { .. } => "record",
        }
    }
}

/// Exactly one reply per command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    Ack {
        cmd: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dev: Option<u8>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<Value>,
    },
    Error { code: String, msg: String },
}

impl Reply {
    pub fn ack(cmd: &str, value: Option<Value>) -> Reply {
        Reply::Ack { cmd: cmd.to_owned(), name: None, dev: None, value }
    }

    pub fn error(code: &str, msg: impl Into<String>) -> Reply {
        Reply::Error { code: code.to_owned(), msg: msg.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("replies always serialize")
    }
}

/// Parses one control message. A malformed message yields the error reply
/// to send back.
pub fn parse_command(text: &str) -> Result<Command, Reply> {
    serde_json::from_str(text).map_err(|e| Reply::error("bad_command", e.to_string()))
}
