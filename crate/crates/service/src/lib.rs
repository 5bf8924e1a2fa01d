//! Network face of the instrument: the `/feed` broadcast of canvas frames,
//! the `/control` operator channel and the `/textures` asset route.

pub mod broadcast;
pub mod control;
pub mod server;
pub mod wire;

pub use broadcast::{Broadcaster, Lagged, Subscription, DEFAULT_BACKLOG};
pub use control::{apply_engine_command, ControlRequest};
pub use server::{serve, RunningService, ServiceState, DEFAULT_FEED_PORT};
pub use wire::{feed_messages, parse_command, Command, FeedMessage, RecordAction, Reply, WireBrush};
