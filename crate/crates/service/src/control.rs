//! Applying operator commands to the engine.

use motionbrush::instrument::{Engine, Param};
use tokio::sync::oneshot;

use crate::wire::{Command, Reply};

/// A command from a `/control` socket waiting for the engine loop.
#[derive(Debug)]
pub struct ControlRequest {
    pub command: Command,
    pub reply: oneshot::Sender<Reply>,
}

/// Applies an engine command and returns its reply. `record` commands are
/// not engine state and return `None` for the host to handle.
pub fn apply_engine_command(engine: &mut Engine, command: &Command) -> Option<Reply> {
    let cmd = command.kind();
    Some(match command {
        Command::SetParam { name, dev, value } => {
            match name.parse::<Param>().and_then(|p| engine.set_param(p, *dev, *value)) {
                Ok(applied) => Reply::Ack { cmd: cmd.into(), name: Some(name.clone()), dev: *dev, value: Some(applied.into()) },
                Err(e) => Reply::error(e.code(), e.to_string()),
            }
        }
        Command::TriggerKeyMoment { tex } => match engine.trigger_key_moment(tex) {
            Ok(()) => Reply::ack(cmd, Some(tex.clone().into())),
            Err(e) => Reply::error(e.code(), e.to_string()),
        },
        Command::AdvanceScene => {
            engine.advance_scene();
            Reply::ack(cmd, None)
        }
        Command::Record { .. } => return None,
    })
}
