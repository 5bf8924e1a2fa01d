//! Session recordings and their replay.

mod replay;
mod session;

pub use replay::{replay, replay_schedule, Clock, FakeClock, InvalidSpeed, Speed, SystemClock};
pub use session::{
    load_session, read_session, save_session, write_session, LoadedSession, ReadMode, SessionError, SessionHeader,
    SessionRecording, SessionWriter, SkippedLine, SESSION_EXTENSION,
};
