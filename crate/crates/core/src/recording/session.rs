//! Line-delimited JSON session files (`.mbsession.jsonl`).
//!
//! ```text
//! {"type":"header","session":"r7","start_unix_us":1700000000000000,"placements":{"0":"right_upper_arm",..},"video":null}
//! {"type":"frame","dev":0,"seq":1,"t_us":123,"quat":[1.0,0.0,0.0,0.0],"acc":[0.0,0.0,0.0]}
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every f32 bit for bit.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::motion::{CalibrationProfile, PlacementMap, SensorFrame, DEVICE_COUNT};

pub const SESSION_EXTENSION: &str = "mbsession.jsonl";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("i/o error after {bytes_written} bytes ({lines_written} lines): {source}")]
    Write { bytes_written: u64, lines_written: usize, source: io::Error },
    #[error("i/o error reading line {line}: {source}")]
    Read { line: usize, source: io::Error },
    #[error("missing session header")]
    MissingHeader,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: device {device} timestamp {t_us} not after {prev_us}")]
    Unordered { line: usize, device: u8, t_us: u64, prev_us: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    #[serde(rename = "session")]
    pub session_id: String,
    pub start_unix_us: u64,
    pub placements: PlacementMap,
    /// Path of a video captured alongside; synchronized via `start_unix_us`.
    pub video: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profiles: Vec<CalibrationProfile>,
}

impl SessionHeader {
    pub fn new(session_id: impl Into<String>, start_unix_us: u64) -> Self {
        SessionHeader {
            session_id: session_id.into(),
            start_unix_us,
            placements: PlacementMap::default(),
            video: None,
            profiles: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecording {
    pub header: SessionHeader,
    pub frames: Vec<SensorFrame>,
}

impl SessionRecording {
    /// Frames of one device in file order.
    pub fn device_frames(&self, device_id: u8) -> impl Iterator<Item = &SensorFrame> {
        self.frames.iter().filter(move |f| f.device_id == device_id)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Header(SessionHeader),
    Frame(FrameLine),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameLine {
    dev: u8,
    seq: u32,
    t_us: u64,
    quat: [f32; 4],
    acc: [f32; 3],
}

impl From<&SensorFrame> for FrameLine {
    fn from(f: &SensorFrame) -> Self {
        FrameLine { dev: f.device_id, seq: f.seq, t_us: f.t_us, quat: f.quat, acc: f.acc }
    }
}

impl From<FrameLine> for SensorFrame {
    fn from(l: FrameLine) -> Self {
        SensorFrame { device_id: l.dev, seq: l.seq, t_us: l.t_us, quat: l.quat, acc: l.acc }
    }
}

/// Tracks per-device timestamp order.
#[derive(Default)]
struct OrderCheck([Option<u64>; DEVICE_COUNT]);

impl OrderCheck {
    fn check(&mut self, f: &SensorFrame, line: usize) -> Result<(), SessionError> {
        let slot = &mut self.0[f.device_id as usize];
        if let Some(prev) = *slot {
            if f.t_us <= prev {
                return Err(SessionError::Unordered { line, device: f.device_id, t_us: f.t_us, prev_us: prev });
            }
        }
        *slot = Some(f.t_us);
        Ok(())
    }
}

/// Streaming writer: header on construction, then one line per frame.
pub struct SessionWriter<W: Write> {
    sink: W,
    order: OrderCheck,
    bytes_written: u64,
    lines_written: usize,
}

impl SessionWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, header: &SessionHeader) -> Result<Self, SessionError> {
        let file = File::create(path).map_err(|source| SessionError::Write { bytes_written: 0, lines_written: 0, source })?;
        SessionWriter::new(BufWriter::new(file), header)
    }
}

impl<W: Write> SessionWriter<W> {
    pub fn new(sink: W, header: &SessionHeader) -> Result<Self, SessionError> {
        let mut w = SessionWriter { sink, order: OrderCheck::default(), bytes_written: 0, lines_written: 0 };
        w.write_line(&Line::Header(header.clone()))?;
        Ok(w)
    }

    /// Appends a frame. Invalid or out-of-order frames are refused and
    /// nothing is written.
    pub fn write_frame(&mut self, frame: &SensorFrame) -> Result<(), SessionError> {
        let line = self.lines_written + 1;
        frame.validate().map_err(|e| SessionError::Malformed { line, msg: e.to_string() })?;
        self.order.check(frame, line)?;
        self.write_line(&Line::Frame(frame.into()))
    }

    pub fn lines_written(&self) -> usize {
        self.lines_written
    }

    pub fn finish(mut self) -> Result<W, SessionError> {
        self.sink.flush().map_err(|source| self.write_err(source))?;
        Ok(self.sink)
    }

    fn write_line(&mut self, line: &Line) -> Result<(), SessionError> {
        let mut text = serde_json::to_string(line).expect("session lines always serialize");
        text.push('\n');
        self.sink.write_all(text.as_bytes()).map_err(|source| self.write_err(source))?;
        self.bytes_written += text.len() as u64;
        self.lines_written += 1;
        Ok(())
    }

    fn write_err(&self, source: io::Error) -> SessionError {
        SessionError::Write { bytes_written: self.bytes_written, lines_written: self.lines_written, source }
    }
}

/// Writes a complete session. Fails before writing any frame if the frames
/// are not strictly increasing in time per device.
pub fn write_session<W: Write>(frames: &[SensorFrame], header: &SessionHeader, sink: W) -> Result<W, SessionError> {
    let mut order = OrderCheck::default();
    for (i, f) in frames.iter().enumerate() {
        order.check(f, i + 2)?;
    }
    let mut w = SessionWriter::new(sink, header)?;
    for f in frames {
        w.write_frame(f)?;
    }
    w.finish()
}

pub fn save_session(path: impl AsRef<Path>, session: &SessionRecording) -> Result<(), SessionError> {
    let file = File::create(path).map_err(|source| SessionError::Write { bytes_written: 0, lines_written: 0, source })?;
    write_session(&session.frames, &session.header, BufWriter::new(file)).map(drop)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadMode {
    /// First bad line aborts the read.
    Strict,
    /// Bad frame lines are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSession {
    pub session: SessionRecording,
    pub skipped: Vec<SkippedLine>,
}

pub fn read_session(source: impl BufRead, mode: ReadMode) -> Result<LoadedSession, SessionError> {
    let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = loop {
        match lines.next() {
            None => return Err(SessionError::MissingHeader),
            Some((line, text)) => {
                let text = text.map_err(|source| SessionError::Read { line, source })?;
                if text.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Line>(&text) {
                    Ok(Line::Header(h)) => break h,
                    Ok(Line::Frame(_)) => return Err(SessionError::MissingHeader),
                    Err(e) => return Err(SessionError::Malformed { line, msg: format!("bad header: {e}") }),
                }
            }
        }
    };

    let mut frames = Vec::new();
    let mut skipped = Vec::new();
    let mut order = OrderCheck::default();
    for (line, text) in lines {
        let text = text.map_err(|source| SessionError::Read { line, source })?;
        if text.trim().is_empty() {
            continue;
        }
        let parsed = parse_frame_line(&text, line).and_then(|f| order.check(&f, line).map(|_| f));
        match (parsed, mode) {
            (Ok(f), _) => frames.push(f),
            (Err(e), ReadMode::Strict) => return Err(e),
            (Err(e), ReadMode::Lenient) => skipped.push(SkippedLine { line, reason: e.to_string() }),
        }
    }
    Ok(LoadedSession { session: SessionRecording { header, frames }, skipped })
}

fn parse_frame_line(text: &str, line: usize) -> Result<SensorFrame, SessionError> {
    let malformed = |msg: String| SessionError::Malformed { line, msg };
    match serde_json::from_str::<Line>(text) {
        Ok(Line::Frame(l)) => {
            let f = SensorFrame::from(l);
            f.validate().map_err(|e| malformed(e.to_string()))?;
            Ok(f)
        }
        Ok(Line::Header(_)) => Err(malformed("second header".into())),
        Err(e) => Err(malformed(e.to_string())),
    }
}

pub fn load_session(path: impl AsRef<Path>, mode: ReadMode) -> Result<LoadedSession, SessionError> {
    let file = File::open(path).map_err(|source| SessionError::Read { line: 0, source })?;
    read_session(BufReader::new(file), mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(dev: u8, t_us: u64) -> SensorFrame {
        SensorFrame { device_id: dev, seq: t_us as u32, t_us, quat: [1.0, 0.0, 0.0, 0.0], acc: [0.1, -0.2, 9.5] }
    }

    fn header() -> SessionHeader {
        SessionHeader::new("rehearsal-3", 1_700_000_000_000_000)
    }

    #[test]
    fn header_line_schema() {
        let bytes = write_session(&[], &header(), Vec::new()).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "{\"type\":\"header\",\"session\":\"rehearsal-3\",\"start_unix_us\":1700000000000000,\
             \"placements\":{\"0\":\"right_upper_arm\",\"1\":\"left_wrist\",\"2\":\"left_ankle\",\"3\":\"right_ankle\"},\
             \"video\":null}\n"
        );
    }

    #[test]
    fn frame_line_schema() {
        let bytes = write_session(&[frame(0, 123)], &header(), Vec::new()).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            r#"{"type":"frame","dev":0,"seq":123,"t_us":123,"quat":[1.0,0.0,0.0,0.0],"acc":[0.1,-0.2,9.5]}"#
        );
    }

    #[test]
    fn empty_session_round_trips() {
        let bytes = write_session(&[], &header(), Vec::new()).unwrap();
        let loaded = read_session(&bytes[..], ReadMode::Strict).unwrap();
        assert_eq!(loaded.session, SessionRecording { header: header(), frames: vec![] });
    }

    #[test]
    fn unordered_input_refused() {
        let err = write_session(&[frame(1, 20), frame(0, 5), frame(1, 10)], &header(), Vec::new()).unwrap_err();
        assert!(matches!(err, SessionError::Unordered { device: 1, t_us: 10, prev_us: 20, .. }));
    }

    #[test]
    fn lenient_mode_skips_corrupt_line() {
        let frames: Vec<_> = (1..=5).map(|i| frame(0, i * 10_000)).collect();
        let bytes = write_session(&frames, &header(), Vec::new()).unwrap();
        let mut text = String::from_utf8(bytes).unwrap();
        text = text.replacen("\"seq\":30000", "\"seq\":30000,,", 1);
        let loaded = read_session(text.as_bytes(), ReadMode::Lenient).unwrap();
        assert_eq!(loaded.session.frames.len(), 4);
        assert_eq!(loaded.skipped.len(), 1);
        assert_eq!(loaded.skipped[0].line, 4);
        assert!(matches!(read_session(text.as_bytes(), ReadMode::Strict), Err(SessionError::Malformed { line: 4, .. })));
    }

    #[test]
    fn missing_header_is_fatal() {
        let text = r#"{"type":"frame","dev":0,"seq":1,"t_us":1,"quat":[1,0,0,0],"acc":[0,0,0]}"#;
        assert!(matches!(read_session(text.as_bytes(), ReadMode::Lenient), Err(SessionError::MissingHeader)));
        assert!(matches!(read_session(&b""[..], ReadMode::Lenient), Err(SessionError::MissingHeader)));
    }

    #[test]
    fn write_failure_reports_position() {
        #[derive(Debug)]
        struct Limited(usize);
        impl Write for Limited {
            fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
                if self.0 < buf.len() {
                    return Err(io::Error::other("disk full"));
                }
                self.0 -= buf.len();
                Ok(buf.len())
            }
            fn flush(&mut self) -> io::Result<()> {
                Ok(())
            }
        }
        let frames: Vec<_> = (1..=10).map(|i| frame(0, i)).collect();
        let err = write_session(&frames, &header(), Limited(400)).unwrap_err();
        match err {
            SessionError::Write { lines_written, bytes_written, .. } => {
                assert!((1..11).contains(&lines_written));
                assert!(bytes_written <= 400);
            }
            other => panic!("{other:?}"),
        }
    }
}
