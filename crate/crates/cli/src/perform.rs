//! The live loop: source → reorder → engine → feed, one tick at a time.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use motionbrush::calibration::load_profile;
use motionbrush::ingest::{IngestStats, DEFAULT_REORDER_WINDOW_US};
use motionbrush::instrument::{tick_time_us, Engine, EngineConfig, EngineEvent, EngineStats, Pipeline};
use motionbrush::motion::{CalibrationProfile, Placement, PlacementMap, SensorFrame};
use motionbrush::recording::{load_session, Clock, ReadMode, SessionHeader, SessionWriter, Speed, SystemClock};
use motionbrush::sequencer::{load_scenes, Sequencer};
use motionbrush_service::{
    apply_engine_command, feed_messages, serve, Broadcaster, Command, ControlRequest, RecordAction, Reply,
    RunningService, ServiceState,
};
use tokio::sync::mpsc;

use crate::error::CliError;
use crate::source::{sim_stream, spawn_tcp, spawn_udp, LiveSource, Source};

#[derive(Debug, Clone)]
pub struct PerformOptions {
    pub source: Source,
    /// Directory holding `<placement>.json` profiles. Without it every
    /// brush runs uncalibrated.
    pub profiles: Option<PathBuf>,
    pub scenes: PathBuf,
    pub seed: u64,
    /// `None` runs without the feed server; port 0 picks a free port.
    pub feed_port: Option<u16>,
    pub textures: Option<PathBuf>,
    pub record: Option<PathBuf>,
    /// Every feed message, one JSON object per line.
    pub feed_log: Option<PathBuf>,
    /// Stop after this much stream time.
    pub duration_s: Option<f64>,
    /// Pacing for sim and replay sources. Live sources always run at 1.
    pub speed: Speed,
    pub engine: EngineConfig,
}

impl PerformOptions {
    pub fn new(source: Source, scenes: impl Into<PathBuf>) -> Self {
        PerformOptions {
            source,
            profiles: None,
            scenes: scenes.into(),
            seed: 0,
            feed_port: None,
            textures: None,
            record: None,
            feed_log: None,
            duration_s: None,
            speed: Speed::Factor(1.0),
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PerformSummary {
    pub ticks: u64,
    pub ingest: IngestStats,
    pub invalid: u64,
    pub engine: EngineStats,
    pub texture_cycles: u64,
    /// Wall time spent in each tick: engine, serialization and fan-out.
    pub tick_compute_us: Vec<f64>,
    pub recordings: Vec<PathBuf>,
    pub feed_addr: Option<SocketAddr>,
}

/// Reads `<dir>/<placement>.json` for every placement.
pub fn load_profiles(dir: &Path) -> Result<Vec<CalibrationProfile>, CliError> {
    Placement::ALL
        .iter()
        .map(|p| {
            let path = dir.join(format!("{p}.json"));
            if !path.is_file() {
                return Err(CliError::Config(format!("missing profile {}", path.display())));
            }
            let profile = load_profile(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if profile.placement != *p {
                return Err(CliError::Config(format!("{}: profile is for {}", path.display(), profile.placement)));
            }
            Ok(profile)
        })
        .collect()
}

enum Input {
    Virtual { frames: Box<dyn Iterator<Item = SensorFrame>>, peek: Option<SensorFrame>, flushed: bool, last_us: u64 },
    Live { source: LiveSource, offsets: [Option<i64>; 4] },
}

struct Recorder {
    base: Option<PathBuf>,
    takes: u32,
    header: SessionHeader,
    writer: Option<(PathBuf, SessionWriter<BufWriter<File>>)>,
    finished: Vec<PathBuf>,
}

impl Recorder {
    fn start(&mut self) -> Result<PathBuf, Reply> {
        let Some(base) = &self.base else {
            return Err(Reply::error("record_unavailable", "perform was started without --record"));
        };
        if self.writer.is_some() {
            return Err(Reply::error("already_recording", "a recording is in progress"));
        }
        let path = take_path(base, self.takes);
        self.takes += 1;
        let mut header = self.header.clone();
        header.session_id = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        header.start_unix_us = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_micros() as u64);
        let writer = SessionWriter::create(&path, &header).map_err(|e| Reply::error("record_failed", e.to_string()))?;
        log::info!("recording to {}", path.display());
        self.writer = Some((path.clone(), writer));
        Ok(path)
    }

    fn stop(&mut self) -> Result<PathBuf, Reply> {
        let (path, writer) = self.writer.take().ok_or_else(|| Reply::error("not_recording", "no recording in progress"))?;
        writer.finish().map_err(|e| Reply::error("record_failed", e.to_string()))?;
        log::info!("recording saved to {}", path.display());
        self.finished.push(path.clone());
        Ok(path)
    }

    fn write(&mut self, frames: &[SensorFrame]) -> Result<(), CliError> {
        if let Some((path, w)) = &mut self.writer {
            for f in frames {
                w.write_frame(f).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(())
    }
}

/// `take.jsonl`, then `take-2.jsonl`, `take-3.jsonl`, ...
fn take_path(base: &Path, take: u32) -> PathBuf {
    if take == 0 {
        return base.to_path_buf();
    }
    let name = base.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let (stem, ext) = name.split_once('.').map_or((name.as_str(), None), |(s, e)| (s, Some(e)));
    let file = match ext {
        Some(e) => format!("{stem}-{}.{e}", take + 1),
        None => format!("{stem}-{}", take + 1),
    };
    base.with_file_name(file)
}

/// Runs until the source ends, `duration_s` elapses, or `stop` is set.
pub fn perform(opts: &PerformOptions, stop: Arc<AtomicBool>) -> Result<PerformSummary, CliError> {
    let profiles = match &opts.profiles {
        Some(dir) => load_profiles(dir)?,
        None => Vec::new(),
    };
    let scenes = load_scenes(&opts.scenes).map_err(|e| CliError::Config(format!("{}: {e}", opts.scenes.display())))?;
    let sequencer = Sequencer::new(scenes).map_err(|e| CliError::Config(e.to_string()))?;
    let placements = PlacementMap::default();

    let mut input = match &opts.source {
        Source::Sim => {
            let limit = opts.duration_s.map(|d| (d * 1e6) as u64);
            Input::Virtual { frames: Box::new(sim_stream(opts.seed, 100.0, limit)), peek: None, flushed: false, last_us: 0 }
        }
        Source::Replay(path) => {
            let loaded = load_session(path, ReadMode::Lenient).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            for s in &loaded.skipped {
                log::warn!("{}: skipped line {}: {}", path.display(), s.line, s.reason);
            }
            let mut frames = loaded.session.frames;
            frames.sort_by_key(|f| (f.t_us, f.device_id));
            Input::Virtual { frames: Box::new(frames.into_iter()), peek: None, flushed: false, last_us: 0 }
        }
        Source::Udp(port) => Input::Live {
            source: spawn_udp(*port, stop.clone()).map_err(|e| CliError::Io(format!("udp port {port}: {e}")))?,
            offsets: [None; 4],
        },
        Source::Tcp(port) => Input::Live {
            source: spawn_tcp(*port, stop.clone()).map_err(|e| CliError::Io(format!("tcp port {port}: {e}")))?,
            offsets: [None; 4],
        },
    };
    if let Input::Virtual { frames, peek, .. } = &mut input {
        *peek = frames.next();
    }
    if let Input::Live { source, .. } = &input {
        log::info!("listening for frames on {}", source.local_addr);
    }

    let engine = Engine::new(&placements, &profiles, sequencer, opts.seed, opts.engine)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut pipeline = Pipeline::new(engine, DEFAULT_REORDER_WINDOW_US);

    let broadcaster = Broadcaster::default();
    let (control_tx, mut control_rx) = mpsc::channel::<ControlRequest>(64);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(format!("starting runtime: {e}")))?;
    let service: Option<RunningService> = match opts.feed_port {
        Some(port) => {
            let state = ServiceState { broadcaster: broadcaster.clone(), control: control_tx, texture_root: opts.textures.clone() };
            let addr = SocketAddr::from((Ipv4Addr::UNSPECIFIED, port));
            Some(runtime.block_on(serve(addr, state)).map_err(|e| CliError::Io(format!("feed port {port}: {e}")))?)
        }
        None => {
            drop(control_tx);
            None
        }
    };

    let mut feed_log = match &opts.feed_log {
        Some(path) => Some(BufWriter::new(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?)),
        None => None,
    };
    let mut header = SessionHeader::new("", 0);
    header.placements = placements;
    header.profiles = profiles;
    let mut recorder = Recorder { base: opts.record.clone(), takes: 0, header, writer: None, finished: Vec::new() };
    if opts.record.is_some() {
        recorder.start().map_err(|r| CliError::Io(format!("{r:?}")))?;
    }

    let mut summary = PerformSummary { feed_addr: service.as_ref().map(|s| s.local_addr), ..Default::default() };
    let result = run_loop(opts, &stop, &mut input, &mut pipeline, &mut control_rx, &broadcaster, &mut feed_log, &mut recorder, &mut summary);

    if recorder.writer.is_some() {
        if let Err(r) = recorder.stop() {
            log::error!("finishing recording: {r:?}");
        }
    }
    if let Some(log) = &mut feed_log {
        log.flush().map_err(|e| CliError::Io(format!("feed log: {e}")))?;
    }
    if let Some(svc) = service {
        if let Err(e) = runtime.block_on(svc.shutdown()) {
            log::warn!("feed server shutdown: {e}");
        }
    }
    result?;
    summary.ingest = *pipeline.ingest_stats();
    summary.invalid = pipeline.invalid();
    summary.engine = *pipeline.engine().stats();
    summary.recordings = recorder.finished;
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
fn run_loop(
    opts: &PerformOptions,
    stop: &AtomicBool,
    input: &mut Input,
    pipeline: &mut Pipeline,
    control: &mut mpsc::Receiver<ControlRequest>,
    broadcaster: &Broadcaster,
    feed_log: &mut Option<BufWriter<File>>,
    recorder: &mut Recorder,
    summary: &mut PerformSummary,
) -> Result<(), CliError> {
    let hz = opts.engine.tick_hz;
    let speed = match input {
        Input::Live { .. } => Speed::Factor(1.0),
        Input::Virtual { .. } => opts.speed,
    };
    let t0 = match input {
        Input::Virtual { peek: Some(f), .. } => f.t_us,
        _ => 0,
    };
    let mut clock = SystemClock::start();
    let started = Instant::now();
    let mut released = Vec::new();

    for k in 0u64.. {
        if stop.load(Ordering::Relaxed) {
            log::info!("stop requested");
            break;
        }
        let t = tick_time_us(t0, k, hz);
        if opts.duration_s.is_some_and(|d| (t - t0) as f64 > d * 1e6) {
            break;
        }
        if let Speed::Factor(f) = speed {
            clock.sleep_until(((t - t0) as f64 / f) as u64);
        }

        let mut done = false;
        match input {
            Input::Virtual { frames, peek, flushed, last_us } => {
                while let Some(f) = peek.take_if(|f| f.t_us <= t) {
                    *last_us = f.t_us;
                    pipeline.offer(f);
                    *peek = frames.next();
                }
                if peek.is_none() {
                    if !*flushed {
                        pipeline.flush(&mut released);
                        *flushed = true;
                    }
                    done = t >= *last_us;
                }
            }
            Input::Live { source, offsets } => {
                let now = started.elapsed().as_micros() as i64;
                while let Ok(mut f) = source.frames.try_recv() {
                    let dev = f.device_id as usize;
                    let off = *offsets[dev].get_or_insert(f.t_us as i64 - now);
                    f.t_us = (f.t_us as i64 - off).max(0) as u64;
                    pipeline.offer(f);
                }
            }
        }

        while let Ok(req) = control.try_recv() {
            let reply = match &req.command {
                Command::Record { action } => {
                    let r = match action {
                        RecordAction::Start => recorder.start(),
                        RecordAction::Stop => recorder.stop(),
                    };
                    r.map(|p| Reply::ack("record", Some(p.display().to_string().into()))).unwrap_or_else(|e| e)
                }
                other => apply_engine_command(pipeline.engine_mut(), other).expect("engine command"),
            };
            let _ = req.reply.send(reply);
        }

        let c0 = Instant::now();
        let state = pipeline.tick(t, &mut released).map_err(|e| CliError::Config(e.to_string()))?;
        for m in feed_messages(&state) {
            let json = m.to_json();
            if let Some(log) = feed_log {
                writeln!(log, "{json}").map_err(|e| CliError::Io(format!("feed log: {e}")))?;
            }
            broadcaster.publish(json);
        }
        summary.tick_compute_us.push(c0.elapsed().as_secs_f64() * 1e6);
        summary.ticks += 1;
        summary.texture_cycles += state.events.iter().filter(|e| matches!(e, EngineEvent::TextureCycle { .. })).count() as u64;
        recorder.write(&released)?;
        released.clear();
        if done {
            break;
        }
    }
    Ok(())
}

/// Creates the parent directory of an output path.
pub fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn take_paths() {
        let base = Path::new("/tmp/show.mbsession.jsonl");
        assert_eq!(take_path(base, 0), base);
        assert_eq!(take_path(base, 1), Path::new("/tmp/show-2.mbsession.jsonl"));
        assert_eq!(take_path(Path::new("x"), 2), Path::new("x-3"));
    }
}
