use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use motionbrush::analysis::{ExportFormat, ExportKind, GridResolution};
use motionbrush::instrument::EngineConfig;
use motionbrush::recording::Speed;
use motionbrush_cli::perform::{perform, PerformOptions};
use motionbrush_cli::source::Source;
use motionbrush_cli::{
    analyze, calibrate, parse_grid, simulate, AnalyzeOptions, CalibrateOptions, CliError, SimulateKind, SimulateOptions,
};

/// Painting with light: wearable motion sensors drive brushes on a
/// projected canvas.
#[derive(Parser)]
#[command(name = "motionbrush", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the instrument: ingest, engine, feed server.
    Perform {
        /// sim, udp:<port>, tcp:<port> or replay:<session file>
        #[arg(long)]
        source: Source,
        /// Directory of <placement>.json calibration profiles.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = motionbrush_service::DEFAULT_FEED_PORT)]
        feed_port: u16,
        /// Run without the feed server.
        #[arg(long)]
        no_feed: bool,
        /// Directory served under /textures.
        #[arg(long)]
        textures: Option<PathBuf>,
        /// Record the incoming frames to this session file.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Write every feed message to this file, one per line.
        #[arg(long)]
        feed_log: Option<PathBuf>,
        /// Stop after this many seconds of stream time.
        #[arg(long)]
        duration: Option<f64>,
        /// Pacing of sim and replay sources: a factor, or `inf`.
        #[arg(long, default_value = "1")]
        speed: Speed,
        #[arg(long, default_value_t = 60.0)]
        tick_hz: f64,
    },
    /// Offline analysis of a recorded session.
    Analyze {
        kind: Kind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        placement: String,
        /// Energy window in seconds.
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Calibration profile supplying the reference orientation.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Heat-map grid, <lat>x<lon>.
        #[arg(long, value_parser = parse_grid, default_value = "18x36")]
        grid: GridResolution,
    },
    /// Build a calibration profile from a reference-pose capture.
    Calibrate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        placement: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        window: Option<f64>,
    },
    /// Write a simulated session.
    Simulate {
        #[arg(long, value_enum, default_value_t = SimKind::Performance)]
        kind: SimKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Energy,
    Path,
    Heatmap,
    Bounds,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimKind {
    Performance,
    Calibration,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MOTIONBRUSH_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Perform { source, profiles, scenes, seed, feed_port, no_feed, textures, record, feed_log, duration, speed, tick_hz } => {
            let opts = PerformOptions {
                source,
                profiles,
                scenes,
                seed,
                feed_port: (!no_feed).then_some(feed_port),
                textures,
                record,
                feed_log,
                duration_s: duration,
                speed,
                engine: EngineConfig { tick_hz, ..EngineConfig::default() },
            };
            let stop = Arc::new(AtomicBool::new(false));
            let flag = stop.clone();
            std::thread::spawn(move || {
                let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().expect("signal runtime");
                if rt.block_on(tokio::signal::ctrl_c()).is_ok() {
                    flag.store(true, Ordering::Relaxed);
                }
            });
            let s = perform(&opts, stop)?;
            let c = &s.tick_compute_us;
            let mut sorted = c.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0);
            log::info!(
                "{} ticks, {} frames folded, {} dropped late, {} duplicates, {} invalid, {} texture cycles, median tick {:.1} µs",
                s.ticks,
                s.engine.folded.iter().sum::<u64>(),
                s.ingest.dropped_late.iter().sum::<u64>(),
                s.ingest.dropped_duplicate.iter().sum::<u64>(),
                s.invalid,
                s.texture_cycles,
                median
            );
            Ok(())
        }
        Cmd::Analyze { kind, input, placement, window, out, format, profile, grid } => {
            let kind = match kind {
                Kind::Energy => ExportKind::Energy,
                Kind::Path => ExportKind::Path,
                Kind::Heatmap => ExportKind::Heatmap,
                Kind::Bounds => ExportKind::Bounds,
            };
            let format = match format {
                Format::Csv => ExportFormat::Csv,
                Format::Json => ExportFormat::Json,
            };
            analyze(&AnalyzeOptions { kind, input, placement, window_s: window, out: out.clone(), format, profile, grid })?;
            log::info!("wrote {}", out.display());
            Ok(())
        }
        Cmd::Calibrate { input, placement, out, window } => {
            let p = calibrate(&CalibrateOptions { input, placement, out: out.clone(), window_s: window })?;
            log::info!(
                "wrote {}: pitch {:.3}..{:.3} rad, energy {:.3}..{:.3} m/s",
                out.display(),
                p.pitch_lo,
                p.pitch_hi,
                p.energy_lo,
                p.energy_hi
            );
            Ok(())
        }
        Cmd::Simulate { kind, out, duration, seed } => {
            let kind = match kind {
                SimKind::Performance => SimulateKind::Performance,
                SimKind::Calibration => SimulateKind::Calibration,
            };
            let s = simulate(&SimulateOptions { kind, out: out.clone(), duration_s: duration, seed })?;
            log::info!("wrote {} frames to {}", s.frames.len(), out.display());
            Ok(())
        }
    }
}
