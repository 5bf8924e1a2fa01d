//! The batch verbs: analyze, calibrate and simulate.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use motionbrush::analysis::{
    energy_trace, orientation_path, range_bounds, sphere_heatmap, write_export, AnalysisError, AnalysisOutput,
    BoundsOptions, ExportFormat, ExportKind, GridResolution,
};
use motionbrush::calibration::{build_profile, load_profile, save_profile, CalibrationConfig, CalibrationError};
use motionbrush::ingest::{sim_calibration_capture, sim_performance, CalibrationCapture};
use motionbrush::motion::{CalibrationProfile, Placement, DEFAULT_WINDOW_S};
use motionbrush::recording::{load_session, save_session, ReadMode, SessionHeader, SessionRecording};
use nalgebra::UnitQuaternion;

use crate::error::CliError;
use crate::perform::ensure_parent;

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub kind: ExportKind,
    pub input: PathBuf,
    pub placement: String,
    pub window_s: Option<f64>,
    pub out: PathBuf,
    pub format: ExportFormat,
    /// Reference orientation and default window for path, heatmap and
    /// bounds.
    pub profile: Option<PathBuf>,
    pub grid: GridResolution,
}

#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub input: PathBuf,
    pub placement: String,
    pub out: PathBuf,
    pub window_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulateKind {
    /// Four devices moving through random gesture segments.
    Performance,
    /// A left-wrist reference pose followed by a pitch sweep.
    Calibration,
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub kind: SimulateKind,
    pub out: PathBuf,
    pub duration_s: f64,
    pub seed: u64,
}

/// Device orientation held during the reference pose of a simulated
/// calibration capture.
pub fn simulated_reference_pose() -> UnitQuaternion<f64> {
    UnitQuaternion::from_euler_angles(0.1, 0.3, -0.2)
}

/// `18x36` → 18 latitude bands × 36 longitude sectors.
pub fn parse_grid(s: &str) -> Result<GridResolution, String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("grid `{s}` is not <lat>x<lon>"))?;
    let n = |v: &str| v.parse::<usize>().map_err(|_| format!("grid `{s}` is not <lat>x<lon>"));
    GridResolution::new(n(a)?, n(b)?).map_err(|e| e.to_string())
}

fn placement(s: &str) -> Result<Placement, CliError> {
    s.parse().map_err(|e| CliError::Config(format!("{e}; expected one of {}", Placement::ALL.map(|p| p.as_str()).join(", "))))
}

fn session(path: &Path) -> Result<SessionRecording, CliError> {
    let loaded = load_session(path, ReadMode::Lenient).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for s in &loaded.skipped {
        log::warn!("{}: skipped line {}: {}", path.display(), s.line, s.reason);
    }
    Ok(loaded.session)
}

fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::Io(_) => CliError::Io(e.to_string()),
        AnalysisError::InsufficientData { .. } | AnalysisError::Empty => CliError::DataQuality(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

pub fn analyze(opts: &AnalyzeOptions) -> Result<AnalysisOutput, CliError> {
    let placement = placement(&opts.placement)?;
    let profile: Option<CalibrationProfile> = match &opts.profile {
        Some(p) => Some(load_profile(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let session = session(&opts.input)?;
    let window_s = opts.window_s.or(profile.as_ref().map(|p| p.window_s)).unwrap_or(DEFAULT_WINDOW_S);
    let q_ref = profile.as_ref().map_or_else(UnitQuaternion::identity, |p| p.q_ref);
    let output = match opts.kind {
        ExportKind::Energy => {
            AnalysisOutput::Energy { placement, window_s, points: energy_trace(&session, placement, window_s).map_err(analysis_error)? }
        }
        ExportKind::Path => AnalysisOutput::Path { placement, points: orientation_path(&session, placement, &q_ref).map_err(analysis_error)? },
        ExportKind::Heatmap => {
            let path = orientation_path(&session, placement, &q_ref).map_err(analysis_error)?;
            let dirs: Vec<_> = path.iter().map(|p| p.direction()).collect();
            AnalysisOutput::Heatmap { placement, histogram: sphere_heatmap(&dirs, opts.grid).map_err(analysis_error)? }
        }
        ExportKind::Bounds => AnalysisOutput::Bounds(
            range_bounds(&session, placement, &BoundsOptions { q_ref, window_s, ..BoundsOptions::default() })
                .map_err(analysis_error)?,
        ),
    };
    ensure_parent(&opts.out)?;
    let file = File::create(&opts.out).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    write_export(&output, opts.format, BufWriter::new(file)).map_err(analysis_error)?;
    Ok(output)
}

pub fn calibrate(opts: &CalibrateOptions) -> Result<CalibrationProfile, CliError> {
    let placement = placement(&opts.placement)?;
    let session = session(&opts.input)?;
    let config = CalibrationConfig { window_s: opts.window_s.unwrap_or(DEFAULT_WINDOW_S), ..CalibrationConfig::default() };
    let profile = build_profile(&session, placement, &config).map_err(|e| match e {
        CalibrationError::UnknownPlacement(_) => CliError::Config(e.to_string()),
        e if e.is_data_quality() => CliError::DataQuality(e.to_string()),
        e => CliError::Config(e.to_string()),
    })?;
    ensure_parent(&opts.out)?;
    save_profile(&opts.out, &profile).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    Ok(profile)
}

/// Writes a simulated session, for rehearsing without hardware.
pub fn simulate(opts: &SimulateOptions) -> Result<SessionRecording, CliError> {
    let frames = match opts.kind {
        SimulateKind::Performance => sim_performance(opts.seed, opts.duration_s, 100.0),
        SimulateKind::Calibration => {
            let mut c = CalibrationCapture::new(simulated_reference_pose(), -0.5, 0.8, opts.seed);
            c.sweep_s = (opts.duration_s - c.still_s).max(1.0);
            sim_calibration_capture(&c)
        }
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let id = opts.out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let session = SessionRecording { header: SessionHeader::new(id, 0), frames };
    ensure_parent(&opts.out)?;
    save_session(&opts.out, &session).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    Ok(session)
}
