//! CSV and JSON exports for plotting and for the calibration step.
//!
//! JSON documents carry `"schema"` (the result kind) and `"version"` and
//! round-trip losslessly through [`read_export`]. CSV files are one row per
//! point or bin with a header row, and read back with [`read_csv`]:
//!
//! | kind      | columns |
//! |-----------|---------|
//! | `energy`  | `t_us,energy` |
//! | `path`    | `t_us,x,y,z` |
//! | `heatmap` | `lat_index,lon_index,lat_lo,lat_hi,lon_lo,lon_hi,count,solid_angle,density` |
//! | `bounds`  | `placement,p_lo,p_hi,pitch_lo,pitch_hi,energy_lo,energy_hi,samples` |

use std::io::{Read, Write};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, PathPoint, RangeBounds, SphereHistogram, TracePoint};
use crate::motion::Placement;

pub const EXPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(format!("unknown export format `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    Energy,
    Path,
    Heatmap,
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schema", rename_all = "snake_case")]
pub enum AnalysisOutput {
    Energy { placement: Placement, window_s: f64, points: Vec<TracePoint> },
    Path { placement: Placement, points: Vec<PathPoint> },
    Heatmap { placement: Placement, histogram: SphereHistogram },
    Bounds(RangeBounds),
}

impl AnalysisOutput {
    pub fn kind(&self) -> ExportKind {
        match self {
            AnalysisOutput::Energy { .. } => ExportKind::Energy,
            AnalysisOutput::Path { .. } => ExportKind::Path,
            AnalysisOutput::Heatmap { .. } => ExportKind::Heatmap,
            AnalysisOutput::Bounds(_) => ExportKind::Bounds,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    version: u32,
    #[serde(flatten)]
    body: T,
}

/// One heat-map bin as a CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub lat_index: usize,
    pub lon_index: usize,
    pub lat_lo: f64,
    pub lat_hi: f64,
    pub lon_lo: f64,
    pub lon_hi: f64,
    pub count: u64,
    pub solid_angle: f64,
    pub density: f64,
}

impl HeatmapRow {
    pub fn rows(h: &SphereHistogram) -> Vec<HeatmapRow> {
        let lat = h.resolution.lat_edges();
        let lon = h.resolution.lon_edges();
        let n_lon = h.resolution.n_lon;
        (0..h.counts.len())
            .map(|k| {
                let (i, j) = (k / n_lon, k % n_lon);
                HeatmapRow {
                    lat_index: i,
                    lon_index: j,
                    lat_lo: lat[i],
                    lat_hi: lat[i + 1],
                    lon_lo: lon[j],
                    lon_hi: lon[j + 1],
                    count: h.counts[k],
                    solid_angle: h.solid_angle[k],
                    density: h.density[k],
                }
            })
            .collect()
    }
}

pub fn write_export<W: Write>(output: &AnalysisOutput, format: ExportFormat, sink: W) -> Result<(), AnalysisError> {
    match format {
        ExportFormat::Json => {
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &Versioned { version: EXPORT_VERSION, body: output })?;
            sink.write_all(b"\n")?;
            sink.flush()?;
            Ok(())
        }
        ExportFormat::Csv => match output {
            AnalysisOutput::Energy { points, .. } => write_csv(sink, &["t_us", "energy"], points),
            AnalysisOutput::Path { points, .. } => write_csv(sink, &["t_us", "x", "y", "z"], points),
            AnalysisOutput::Heatmap { histogram, .. } => write_csv(
                sink,
                &["lat_index", "lon_index", "lat_lo", "lat_hi", "lon_lo", "lon_hi", "count", "solid_angle", "density"],
                &HeatmapRow::rows(histogram),
            ),
            AnalysisOutput::Bounds(b) => write_csv(
                sink,
                &["placement", "p_lo", "p_hi", "pitch_lo", "pitch_hi", "energy_lo", "energy_hi", "samples"],
                std::slice::from_ref(b),
            ),
        },
    }
}

/// Header row is written explicitly so an empty result still names its columns.
fn write_csv<W: Write, T: Serialize>(sink: W, header: &[&str], rows: &[T]) -> Result<(), AnalysisError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_export<R: Read>(source: R) -> Result<AnalysisOutput, AnalysisError> {
    let doc: serde_json::Value = serde_json::from_reader(source)?;
    match doc.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(EXPORT_VERSION) => {}
        Some(v) => return Err(AnalysisError::Schema(format!("unsupported export version {v}"))),
        None => return Err(AnalysisError::Schema("missing version".into())),
    }
    let v: Versioned<AnalysisOutput> = serde_json::from_value(doc)?;
    Ok(v.body)
}

pub fn read_csv<T: DeserializeOwned, R: Read>(source: R) -> Result<Vec<T>, AnalysisError> {
    csv::Reader::from_reader(source).deserialize().map(|r| r.map_err(AnalysisError::from)).collect()
}
