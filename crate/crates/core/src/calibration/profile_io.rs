use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::motion::{CalibrationProfile, PROFILE_VERSION};

#[derive(Debug, Error)]
pub enum ProfileIoError {
    #[error("profile i/o: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported profile version {0}")]
    UnsupportedVersion(u64),
    #[error("profile schema: {0}")]
    Schema(String),
}

pub fn write_profile<W: Write>(profile: &CalibrationProfile, mut sink: W) -> Result<(), ProfileIoError> {
    serde_json::to_writer(&mut sink, profile).map_err(|e| ProfileIoError::Schema(e.to_string()))?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

pub fn read_profile<R: Read>(source: R) -> Result<CalibrationProfile, ProfileIoError> {
    let doc: serde_json::Value = serde_json::from_reader(source).map_err(|e| ProfileIoError::Schema(e.to_string()))?;
    match doc.get("version") {
        None => return Err(ProfileIoError::Schema("missing field `version`".into())),
        Some(v) => match v.as_u64() {
            Some(v) if v == u64::from(PROFILE_VERSION) => {}
            Some(v) => return Err(ProfileIoError::UnsupportedVersion(v)),
            None => return Err(ProfileIoError::Schema(format!("invalid version {v}"))),
        },
    }
    serde_json::from_value(doc).map_err(|e| ProfileIoError::Schema(e.to_string()))
}

pub fn save_profile(path: impl AsRef<Path>, profile: &CalibrationProfile) -> Result<(), ProfileIoError> {
    write_profile(profile, BufWriter::new(File::create(path)?))
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<CalibrationProfile, ProfileIoError> {
    read_profile(BufReader::new(File::open(path)?))
}
