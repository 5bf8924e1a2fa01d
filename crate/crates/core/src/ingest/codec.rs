//! 48-byte little-endian wire frame.
//!
//! | bytes  | field                         |
//! |--------|-------------------------------|
//! | 0–1    | magic `0xA1 0x53`             |
//! | 2      | version `0x01`                |
//! | 3      | device id (u8)                |
//! | 4–7    | seq (u32)                     |
//! | 8–15   | t_us (u64)                    |
//! | 16–31  | quaternion w, x, y, z (f32×4) |
//! | 32–43  | acceleration x, y, z (f32×3)  |
//! | 44–47  | CRC-32 (IEEE) over bytes 0–43 |

use thiserror::Error;

use crate::motion::{FrameError, SensorFrame};

pub const FRAME_LEN: usize = 48;
pub const MAGIC: [u8; 2] = [0xA1, 0x53];
pub const VERSION: u8 = 0x01;
const CRC_OFFSET: usize = 44;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot encode frame: {0}")]
pub struct EncodeError(#[from] pub FrameError);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("bad magic {0:#04x} {1:#04x}")]
    BadMagic(u8, u8),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("crc mismatch: frame says {stored:#010x}, computed {computed:#010x}")]
    BadCrc { stored: u32, computed: u32 },
    #[error("device id {0} out of range")]
    DeviceOutOfRange(u8),
    #[error("non-finite float in payload")]
    NonFinite,
    #[error("quaternion norm {0} too far from 1")]
    NonUnitQuaternion(f64),
    #[error("acceleration component {0} out of range")]
    AccelerationOutOfRange(f32),
}

impl DecodeError {
    /// Stable short code for counters and logs.
    pub fn code(&self) -> &'static str {
        match self {
            DecodeError::BadMagic(..) => "bad_magic",
            DecodeError::BadVersion(_) => "bad_version",
            DecodeError::BadCrc { .. } => "bad_crc",
            DecodeError::DeviceOutOfRange(_) => "bad_device",
            DecodeError::NonFinite => "non_finite",
            DecodeError::NonUnitQuaternion(_) => "non_unit_quat",
            DecodeError::AccelerationOutOfRange(_) => "acc_range",
        }
    }
}

impl From<FrameError> for DecodeError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::DeviceOutOfRange(d) => DecodeError::DeviceOutOfRange(d),
            FrameError::NonFinite => DecodeError::NonFinite,
            FrameError::NonUnitQuaternion(n) => DecodeError::NonUnitQuaternion(n),
            FrameError::AccelerationOutOfRange(a) => DecodeError::AccelerationOutOfRange(a),
        }
    }
}

/// Outcome of decoding from the front of a byte slice.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Frame(SensorFrame),
    /// Fewer than [`FRAME_LEN`] bytes were available.
    Incomplete { needed: usize },
}

pub fn encode_frame(frame: &SensorFrame) -> Result<[u8; FRAME_LEN], EncodeError> {
    frame.validate()?;
    let mut buf = [0u8; FRAME_LEN];
    buf[0..2].copy_from_slice(&MAGIC);
    buf[2] = VERSION;
    buf[3] = frame.device_id;
    buf[4..8].copy_from_slice(&frame.seq.to_le_bytes());
    buf[8..16].copy_from_slice(&frame.t_us.to_le_bytes());
    for (i, q) in frame.quat.iter().enumerate() {
        buf[16 + 4 * i..20 + 4 * i].copy_from_slice(&q.to_le_bytes());
    }
    for (i, a) in frame.acc.iter().enumerate() {
        buf[32 + 4 * i..36 + 4 * i].copy_from_slice(&a.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf[..CRC_OFFSET]);
    buf[CRC_OFFSET..].copy_from_slice(&crc.to_le_bytes());
    Ok(buf)
}

/// Decodes one frame from the first [`FRAME_LEN`] bytes of `bytes`.
pub fn decode_frame(bytes: &[u8]) -> Result<Decoded, DecodeError> {
    if bytes.len() < FRAME_LEN {
        return Ok(Decoded::Incomplete { needed: FRAME_LEN - bytes.len() });
    }
    let b = &bytes[..FRAME_LEN];
    if b[0..2] != MAGIC {
        return Err(DecodeError::BadMagic(b[0], b[1]));
    }
    if b[2] != VERSION {
        return Err(DecodeError::BadVersion(b[2]));
    }
    let stored = u32::from_le_bytes(b[CRC_OFFSET..].try_into().unwrap());
    let computed = crc32fast::hash(&b[..CRC_OFFSET]);
    if stored != computed {
        return Err(DecodeError::BadCrc { stored, computed });
    }
    let f32_at = |off: usize| f32::from_le_bytes(b[off..off + 4].try_into().unwrap());
    let frame = SensorFrame {
        device_id: b[3],
        seq: u32::from_le_bytes(b[4..8].try_into().unwrap()),
        t_us: u64::from_le_bytes(b[8..16].try_into().unwrap()),
        quat: [f32_at(16), f32_at(20), f32_at(24), f32_at(28)],
        acc: [f32_at(32), f32_at(36), f32_at(40)],
    };
    frame.validate()?;
    Ok(Decoded::Frame(frame))
}

/// Incremental decoder for a contiguous byte stream (TCP).
///
/// Bytes that do not start a CRC-valid frame are skipped one at a time until
/// the next magic sequence lines up with a valid checksum.
#[derive(Debug, Default)]
pub struct StreamDecoder {
    buf: Vec<u8>,
    skipped_bytes: u64,
}

impl StreamDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, data: &[u8]) {
        self.buf.extend_from_slice(data);
    }

    /// Bytes discarded while resynchronizing.
    pub fn skipped_bytes(&self) -> u64 {
        self.skipped_bytes
    }

    /// Next frame, or `None` when more bytes are needed. A CRC-valid frame
    /// with invalid contents is consumed and returned as an error.
    pub fn next_frame(&mut self) -> Option<Result<SensorFrame, DecodeError>> {
        loop {
            let start = match self.buf.windows(2).position(|w| w == MAGIC) {
                Some(p) => p,
                None => {
                    // Keep a trailing first magic byte; it may pair with the next push.
                    let keep = usize::from(self.buf.last() == Some(&MAGIC[0]));
                    self.discard(self.buf.len() - keep);
                    return None;
                }
            };
            self.discard(start);
            match decode_frame(&self.buf) {
                Ok(Decoded::Incomplete { .. }) => return None,
                Ok(Decoded::Frame(f)) => {
                    self.buf.drain(..FRAME_LEN);
                    return Some(Ok(f));
                }
                Err(DecodeError::BadMagic(..) | DecodeError::BadVersion(_) | DecodeError::BadCrc { .. }) => {
                    self.discard(1);
                }
                Err(e) => {
                    self.buf.drain(..FRAME_LEN);
                    return Some(Err(e));
                }
            }
        }
    }

    fn discard(&mut self, n: usize) {
        self.buf.drain(..n);
        self.skipped_bytes += n as u64;
    }
}
