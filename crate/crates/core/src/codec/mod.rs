//! Binary configuration messages.
//!
//! The encoder and decoder are written separately against the format
//! description in `docs/binary-format.md` and share no code.

mod decode;
mod encode;

use thiserror::Error;

use crate::dataset_io::write_canonical;

pub use decode::decode;
pub use encode::encode;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("`{constant}`: value {value} does not fit in 32 bits")]
    Overflow { constant: String, value: String },
    #[error("`{section}`: {what} exceeds the format's limit")]
    TooLarge { section: String, what: &'static str },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u16),
    #[error("declared length {declared} but message has {actual} bytes")]
    Length { declared: u64, actual: u64 },
    #[error("CRC mismatch: declared {declared:08x}, computed {actual:08x}")]
    Crc { declared: u32, actual: u32 },
    #[error("truncated {0}")]
    Truncated(String),
    #[error("{section}: {reason}")]
    Malformed { section: String, reason: String },
}

/// Outcome of re-encoding a decoded message.
#[derive(Debug, PartialEq, Eq)]
pub enum RoundTrip {
    Pass,
    /// Re-encoding differs, first at this byte offset.
    Mismatch { offset: usize },
    Decode(DecodeError),
    Encode(EncodeError),
}

impl RoundTrip {
    pub fn passed(&self) -> bool {
        *self == RoundTrip::Pass
    }
}

/// Passes iff the message decodes and re-encodes to identical bytes.
pub fn roundtrip_check(bytes: &[u8]) -> RoundTrip {
    let ds = match decode(bytes) {
        Ok(ds) => ds,
        Err(e) => return RoundTrip::Decode(e),
    };
    match encode(&ds) {
        Ok(again) if again == bytes => RoundTrip::Pass,
        Ok(again) => RoundTrip::Mismatch {
            offset: again.iter().zip(bytes).position(|(a, b)| a != b).unwrap_or(again.len().min(bytes.len())),
        },
        Err(e) => RoundTrip::Encode(e),
    }
}

/// Decodes a message into the model-independent XML layout.
pub fn decode_to_xml(bytes: &[u8]) -> Result<String, DecodeError> {
    decode(bytes).map(|ds| write_canonical(&ds))
}

#[cfg(test)]
mod tests;
