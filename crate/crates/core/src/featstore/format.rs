//! `.saltfeat` binary layout, little-endian throughout:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 8    | magic `SALTFEAT`               |
//! | 8      | 4    | version (u32, = 1)             |
//! | 12     | 4    | dims (u32)                     |
//! | 16     | 8    | frames (u64)                   |
//! | 24     | 4·T·d| f32 payload, frame-major       |

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const FEATURE_MAGIC: &[u8; 8] = b"SALTFEAT";
pub const FEATURE_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;
pub const FEATURE_EXTENSION: &str = "saltfeat";

/// Serialize a matrix to its exact on-disk byte image.
///
/// Values are narrowed to `f32`; a value that overflows `f32` is rejected.
pub fn encode_features<T: Scalar>(m: &Matrix<T>) -> Result<Vec<u8>> {
    let dims = u32::try_from(m.dims())
        .map_err(|_| Error::Shape(format!("{} dims do not fit the header", m.dims())))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * m.as_slice().len());
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    out.extend_from_slice(&dims.to_le_bytes());
    out.extend_from_slice(&(m.frames() as u64).to_le_bytes());
    for (i, &v) in m.as_slice().iter().enumerate() {
        let v = v.to_f32().filter(|x| x.is_finite()).ok_or(Error::NonFinite {
            frame: i / m.dims(),
            dim: i % m.dims(),
        })?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parse a byte image produced by [`encode_features`]. `origin` only labels errors.
pub fn decode_features<T: Scalar>(bytes: &[u8], origin: &Path) -> Result<Matrix<T>> {
    if bytes.len() < FEATURE_MAGIC.len() || &bytes[..8] != FEATURE_MAGIC {
        return Err(Error::NotAFeatureFile {
            path: origin.to_path_buf(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::CorruptLength {
            path: origin.to_path_buf(),
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FEATURE_VERSION {
        return Err(Error::VersionMismatch {
            path: origin.to_path_buf(),
            found: version,
            supported: FEATURE_VERSION,
        });
    }
    let dims = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let frames = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if dims == 0 {
        return Err(Error::Shape(format!("{}: header declares 0 dims", origin.display())));
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = frames
        .checked_mul(dims as u64)
        .and_then(|n| n.checked_mul(4))
        .unwrap_or(u64::MAX);
    if payload.len() as u64 != expected {
        return Err(Error::CorruptLength {
            path: origin.to_path_buf(),
            expected,
            found: payload.len() as u64,
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| T::of(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
        .collect();
    Matrix::new(frames as usize, dims, data)
}

/// Write `m` to `destination`. Nothing is created if `m` cannot be encoded.
pub fn write_features<T: Scalar>(m: &Matrix<T>, destination: impl AsRef<Path>) -> Result<()> {
    let destination = destination.as_ref();
    let bytes = encode_features(m)?;
    let file = File::create(destination).map_err(|e| Error::io(destination, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(destination, e))
}

pub fn read_features<T: Scalar>(source: impl AsRef<Path>) -> Result<Matrix<T>> {
    let source = source.as_ref();
    let mut bytes = Vec::new();
    File::open(source)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(source, e))?;
    decode_features(&bytes, source)
}
