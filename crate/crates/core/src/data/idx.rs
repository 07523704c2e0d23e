//! IDX files as used by MNIST: a big-endian u32 magic (`0x00000803` for
//! images, `0x00000801` for labels), one big-endian u32 per dimension, then
//! an unsigned-byte payload.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Decoded image file; `pixels` has one row per image, scaled to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Array2<f64>,
}

fn format_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Format { offset: offset as u64, reason: reason.into() }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| format_err(offset, "truncated header"))
}

fn check_payload(bytes: &[u8], header: usize, expected: usize) -> Result<()> {
    let have = bytes.len() - header;
    if have < expected {
        return Err(format_err(
            bytes.len(),
            format!("truncated payload: expected {expected} bytes, found {have}"),
        ));
    }
    if have > expected {
        return Err(format_err(
            header + expected,
            format!("{} trailing bytes after payload", have - expected),
        ));
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = read_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(format_err(0, format!("bad magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}")));
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let size = rows
        .checked_mul(cols)
        .filter(|&s| s > 0)
        .ok_or_else(|| format_err(8, format!("invalid image size {rows}×{cols}")))?;
    let total = count
        .checked_mul(size)
        .ok_or_else(|| format_err(4, "dimension product overflows"))?;
    check_payload(bytes, 16, total)?;
    let pixels = Array2::from_shape_fn((count, size), |(i, j)| {
        f64::from(bytes[16 + i * size + j]) / 255.0
    });
    Ok(IdxImages { rows, cols, pixels })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(format_err(0, format!("bad magic {magic:#010x}, expected {LABELS_MAGIC:#010x}")));
    }
    let count = read_u32(bytes, 4)? as usize;
    check_payload(bytes, 8, count)?;
    Ok(bytes[8..].to_vec())
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    parse_idx_images(&fs::read(path)?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&fs::read(path)?)
}

/// Encodes raw pixel bytes (`count × rows·cols`) as an IDX image file.
pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    let size = rows * cols;
    if size == 0 || !pixels.len().is_multiple_of(size) {
        return Err(Error::InvalidArgument(format!(
            "{} bytes do not split into {rows}×{cols} images",
            pixels.len()
        )));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IMAGES_MAGIC, (pixels.len() / size) as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn write_idx_images(path: impl AsRef<Path>, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    fs::write(path, encode_idx_images(rows, cols, pixels)?)?;
    Ok(())
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    fs::write(path, encode_idx_labels(labels))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_images() {
        let bytes = encode_idx_images(2, 2, &[0, 255, 51, 102, 1, 2, 3, 4]).unwrap();
        let img = parse_idx_images(&bytes).unwrap();
        assert_eq!((img.rows, img.cols), (2, 2));
        assert_eq!(img.pixels.dim(), (2, 4));
        assert_eq!(img.pixels[[0, 1]], 1.0);
        assert!((img.pixels[[0, 2]] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn decodes_labels() {
        let bytes = encode_idx_labels(&[3, 1, 4]);
        assert_eq!(&bytes[..4], &[0, 0, 8, 1]);
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![3, 1, 4]);
    }

    #[test]
    fn wrong_magic() {
        let bytes = encode_idx_labels(&[1]);
        assert!(matches!(parse_idx_images(&bytes), Err(Error::Format { offset: 0, .. })));
        let bytes = encode_idx_images(1, 1, &[1]).unwrap();
        assert!(matches!(parse_idx_labels(&bytes), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn truncated_payload_and_header() {
        let mut bytes = encode_idx_images(2, 2, &[0; 8]).unwrap();
        bytes.truncate(bytes.len() - 3);
        match parse_idx_images(&bytes) {
            Err(Error::Format { offset, reason }) => {
                assert_eq!(offset, 21);
                assert!(reason.contains("truncated"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_idx_labels(&[0, 0, 8]), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let mut bytes = encode_idx_labels(&[1, 2]);
        bytes.push(7);
        assert!(matches!(parse_idx_labels(&bytes), Err(Error::Format { offset: 10, .. })));
    }
}
