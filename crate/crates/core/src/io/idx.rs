//! IDX image and label files (the MNIST distribution format), optionally
//! gzip-compressed.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use ndarray::Array2;

use crate::data::DataMatrix;
use crate::error::{Result, SongError};

const UBYTE: u8 = 0x08;

struct IdxArray {
    dims: Vec<usize>,
    payload: Vec<u8>,
}

fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| SongError::Format(format!("{}: bad gzip stream: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Parses an unsigned-byte IDX array with the expected number of dimensions.
fn parse_idx(bytes: &[u8], ndims: usize) -> Result<IdxArray> {
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 {
        return Err(SongError::Format("bad IDX magic".into()));
    }
    if bytes[2] != UBYTE {
        return Err(SongError::Format(format!("unsupported IDX element type 0x{:02x}", bytes[2])));
    }
    if bytes[3] as usize != ndims {
        return Err(SongError::Format(format!("expected {ndims} IDX dimensions, found {}", bytes[3])));
    }
    let header = 4 + 4 * ndims;
    if bytes.len() < header {
        return Err(SongError::Format("truncated IDX header".into()));
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let expected = dims.iter().product::<usize>();
    let payload = &bytes[header..];
    if payload.len() < expected {
        return Err(SongError::Format(format!(
            "truncated IDX payload: {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(SongError::Format(format!(
            "{} trailing bytes after IDX payload",
            payload.len() - expected
        )));
    }
    Ok(IdxArray {
        dims,
        payload: payload.to_vec(),
    })
}

/// Loads `N × rows × cols` images as an `N × (rows·cols)` matrix scaled to
/// `[0, 1]`, with labels attached when a label file is given.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: Option<&Path>) -> Result<DataMatrix> {
    let images = parse_idx(&read_maybe_gzip(images_path.as_ref())?, 3)?;
    let n = images.dims[0];
    let width = images.dims[1] * images.dims[2];
    let rows = Array2::from_shape_vec((n, width), images.payload.iter().map(|&p| p as f64 / 255.0).collect())
        .expect("payload length checked");
    let labels = match labels_path {
        Some(p) => {
            let l = parse_idx(&read_maybe_gzip(p)?, 1)?;
            if l.dims[0] != n {
                return Err(SongError::Format(format!("{} labels for {n} images", l.dims[0])));
            }
            Some(l.payload.iter().map(|&b| b as i64).collect())
        }
        None => None,
    };
    DataMatrix::new(rows, labels)
}

/// Encodes unsigned-byte images as an uncompressed IDX file.
pub fn encode_idx_images(n: usize, rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), n * rows * cols);
    let mut out = vec![0, 0, UBYTE, 3];
    for d in [n, rows, cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

/// Encodes unsigned-byte labels as an uncompressed IDX file.
pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = vec![0, 0, UBYTE, 1];
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
