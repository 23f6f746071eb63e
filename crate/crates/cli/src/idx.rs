//! IDX image and label files, optionally gzip-compressed.

use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use ndarray::Array2;
use robustopt_core::learning::{DatasetRole, LabeledDataset, NUM_CLASSES};

use crate::error::{CliError, IdxError};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels scaled to `[0, 1]`, `count · rows · cols` of them.
    pub pixels: Vec<f32>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[f32] {
        let d = self.rows * self.cols;
        &self.pixels[i * d..(i + 1) * d]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdxData {
    Images(IdxImages),
    Labels(Vec<u8>),
}

/// Reads the whole file, inflating it first when it starts with the gzip magic.
fn read_bytes(path: &Path) -> Result<Vec<u8>, IdxError> {
    let io = |source| IdxError::Io {
        path: path.to_path_buf(),
        source,
    };
    let raw = std::fs::read(path).map_err(io)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(io)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

struct Header {
    magic: u32,
    dims: Vec<usize>,
    payload: usize,
}

fn header(path: &Path, bytes: &[u8]) -> Result<Header, IdxError> {
    let truncated = |needed| IdxError::Truncated {
        path: path.to_path_buf(),
        needed,
        found: bytes.len(),
    };
    if bytes.len() < 4 {
        return Err(truncated(4));
    }
    let magic = be_u32(bytes, 0);
    let ndims = match magic {
        IMAGE_MAGIC => 3,
        LABEL_MAGIC => 1,
        found => {
            return Err(IdxError::WrongMagic {
                path: path.to_path_buf(),
                expected: IMAGE_MAGIC,
                found,
            })
        }
    };
    let payload = 4 + 4 * ndims;
    if bytes.len() < payload {
        return Err(truncated(payload));
    }
    let dims = (0..ndims).map(|d| be_u32(bytes, 4 + 4 * d) as usize).collect();
    Ok(Header { magic, dims, payload })
}

fn parse(path: &Path, bytes: &[u8]) -> Result<IdxData, IdxError> {
    let h = header(path, bytes)?;
    let declared: usize = h.dims.iter().product();
    let needed = h.payload + declared;
    if bytes.len() < needed {
        return Err(IdxError::Truncated {
            path: path.to_path_buf(),
            needed,
            found: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(IdxError::DimensionMismatch {
            path: path.to_path_buf(),
            detail: format!("{} trailing bytes after the declared {:?} payload", bytes.len() - needed, h.dims),
        });
    }
    let body = &bytes[h.payload..];
    if h.magic == LABEL_MAGIC {
        return Ok(IdxData::Labels(body.to_vec()));
    }
    let (count, rows, cols) = (h.dims[0], h.dims[1], h.dims[2]);
    if rows == 0 || cols == 0 {
        return Err(IdxError::DimensionMismatch {
            path: path.to_path_buf(),
            detail: format!("empty image shape {rows}x{cols}"),
        });
    }
    Ok(IdxData::Images(IdxImages {
        count,
        rows,
        cols,
        pixels: body.iter().map(|&b| b as f32 / 255.0).collect(),
    }))
}

/// Loads an image or label file, whichever its magic number declares.
pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxData, IdxError> {
    let path = path.as_ref();
    parse(path, &read_bytes(path)?)
}

fn expect_magic(path: &Path, bytes: &[u8], expected: u32) -> Result<(), IdxError> {
    if bytes.len() >= 4 && be_u32(bytes, 0) != expected {
        return Err(IdxError::WrongMagic {
            path: path.to_path_buf(),
            expected,
            found: be_u32(bytes, 0),
        });
    }
    Ok(())
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<IdxImages, IdxError> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    expect_magic(path, &bytes, IMAGE_MAGIC)?;
    match parse(path, &bytes)? {
        IdxData::Images(images) => Ok(images),
        IdxData::Labels(_) => unreachable!("magic checked above"),
    }
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>, IdxError> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    expect_magic(path, &bytes, LABEL_MAGIC)?;
    match parse(path, &bytes)? {
        IdxData::Labels(labels) => Ok(labels),
        IdxData::Images(_) => unreachable!("magic checked above"),
    }
}

/// Pairs an image file with its label file.
pub fn load_labeled(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<LabeledDataset, CliError> {
    let label_path: PathBuf = labels.as_ref().to_path_buf();
    let imgs = load_idx_images(images.as_ref())?;
    let labels = load_idx_labels(&label_path)?;
    let mismatch = |detail: String| IdxError::DimensionMismatch {
        path: label_path.clone(),
        detail,
    };
    if labels.len() != imgs.count {
        return Err(mismatch(format!("{} labels for {} images", labels.len(), imgs.count)).into());
    }
    if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y as usize >= NUM_CLASSES) {
        return Err(mismatch(format!("label {y} at index {i} outside 0..{NUM_CLASSES}")).into());
    }
    let array = Array2::from_shape_vec((imgs.count, imgs.rows * imgs.cols), imgs.pixels).expect("length checked by the parser");
    LabeledDataset::new(imgs.rows, imgs.cols, array, labels, DatasetRole::Train)
        .map_err(CliError::core("building dataset"))
}
