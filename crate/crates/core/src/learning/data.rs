use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Number of digit classes.
pub const NUM_CLASSES: usize = 10;

/// A grayscale image with intensities in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pixels: Vec<f32>,
}

impl Image {
    pub fn new(height: usize, width: usize, pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: height * width,
                found: pixels.len(),
            });
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("pixel intensity {p} outside [0, 1]")));
        }
        Ok(Self { height, width, pixels })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            pixels: vec![0.0; height * width],
        }
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn at(&self, r: usize, c: usize) -> f32 {
        self.pixels[r * self.width + c]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetRole {
    Train,
    Validation,
    Test,
}

/// Images as rows of an `n × (height·width)` matrix, plus digit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub height: usize,
    pub width: usize,
    pub images: Array2<f32>,
    pub labels: Vec<u8>,
    pub role: DatasetRole,
}

impl LabeledDataset {
    pub fn new(height: usize, width: usize, images: Array2<f32>, labels: Vec<u8>, role: DatasetRole) -> Result<Self> {
        if images.ncols() != height * width {
            return Err(Error::DimensionMismatch {
                expected: height * width,
                found: images.ncols(),
            });
        }
        if images.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: images.nrows(),
                found: labels.len(),
            });
        }
        if let Some(l) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::invalid(format!("label {l} outside 0..{NUM_CLASSES}")));
        }
        if images.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("pixel intensities must lie in [0, 1]"));
        }
        Ok(Self {
            height,
            width,
            images: images.as_standard_layout().into_owned(),
            labels,
            role,
        })
    }

    /// Byte intensities rescaled by `1/255`.
    pub fn from_bytes(height: usize, width: usize, bytes: &[u8], labels: Vec<u8>, role: DatasetRole) -> Result<Self> {
        let d = height * width;
        if d == 0 || !bytes.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "{} pixel bytes do not split into {height}x{width} images",
                bytes.len()
            )));
        }
        let pixels: Vec<f32> = bytes.iter().map(|&b| b as f32 / 255.0).collect();
        let images = Array2::from_shape_vec((bytes.len() / d, d), pixels)
            .map_err(|e| Error::invalid(e.to_string()))?;
        Self::new(height, width, images, labels, role)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.height * self.width
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f32> {
        self.images.row(i)
    }

    pub fn image(&self, i: usize) -> Image {
        Image {
            height: self.height,
            width: self.width,
            pixels: self.images.row(i).to_vec(),
        }
    }

    /// Rows `start..start+len` under a new role.
    pub fn slice(&self, start: usize, len: usize, role: DatasetRole) -> Result<Self> {
        if start + len > self.len() {
            return Err(Error::invalid(format!(
                "rows {start}..{} exceed dataset of {}",
                start + len,
                self.len()
            )));
        }
        Ok(Self {
            height: self.height,
            width: self.width,
            images: self.images.slice(ndarray::s![start..start + len, ..]).to_owned(),
            labels: self.labels[start..start + len].to_vec(),
            role,
        })
    }
}
