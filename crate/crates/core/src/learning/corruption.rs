use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::learning::data::{Image, LabeledDataset};
use crate::rng::{derive_seed, SplitMix64};

/// One image transform of a corruption set.
///
/// Background variants compose as `max(pixel, pattern)`, which keeps the
/// digit's bright strokes and replaces the dark background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorruptionSpec {
    Identity,
    /// Constant background `level`.
    TintBackground { level: f64 },
    /// Background ramping linearly from 0 at the left column to `max_level` at the right.
    GradientBackground { max_level: f64 },
    /// Alternating `0` / `level` squares of `block × block` pixels, top-left square dark.
    CheckerboardBackground { level: f64, block: usize },
    /// Horizontal shrink to `⌈factor·width⌉` columns, centered on a zero canvas.
    ShrinkH { factor: f64 },
    /// Vertical shrink to `⌈factor·height⌉` rows.
    ShrinkV { factor: f64 },
    ShrinkBoth { factor: f64 },
    /// i.i.d. `Uniform[lo, hi]` added to every pixel, then clamped to `[0, 1]`.
    PixelNoise { lo: f64, hi: f64 },
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<()> {
        let level_ok = |v: f64| (0.0..=1.0).contains(&v);
        let factor_ok = |f: f64| f > 0.0 && f <= 1.0;
        let ok = match *self {
            CorruptionSpec::Identity => true,
            CorruptionSpec::TintBackground { level } => level_ok(level),
            CorruptionSpec::GradientBackground { max_level } => level_ok(max_level),
            CorruptionSpec::CheckerboardBackground { level, block } => level_ok(level) && block > 0,
            CorruptionSpec::ShrinkH { factor }
            | CorruptionSpec::ShrinkV { factor }
            | CorruptionSpec::ShrinkBoth { factor } => factor_ok(factor),
            CorruptionSpec::PixelNoise { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid corruption {self}")))
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, CorruptionSpec::PixelNoise { .. })
    }

    /// Writes the corrupted `height × width` image `src` into `dst`.
    ///
    /// `seed` only matters for random corruptions.
    pub fn apply_into(&self, src: &[f32], height: usize, width: usize, seed: u64, dst: &mut [f32]) {
        debug_assert_eq!(src.len(), height * width);
        debug_assert_eq!(dst.len(), height * width);
        match *self {
            CorruptionSpec::Identity => dst.copy_from_slice(src),
            CorruptionSpec::TintBackground { level } => {
                let b = level as f32;
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = s.max(b);
                }
            }
            CorruptionSpec::GradientBackground { max_level } => {
                let denom = width.saturating_sub(1).max(1) as f64;
                for r in 0..height {
                    for c in 0..width {
                        let b = (max_level * c as f64 / denom) as f32;
                        dst[r * width + c] = src[r * width + c].max(b);
                    }
                }
            }
            CorruptionSpec::CheckerboardBackground { level, block } => {
                for r in 0..height {
                    for c in 0..width {
                        let b = if (r / block + c / block) % 2 == 1 { level as f32 } else { 0.0 };
                        dst[r * width + c] = src[r * width + c].max(b);
                    }
                }
            }
            CorruptionSpec::ShrinkH { factor } => shrink(src, height, width, 1.0, factor, dst),
            CorruptionSpec::ShrinkV { factor } => shrink(src, height, width, factor, 1.0, dst),
            CorruptionSpec::ShrinkBoth { factor } => shrink(src, height, width, factor, factor, dst),
            CorruptionSpec::PixelNoise { lo, hi } => {
                let mut rng = SplitMix64::new(seed);
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = (s as f64 + rng.uniform(lo, hi)).clamp(0.0, 1.0) as f32;
                }
            }
        }
    }
}

impl fmt::Display for CorruptionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CorruptionSpec::Identity => write!(f, "identity"),
            CorruptionSpec::TintBackground { level } => write!(f, "tint({level})"),
            CorruptionSpec::GradientBackground { max_level } => write!(f, "gradient({max_level})"),
            CorruptionSpec::CheckerboardBackground { level, block } => write!(f, "checkerboard({level},{block})"),
            CorruptionSpec::ShrinkH { factor } => write!(f, "shrink-h({factor})"),
            CorruptionSpec::ShrinkV { factor } => write!(f, "shrink-v({factor})"),
            CorruptionSpec::ShrinkBoth { factor } => write!(f, "shrink-both({factor})"),
            CorruptionSpec::PixelNoise { lo, hi } => write!(f, "noise({lo},{hi})"),
        }
    }
}

/// Area-weighted average of `src` over `k` equal cells.
fn resample(src: &[f32], k: usize, out: &mut [f32]) {
    let n = src.len();
    let step = n as f64 / k as f64;
    for (j, o) in out.iter_mut().enumerate().take(k) {
        let (a, b) = (j as f64 * step, (j + 1) as f64 * step);
        let mut acc = 0.0f64;
        let mut i = a.floor() as usize;
        while i < n && (i as f64) < b {
            let overlap = (b.min(i as f64 + 1.0) - a.max(i as f64)).max(0.0);
            acc += overlap * src[i] as f64;
            i += 1;
        }
        *o = (acc / step).clamp(0.0, 1.0) as f32;
    }
}

fn shrink(src: &[f32], height: usize, width: usize, fy: f64, fx: f64, dst: &mut [f32]) {
    let new_h = ((fy * height as f64).ceil() as usize).clamp(1, height);
    let new_w = ((fx * width as f64).ceil() as usize).clamp(1, width);
    let mut rows = vec![0.0f32; height * new_w];
    for r in 0..height {
        resample(&src[r * width..(r + 1) * width], new_w, &mut rows[r * new_w..(r + 1) * new_w]);
    }
    let (top, left) = ((height - new_h) / 2, (width - new_w) / 2);
    dst.fill(0.0);
    let mut column = vec![0.0f32; height];
    let mut shrunk = vec![0.0f32; new_h];
    for c in 0..new_w {
        for r in 0..height {
            column[r] = rows[r * new_w + c];
        }
        resample(&column, new_h, &mut shrunk);
        for (r, &v) in shrunk.iter().enumerate() {
            dst[(top + r) * width + left + c] = v;
        }
    }
}

/// Corrupts a single image; random corruptions are a pure function of `seed`.
pub fn apply_corruption(img: &Image, spec: &CorruptionSpec, seed: u64) -> Result<Image> {
    spec.validate()?;
    let mut out = vec![0.0; img.pixels().len()];
    spec.apply_into(img.pixels(), img.height, img.width, seed, &mut out);
    Image::new(img.height, img.width, out)
}

/// Background constants of the built-in sets.
pub const TINT_LEVEL: f64 = 0.25;
pub const GRADIENT_MAX: f64 = 0.5;
pub const CHECKER_LEVEL: f64 = 0.5;
pub const CHECKER_BLOCK: usize = 4;
pub const SHRINK_FACTOR: f64 = 0.75;

/// A named list of corruptions `c_1..c_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionSet {
    pub name: String,
    pub specs: Vec<CorruptionSpec>,
}

impl CorruptionSet {
    pub fn new(name: impl Into<String>, specs: Vec<CorruptionSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Empty("corruption set"));
        }
        for s in &specs {
            s.validate()?;
        }
        Ok(Self {
            name: name.into(),
            specs,
        })
    }

    pub fn m(&self) -> usize {
        self.specs.len()
    }

    pub fn background() -> Self {
        Self {
            name: "background".into(),
            specs: vec![
                CorruptionSpec::Identity,
                CorruptionSpec::TintBackground { level: TINT_LEVEL },
                CorruptionSpec::GradientBackground { max_level: GRADIENT_MAX },
                CorruptionSpec::CheckerboardBackground {
                    level: CHECKER_LEVEL,
                    block: CHECKER_BLOCK,
                },
            ],
        }
    }

    pub fn shrink() -> Self {
        Self {
            name: "shrink".into(),
            specs: vec![
                CorruptionSpec::Identity,
                CorruptionSpec::ShrinkH { factor: SHRINK_FACTOR },
                CorruptionSpec::ShrinkV { factor: SHRINK_FACTOR },
                CorruptionSpec::ShrinkBoth { factor: SHRINK_FACTOR },
            ],
        }
    }

    pub fn pixel() -> Self {
        Self {
            name: "pixel".into(),
            specs: vec![
                CorruptionSpec::Identity,
                CorruptionSpec::PixelNoise { lo: -0.15, hi: -0.05 },
                CorruptionSpec::PixelNoise { lo: -0.05, hi: 0.05 },
                CorruptionSpec::PixelNoise { lo: 0.05, hi: 0.15 },
            ],
        }
    }

    pub fn mixed() -> Self {
        Self {
            name: "mixed".into(),
            specs: vec![
                CorruptionSpec::Identity,
                CorruptionSpec::CheckerboardBackground {
                    level: CHECKER_LEVEL,
                    block: CHECKER_BLOCK,
                },
                CorruptionSpec::ShrinkBoth { factor: SHRINK_FACTOR },
                CorruptionSpec::PixelNoise { lo: -0.15, hi: -0.05 },
            ],
        }
    }

    /// One of `background`, `shrink`, `pixel`, `mixed`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "background" => Ok(Self::background()),
            "shrink" => Ok(Self::shrink()),
            "pixel" => Ok(Self::pixel()),
            "mixed" => Ok(Self::mixed()),
            other => Err(Error::invalid(format!("unknown corruption set {other:?}"))),
        }
    }
}

/// A dataset corrupted once by every spec of a set, for evaluation.
///
/// Image `j` under spec `i` uses noise seed `derive_seed(seed, j, i)`, so the
/// copies are fixed for the lifetime of an experiment.
#[derive(Debug, Clone)]
pub struct CorruptedCopies {
    pub copies: Vec<Array2<f32>>,
    pub labels: Vec<u8>,
}

impl CorruptedCopies {
    pub fn new(data: &LabeledDataset, cset: &CorruptionSet, seed: u64) -> Self {
        let (h, w) = (data.height, data.width);
        let copies = cset
            .specs
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let mut out = Array2::<f32>::zeros(data.images.raw_dim());
                for (j, (src, mut dst)) in data.images.rows().into_iter().zip(out.rows_mut()).enumerate() {
                    let src = src.as_slice().expect("dataset rows are contiguous");
                    let dst = dst.as_slice_mut().expect("fresh array rows are contiguous");
                    spec.apply_into(src, h, w, derive_seed(seed, j as u64, i as u64), dst);
                }
                out
            })
            .collect();
        Self {
            copies,
            labels: data.labels.clone(),
        }
    }

    pub fn m(&self) -> usize {
        self.copies.len()
    }
}
