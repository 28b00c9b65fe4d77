//! Pixel-level primitives: grayscale conversion, binarization, content
//! cropping, word extraction and nearest-neighbour resizing.
//!
//! Everything here is a pure function over immutable inputs. Binary images
//! use `true` for ink (foreground) and `false` for paper.

use std::ops::Range;
use std::path::Path;

use image::{DynamicImage, Luma, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit intensity image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Ink/paper image, row-major. `true` marks a foreground pixel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// All-background image.
    pub fn blank(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        check_dims(width, height, width * height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Parses rows of `#` (ink) and `.` (paper). Handy for small fixtures.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut pixels = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(Error::InvalidImage("ragged ascii rows".into()));
            }
            pixels.extend(row.chars().map(|c| c == '#'));
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.pixels[y * self.width + x] = ink;
    }

    pub fn ink_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn has_ink(&self) -> bool {
        self.pixels.iter().any(|&p| p)
    }

    pub fn column_has_ink(&self, x: usize) -> bool {
        (0..self.height).any(|y| self.get(x, y))
    }

    /// Pixel-wise negation.
    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| !p).collect(),
        }
    }

    /// Full-height slice of the given columns.
    pub fn columns(&self, cols: Range<usize>) -> Result<Self> {
        self.sub_image(BoundingBox {
            left: cols.start,
            top: 0,
            width: cols.len(),
            height: self.height,
        })
    }

    pub fn sub_image(&self, bbox: BoundingBox) -> Result<Self> {
        if bbox.width == 0
            || bbox.height == 0
            || bbox.left + bbox.width > self.width
            || bbox.top + bbox.height > self.height
        {
            return Err(Error::InvalidImage(format!(
                "box {bbox:?} outside {}x{} image",
                self.width, self.height
            )));
        }
        Self::from_fn(bbox.width, bbox.height, |x, y| {
            self.get(bbox.left + x, bbox.top + y)
        })
    }

    /// Number of positions where the two equally sized images agree.
    pub(crate) fn agreement(&self, other: &Self) -> usize {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        self.pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(a, b)| a == b)
            .count()
    }

    /// Renders as an 8-bit image, ink black on white paper.
    pub fn to_luma(&self) -> image::GrayImage {
        image::GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            Luma([if self.get(x as usize, y as usize) {
                0
            } else {
                255
            }])
        })
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_luma()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| Error::Decode {
                path: path.to_owned(),
                source,
            })
    }
}

/// Axis-aligned box in source-image pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub left: usize,
    pub top: usize,
    pub width: usize,
    pub height: usize,
}

/// Half-open column range `[start, end)`, left-origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn width(&self) -> usize {
        self.end - self.start
    }

    pub fn midpoint(&self) -> f64 {
        (self.start + self.end) as f64 / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.start as f64 <= x && x < self.end as f64
    }

    /// Distance from `x` to the nearest column of the span; 0 when inside.
    pub fn distance(&self, x: f64) -> f64 {
        if self.contains(x) {
            0.0
        } else if x < self.start as f64 {
            self.start as f64 - x
        } else {
            x - self.end as f64
        }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// Colour or gray input raster, as read from disk.
#[derive(Clone, Debug)]
pub enum Raster {
    Rgb(RgbImage),
    Gray(GrayImage),
}

impl Raster {
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Decode {
            path: path.to_owned(),
            source,
        })?;
        Self::from_dynamic(img)
    }

    pub fn from_dynamic(img: DynamicImage) -> Result<Self> {
        match img {
            DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Ok(Raster::Gray(GrayImage::new(
                    w as usize,
                    h as usize,
                    g.into_raw(),
                )?))
            }
            other => Ok(Raster::Rgb(other.to_rgb8())),
        }
    }

    pub fn to_gray(&self) -> Result<GrayImage> {
        match self {
            Raster::Rgb(rgb) => to_grayscale(rgb),
            Raster::Gray(g) => Ok(g.clone()),
        }
    }
}

/// Threshold selection for [`binarize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    /// Ink iff intensity < t.
    Fixed(u8),
    #[default]
    Otsu,
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if len != width * height {
        return Err(Error::InvalidImage(format!(
            "{len} pixels for {width}x{height}"
        )));
    }
    Ok(())
}

/// Luma conversion with fixed 0.299/0.587/0.114 weights, rounded half away
/// from zero.
pub fn to_grayscale(image: &RgbImage) -> Result<GrayImage> {
    let (w, h) = image.dimensions();
    let pixels = image
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0;
            let v = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(w as usize, h as usize, pixels)
}

/// Otsu threshold over the 256-bin histogram, returned in the
/// `intensity < t` convention. The first maximizing split wins. A
/// single-level image has no split and falls back to 128.
pub fn otsu_threshold(image: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &p in image.pixels() {
        hist[p as usize] += 1;
    }
    let total = image.pixels().len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();

    let mut best: Option<(usize, f64)> = None;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    // Split k puts intensities 0..=k in the dark class.
    for (k, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += k as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((k, between));
        }
    }
    match best {
        Some((k, _)) => (k + 1) as u8,
        None => 128,
    }
}

pub fn binarize(image: &GrayImage, policy: Threshold) -> BinaryImage {
    let t = match policy {
        Threshold::Fixed(t) => t,
        Threshold::Otsu => otsu_threshold(image),
    };
    BinaryImage {
        width: image.width,
        height: image.height,
        pixels: image.pixels.iter().map(|&p| p < t).collect(),
    }
}

/// Tight bounding box of the ink, if any.
pub fn content_box(image: &BinaryImage) -> Option<BoundingBox> {
    let (mut left, mut right) = (usize::MAX, 0);
    let (mut top, mut bottom) = (usize::MAX, 0);
    for y in 0..image.height {
        for x in 0..image.width {
            if image.get(x, y) {
                left = left.min(x);
                right = right.max(x);
                top = top.min(y);
                bottom = bottom.max(y);
            }
        }
    }
    (left != usize::MAX).then(|| BoundingBox {
        left,
        top,
        width: right - left + 1,
        height: bottom - top + 1,
    })
}

/// Minimal sub-image containing every ink pixel, and where it came from.
pub fn crop_to_content(image: &BinaryImage) -> Result<(BinaryImage, BoundingBox)> {
    let bbox = content_box(image).ok_or(Error::NoContent)?;
    Ok((image.sub_image(bbox)?, bbox))
}

/// Column spans of the words on a page, right-to-left.
///
/// A word is a maximal run of columns whose ink-bearing columns are never
/// separated by `gap_px` or more consecutive blank columns. Spans are tight
/// on both sides.
pub fn word_spans(page: &BinaryImage, gap_px: usize) -> Result<Vec<Span>> {
    if gap_px == 0 {
        return Err(Error::InvalidConfig("gap_px must be at least 1".into()));
    }
    let mut spans = Vec::new();
    let mut current: Option<Span> = None;
    let mut blank_run = 0;
    for x in (0..page.width).rev() {
        if page.column_has_ink(x) {
            match current.as_mut() {
                Some(span) if blank_run < gap_px => span.start = x,
                _ => {
                    if let Some(done) = current.take() {
                        spans.push(done);
                    }
                    current = Some(Span::new(x, x + 1));
                }
            }
            blank_run = 0;
        } else {
            blank_run += 1;
        }
    }
    spans.extend(current);
    Ok(spans)
}

/// Splits a page into word images, right-to-left (reading order). Each word
/// is cropped to its content. A blank page yields no words.
pub fn extract_words(page: &BinaryImage, gap_px: usize) -> Result<Vec<BinaryImage>> {
    word_spans(page, gap_px)?
        .into_iter()
        .map(|span| Ok(crop_to_content(&page.columns(span.range())?)?.0))
        .collect()
}

/// Nearest-neighbour resampling: destination pixel `(x, y)` reads source
/// pixel `(floor(x * src_w / w), floor(y * src_h / h))`.
pub fn resize_nearest(image: &BinaryImage, width: usize, height: usize) -> Result<BinaryImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "resize target {width}x{height}"
        )));
    }
    if (width, height) == (image.width, image.height) {
        return Ok(image.clone());
    }
    let xs: Vec<usize> = (0..width).map(|x| x * image.width / width).collect();
    let ys: Vec<usize> = (0..height).map(|y| y * image.height / height).collect();
    BinaryImage::from_fn(width, height, |x, y| image.get(xs[x], ys[y]))
}
