//! 8-bit grayscale rasters and the binary PGM boundary.
//!
//! Images are row-major with the row axis pointing down: pixel `(x, y)` is
//! column `x`, row `y`, stored at `y * width + x`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// Outline level used for defect markings.
pub const WHITE: u8 = 255;
/// Outline thickness used for defect markings.
pub const DEFAULT_THICKNESS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, level: u8) -> Result<Self> {
        Self::new(width, height, vec![level; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Column count (C).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Row count (R).
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, level: u8) {
        self.pixels[y * self.width + x] = level;
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn max_level(&self) -> u8 {
        self.pixels.iter().copied().max().unwrap_or(0)
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }
}

/// Axis-aligned pixel rectangle; `x` is the column offset, `y` the row offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn fits(&self, img: &GrayImage) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x.checked_add(self.w).is_some_and(|r| r <= img.width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= img.height)
    }

    fn check(&self, img: &GrayImage) -> Result<()> {
        if self.fits(img) {
            Ok(())
        } else {
            Err(Error::RectOutOfBounds {
                rect: *self,
                width: img.width,
                height: img.height,
            })
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    /// True when `other` lies entirely within `self`.
    pub fn encloses(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.x + other.w <= self.x + self.w
            && other.y + other.h <= self.y + self.h
    }

    /// Chebyshev gap between two rects; 0 when they touch or overlap.
    pub fn gap(&self, other: &Rect) -> usize {
        let gap_axis =
            |a0: usize, a1: usize, b0: usize, b1: usize| b0.saturating_sub(a1).max(a0.saturating_sub(b1));
        let gx = gap_axis(self.x, self.x + self.w, other.x, other.x + other.w);
        let gy = gap_axis(self.y, self.y + self.h, other.y, other.y + other.h);
        gx.max(gy)
    }
}

/// Distinct failure modes when decoding binary PGM.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("not a binary PGM (expected magic \"P5\")")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("PGM maxval {0} exceeds 255 (only 8-bit images are supported)")]
    MaxvalTooLarge(u32),
    #[error("truncated PGM pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("PGM pixel value {value} exceeds maxval {maxval}")]
    ValueAboveMaxval { value: u8, maxval: u32 },
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &str) -> std::result::Result<u32, PgmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::MalformedHeader(format!("missing {field}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::MalformedHeader(format!("{field} out of range")))
    }
}

/// Decodes a binary (P5) PGM with maxval ≤ 255. Pixel values are copied
/// verbatim; no rescaling is applied for maxval < 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::BadMagic.into());
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PgmError::BadMagic.into());
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader(format!("zero dimension {width}x{height}")).into());
    }
    if maxval == 0 {
        return Err(PgmError::MalformedHeader("maxval must be positive".into()).into());
    }
    if maxval > 255 {
        return Err(PgmError::MaxvalTooLarge(maxval).into());
    }
    // exactly one whitespace byte separates the header from the raster
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(PgmError::MalformedHeader("missing whitespace after maxval".into()).into()),
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| PgmError::MalformedHeader("dimensions overflow".into()))?;
    let data = &bytes[cur.pos..];
    if data.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            found: data.len(),
        }
        .into());
    }
    let pixels = data[..expected].to_vec();
    if let Some(&value) = pixels.iter().find(|&&v| u32::from(v) > maxval) {
        return Err(PgmError::ValueAboveMaxval { value, maxval }.into());
    }
    GrayImage::new(width, height, pixels)
}

/// Encodes `img` as binary PGM with maxval 255 and no header comments.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn check_levels(levels: u16) -> Result<()> {
    if (2..=256).contains(&levels) {
        Ok(())
    } else {
        Err(Error::InvalidLevels(levels))
    }
}

/// Linear binning to `levels` gray levels: `floor(p * levels / 256)`.
pub fn quantize(img: &GrayImage, levels: u16) -> Result<GrayImage> {
    check_levels(levels)?;
    if levels == 256 {
        return Ok(img.clone());
    }
    let g = u32::from(levels);
    let pixels = img
        .pixels
        .iter()
        .map(|&p| ((u32::from(p) * g) >> 8) as u8)
        .collect();
    GrayImage::new(img.width, img.height, pixels)
}

pub fn extract_window(img: &GrayImage, r: Rect) -> Result<GrayImage> {
    r.check(img)?;
    let mut pixels = Vec::with_capacity(r.w * r.h);
    for y in r.y..r.y + r.h {
        pixels.extend_from_slice(&img.row(y)[r.x..r.x + r.w]);
    }
    GrayImage::new(r.w, r.h, pixels)
}

/// Returns a copy of `img` with the `thickness`-pixel band just inside the
/// border of `r` set to `level`.
pub fn draw_square_outline(img: &GrayImage, r: Rect, level: u8, thickness: usize) -> Result<GrayImage> {
    let mut out = img.clone();
    draw_square_outline_in_place(&mut out, r, level, thickness)?;
    Ok(out)
}

pub(crate) fn draw_square_outline_in_place(
    img: &mut GrayImage,
    r: Rect,
    level: u8,
    thickness: usize,
) -> Result<()> {
    r.check(img)?;
    if thickness == 0 || 2 * thickness > r.w.min(r.h) {
        return Err(Error::InvalidThickness {
            thickness,
            w: r.w,
            h: r.h,
        });
    }
    for y in r.y..r.y + r.h {
        let band_row = y < r.y + thickness || y >= r.y + r.h - thickness;
        for x in r.x..r.x + r.w {
            if band_row || x < r.x + thickness || x >= r.x + r.w - thickness {
                img.set(x, y, level);
            }
        }
    }
    Ok(())
}
