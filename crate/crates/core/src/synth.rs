//! Synthetic woven-like test frames and flat patches standing in for
//! defects.
//!
//! A frame is a vertical stripe pattern whose contrast is modulated along
//! the rows by a second period, both at seeded whole-pixel phases, plus optional
//! uniform noise.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imaging::{GrayImage, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripeSpec {
    /// Stripe period along a row, in pixels.
    pub period: usize,
    /// Contrast modulation period down the columns; 0 disables it.
    pub row_period: usize,
    pub low: u8,
    pub high: u8,
    /// Noise is drawn uniformly from `-noise..=noise`.
    pub noise: u8,
}

impl Default for StripeSpec {
    fn default() -> Self {
        Self {
            period: 7,
            row_period: 11,
            low: 60,
            high: 180,
            noise: 0,
        }
    }
}

pub fn stripe_texture(spec: &StripeSpec, width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = spec.period.max(1) as f64;
    let (lo, hi) = (f64::from(spec.low), f64::from(spec.high));
    let phase = rng.gen_range(0..spec.period.max(1)) as f64;
    let stripe: Vec<f64> = (0..width)
        .map(|x| 0.5 * (1.0 + (TAU * (x as f64 + phase) / period).cos()))
        .collect();
    let gain: Vec<f64> = if spec.row_period > 0 {
        let row_period = spec.row_period as f64;
        let row_phase = rng.gen_range(0..spec.row_period) as f64;
        (0..height)
            .map(|y| 0.7 + 0.15 * (1.0 + (TAU * (y as f64 + row_phase) / row_period).cos()))
            .collect()
    } else {
        vec![1.0; height]
    };
    let noise = i32::from(spec.noise);
    GrayImage::from_fn(width, height, |x, y| {
        let jitter = if noise > 0 {
            rng.gen_range(-noise..=noise)
        } else {
            0
        };
        let level = lo + (hi - lo) * stripe[x] * gain[y];
        (level.round() as i32 + jitter).clamp(0, 255) as u8
    })
    .expect("non-empty synthetic frame")
}

/// Copy of `img` with `rect` (clipped to the image) filled with `level`.
pub fn insert_patch(img: &GrayImage, rect: Rect, level: u8) -> GrayImage {
    let mut out = img.clone();
    for y in rect.y..(rect.y + rect.h).min(img.height()) {
        for x in rect.x..(rect.x + rect.w).min(img.width()) {
            out.set(x, y, level);
        }
    }
    out
}
