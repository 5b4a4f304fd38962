//! Sliding-window texture inspection.
//!
//! A frame is tiled into `w`×`w` windows at a fixed stride, each window's
//! co-occurrence energy is compared against statistics pooled from
//! defect-free frames, and windows deviating by more than `k` standard
//! deviations are flagged. Only energy drives flags; the remaining features
//! are carried along for traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_all, FeatureVector};
use crate::glcm::{compute_counts, to_probabilities, GlcmParams};
use crate::imaging::{
    draw_square_outline_in_place, extract_window, quantize, GrayImage, Rect, DEFAULT_THICKNESS, WHITE,
};
use crate::scalar::Scalar;

pub const PROFILE_VERSION: u32 = 1;
pub const DEFAULT_WINDOW: usize = 50;
pub const DEFAULT_K: f64 = 3.0;

/// Relative floor on the calibration standard deviation.
const SIGMA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScanSettings {
    #[serde(flatten)]
    pub glcm: GlcmParams,
    pub window: usize,
    pub stride: usize,
}

impl Default for ScanSettings {
    /// 50×50 non-overlapping windows with the default co-occurrence params.
    fn default() -> Self {
        Self {
            glcm: GlcmParams::default(),
            window: DEFAULT_WINDOW,
            stride: DEFAULT_WINDOW,
        }
    }
}

impl ScanSettings {
    pub fn validate(&self) -> Result<()> {
        self.glcm.validate()?;
        if self.window == 0 {
            return Err(Error::WindowDoesNotFit {
                window: 0,
                rows: 0,
                cols: 0,
            });
        }
        if self.stride == 0 {
            return Err(Error::InvalidStride);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowGrid {
    pub image_dims: (usize, usize),
    pub window: usize,
    pub stride: usize,
    pub rects: Vec<Rect>,
}

impl WindowGrid {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }
}

/// Row-major window positions `(r·s, c·s)` that keep the window in bounds.
/// Trailing pixels not covered by a full window are skipped.
pub fn tile_grid(rows: usize, cols: usize, window: usize, stride: usize) -> Result<WindowGrid> {
    if window == 0 || window > rows.min(cols) {
        return Err(Error::WindowDoesNotFit { window, rows, cols });
    }
    if stride == 0 {
        return Err(Error::InvalidStride);
    }
    let per_col = (rows - window) / stride + 1;
    let per_row = (cols - window) / stride + 1;
    let mut rects = Vec::with_capacity(per_col * per_row);
    for r in 0..per_col {
        for c in 0..per_row {
            rects.push(Rect::new(c * stride, r * stride, window, window));
        }
    }
    Ok(WindowGrid {
        image_dims: (rows, cols),
        window,
        stride,
        rects,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFeatures<T> {
    pub index: usize,
    pub rect: Rect,
    pub features: FeatureVector<T>,
}

pub fn window_features<T: Scalar>(
    img: &GrayImage,
    rect: Rect,
    params: &GlcmParams,
) -> Result<FeatureVector<T>> {
    let win = extract_window(img, rect)?;
    let counts = compute_counts(&win, params)?;
    Ok(extract_all(&to_probabilities::<T>(&counts)?))
}

/// Features of every grid window, in grid order. `img` must already be
/// quantized to `settings.glcm.g_levels`.
pub fn scan_features<T: Scalar>(img: &GrayImage, settings: &ScanSettings) -> Result<Vec<WindowFeatures<T>>> {
    settings.validate()?;
    let grid = tile_grid(img.height(), img.width(), settings.window, settings.stride)?;
    grid.rects
        .par_iter()
        .enumerate()
        .map(|(index, &rect)| {
            Ok(WindowFeatures {
                index,
                rect,
                features: window_features(img, rect, &settings.glcm)?,
            })
        })
        .collect()
}

pub const TRACE_HEADER: &str = "step,x,y,energy,entropy,contrast,homogeneity,correlation,max_prob";

/// CSV feature trace, one row per window in grid order.
pub fn trace_csv<T: Scalar>(windows: &[WindowFeatures<T>]) -> String {
    use std::fmt::Write as _;
    let mut out = String::with_capacity(64 * (windows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for w in windows {
        let f = &w.features;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            w.index,
            w.rect.x,
            w.rect.y,
            f.energy,
            f.entropy,
            f.contrast,
            f.homogeneity,
            f.correlation,
            f.max_prob
        );
    }
    out
}

/// Quantizes a raw 8-bit frame, then scans it.
pub fn scan_frame<T: Scalar>(img: &GrayImage, settings: &ScanSettings) -> Result<Vec<WindowFeatures<T>>> {
    let q = quantize(img, settings.glcm.g_levels)?;
    scan_features(&q, settings)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd<T> {
    pub mean: T,
    pub std: T,
}

impl<T: Scalar> MeanStd<T> {
    /// Sample mean and n−1 standard deviation, summed in input order.
    pub fn of(values: &[T]) -> Self {
        let n = T::from_usize_lossy(values.len());
        let mean = values.iter().copied().sum::<T>() / n;
        let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        let std = if values.len() > 1 {
            (ss / (n - T::one())).sqrt()
        } else {
            T::zero()
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats<T> {
    pub energy: MeanStd<T>,
    pub entropy: MeanStd<T>,
    pub contrast: MeanStd<T>,
    pub homogeneity: MeanStd<T>,
    pub correlation: MeanStd<T>,
    pub max_prob: MeanStd<T>,
}

/// Reference energy statistics pooled over defect-free windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile<T> {
    pub version: u32,
    #[serde(flatten)]
    pub settings: ScanSettings,
    pub n_windows: usize,
    pub mean_energy: T,
    pub std_energy: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_stats: Option<FeatureStats<T>>,
}

impl<T: Scalar> CalibrationProfile<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != PROFILE_VERSION {
            return Err(Error::UnsupportedProfileVersion(self.version));
        }
        self.settings.validate()?;
        if self.n_windows < 2 {
            return Err(Error::TooFewWindows(self.n_windows));
        }
        if !self.mean_energy.is_finite() || !self.std_energy.is_finite() || self.std_energy < T::zero() {
            return Err(Error::IncompatibleProfile(
                "energy statistics must be finite and std non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Hard check that a run uses the settings this profile was learned under.
    pub fn check_compatible(&self, settings: &ScanSettings) -> Result<()> {
        let mine = &self.settings;
        let mut diffs = Vec::new();
        if mine.glcm.d != settings.glcm.d {
            diffs.push(format!("d {} != {}", mine.glcm.d, settings.glcm.d));
        }
        if mine.glcm.theta != settings.glcm.theta {
            diffs.push(format!(
                "theta {} != {}",
                mine.glcm.theta.degrees(),
                settings.glcm.theta.degrees()
            ));
        }
        if mine.glcm.g_levels != settings.glcm.g_levels {
            diffs.push(format!(
                "levels {} != {}",
                mine.glcm.g_levels, settings.glcm.g_levels
            ));
        }
        if mine.glcm.symmetric != settings.glcm.symmetric {
            diffs.push(format!(
                "symmetric {} != {}",
                mine.glcm.symmetric, settings.glcm.symmetric
            ));
        }
        if mine.window != settings.window {
            diffs.push(format!("window {} != {}", mine.window, settings.window));
        }
        if mine.stride != settings.stride {
            diffs.push(format!("stride {} != {}", mine.stride, settings.stride));
        }
        if diffs.is_empty() {
            Ok(())
        } else {
            Err(Error::IncompatibleProfile(format!(
                "profile vs run: {}",
                diffs.join(", ")
            )))
        }
    }
}

/// Pools window statistics over raw 8-bit defect-free frames. Frames may
/// differ in size.
pub fn calibrate<T: Scalar>(clean: &[GrayImage], settings: &ScanSettings) -> Result<CalibrationProfile<T>> {
    settings.validate()?;
    let mut pooled: Vec<FeatureVector<T>> = Vec::new();
    for img in clean {
        pooled.extend(scan_frame::<T>(img, settings)?.into_iter().map(|w| w.features));
    }
    if pooled.len() < 2 {
        return Err(Error::TooFewWindows(pooled.len()));
    }
    let stat = |f: fn(&FeatureVector<T>) -> T| MeanStd::of(&pooled.iter().map(f).collect::<Vec<_>>());
    let stats = FeatureStats {
        energy: stat(|f| f.energy),
        entropy: stat(|f| f.entropy),
        contrast: stat(|f| f.contrast),
        homogeneity: stat(|f| f.homogeneity),
        correlation: stat(|f| f.correlation),
        max_prob: stat(|f| f.max_prob),
    };
    Ok(CalibrationProfile {
        version: PROFILE_VERSION,
        settings: *settings,
        n_windows: pooled.len(),
        mean_energy: stats.energy.mean,
        std_energy: stats.energy.std,
        feature_stats: Some(stats),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold<T> {
    pub k: T,
    /// Flag only energy peaks (z > k) instead of |z| > k.
    pub one_sided: bool,
}

impl<T: Scalar> Default for Threshold<T> {
    fn default() -> Self {
        Self {
            k: T::from_f64_lossy(DEFAULT_K),
            one_sided: false,
        }
    }
}

impl<T: Scalar> Threshold<T> {
    pub fn flags(&self, z: T) -> bool {
        if self.one_sided {
            z > self.k
        } else {
            z.abs() > self.k
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportParams<T> {
    #[serde(flatten)]
    pub settings: ScanSettings,
    pub k: T,
    pub one_sided: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference<T> {
    pub mean_energy: T,
    pub std_energy: T,
    /// Standard deviation actually used for z-scores, after flooring.
    pub sigma_used: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowResult<T> {
    pub index: usize,
    pub rect: Rect,
    pub energy: T,
    pub z_score: T,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport<T> {
    pub frame_id: String,
    pub params: ReportParams<T>,
    pub reference: Reference<T>,
    pub windows: Vec<WindowResult<T>>,
    pub n_flagged: usize,
    /// Wall time; left unset so reports stay reproducible unless requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    /// Fabric area covered by the frame, carried as metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_cm2: Option<f64>,
}

impl<T: Scalar> DetectionReport<T> {
    pub fn flagged(&self) -> impl Iterator<Item = &WindowResult<T>> {
        self.windows.iter().filter(|w| w.flagged)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// A calibrated, immutable detector; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Detector<T> {
    profile: CalibrationProfile<T>,
    threshold: Threshold<T>,
    sigma: T,
}

impl<T: Scalar> Detector<T> {
    pub fn new(
        profile: CalibrationProfile<T>,
        settings: &ScanSettings,
        threshold: Threshold<T>,
    ) -> Result<Self> {
        profile.validate()?;
        profile.check_compatible(settings)?;
        if !threshold.k.is_finite() || threshold.k <= T::zero() {
            return Err(Error::InvalidThreshold);
        }
        let floor = T::from_f64_lossy(SIGMA_FLOOR) * profile.mean_energy.max(T::one());
        let sigma = profile.std_energy.max(floor);
        Ok(Self {
            profile,
            threshold,
            sigma,
        })
    }

    pub fn profile(&self) -> &CalibrationProfile<T> {
        &self.profile
    }

    pub fn threshold(&self) -> Threshold<T> {
        self.threshold
    }

    pub fn z_score(&self, energy: T) -> T {
        (energy - self.profile.mean_energy) / self.sigma
    }

    /// Scores every window of a raw 8-bit frame.
    pub fn detect(&self, frame_id: &str, img: &GrayImage) -> Result<DetectionReport<T>> {
        let scanned = scan_frame::<T>(img, &self.profile.settings)?;
        let windows: Vec<_> = scanned
            .iter()
            .map(|w| {
                let energy = w.features.energy;
                let z_score = self.z_score(energy);
                WindowResult {
                    index: w.index,
                    rect: w.rect,
                    energy,
                    z_score,
                    flagged: self.threshold.flags(z_score),
                }
            })
            .collect();
        let n_flagged = windows.iter().filter(|w| w.flagged).count();
        Ok(DetectionReport {
            frame_id: frame_id.to_owned(),
            params: ReportParams {
                settings: self.profile.settings,
                k: self.threshold.k,
                one_sided: self.threshold.one_sided,
            },
            reference: Reference {
                mean_energy: self.profile.mean_energy,
                std_energy: self.profile.std_energy,
                sigma_used: self.sigma,
            },
            windows,
            n_flagged,
            elapsed_ms: None,
            area_cm2: None,
        })
    }
}

/// White outlines over every flagged window.
pub fn annotate<T: Scalar>(img: &GrayImage, report: &DetectionReport<T>) -> Result<GrayImage> {
    let mut out = img.clone();
    for w in report.flagged() {
        draw_square_outline_in_place(&mut out, w.rect, WHITE, DEFAULT_THICKNESS)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::energy;
    use crate::glcm::{Orientation, ProbabilityMatrix};
    use crate::synth::{insert_patch, stripe_texture, StripeSpec};

    fn settings(window: usize, stride: usize) -> ScanSettings {
        ScanSettings {
            window,
            stride,
            ..ScanSettings::default()
        }
    }

    fn stripes(seed: u64) -> GrayImage {
        stripe_texture(&StripeSpec::default(), 200, 150, seed)
    }

    /// Energy straight from a hand-built histogram of horizontal pairs.
    fn oracle_energy(img: &GrayImage, r: Rect) -> f64 {
        let mut hist = std::collections::HashMap::<(u8, u8), u32>::new();
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w - 1 {
                *hist.entry((img.get(x, y), img.get(x + 1, y))).or_default() += 1;
            }
        }
        let n = (r.h * (r.w - 1)) as f64;
        let mut cells: Vec<_> = hist.into_iter().collect();
        cells.sort();
        cells.iter().map(|(_, c)| (*c as f64 / n).powi(2)).sum()
    }

    #[test]
    fn grid_examples() {
        assert_eq!(tile_grid(461, 512, 50, 50).unwrap().len(), 90);
        let one = tile_grid(100, 100, 100, 100).unwrap();
        assert_eq!(one.rects, vec![Rect::new(0, 0, 100, 100)]);
        let g = tile_grid(100, 100, 50, 25).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.rects[1], Rect::new(25, 0, 50, 50));
        assert_eq!(g.rects[3], Rect::new(0, 25, 50, 50));
        assert!(tile_grid(40, 100, 50, 50).is_err());
        assert!(tile_grid(100, 100, 50, 0).is_err());
    }

    #[test]
    fn constant_image_has_unit_energy() {
        let img = GrayImage::filled(120, 100, 77).unwrap();
        let out = scan_frame::<f64>(&img, &settings(50, 50)).unwrap();
        assert_eq!(out.len(), 4);
        for w in &out {
            assert_eq!(w.features.energy, 1.0);
            assert_eq!(w.features.entropy, 0.0);
        }
    }

    #[test]
    fn scan_is_the_composition() {
        let img = stripes(3);
        let s = ScanSettings {
            glcm: GlcmParams::new(2, Orientation::Deg45, 16, true).unwrap(),
            ..settings(40, 30)
        };
        let q = quantize(&img, 16).unwrap();
        let out = scan_features::<f64>(&q, &s).unwrap();
        let grid = tile_grid(img.height(), img.width(), 40, 30).unwrap();
        assert_eq!(out.len(), grid.len());
        for (w, rect) in out.iter().zip(&grid.rects) {
            let win = extract_window(&q, *rect).unwrap();
            let p: ProbabilityMatrix<f64> =
                to_probabilities(&compute_counts(&win, &s.glcm).unwrap()).unwrap();
            assert_eq!(w.rect, *rect);
            assert_eq!(w.features, extract_all(&p));
        }
    }

    #[test]
    fn scan_rejects_unquantized_input() {
        let img = GrayImage::filled(60, 60, 200).unwrap();
        let s = ScanSettings {
            glcm: GlcmParams::new(1, Orientation::Deg0, 16, false).unwrap(),
            ..settings(50, 50)
        };
        assert!(matches!(
            scan_features::<f64>(&img, &s),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(scan_frame::<f64>(&img, &s).is_ok());
    }

    #[test]
    fn blob_windows_deviate() {
        let base = stripes(11);
        let img = insert_patch(&base, Rect::new(50, 50, 50, 50), 90);
        let out = scan_frame::<f64>(&img, &settings(50, 50)).unwrap();
        let blob = out.iter().find(|w| w.rect == Rect::new(50, 50, 50, 50)).unwrap();
        for w in &out {
            assert_eq!(w.features.energy, oracle_energy(&img, w.rect));
        }
        let others: Vec<_> = out
            .iter()
            .filter(|w| w.rect != blob.rect)
            .map(|w| w.features.energy)
            .collect();
        let max_other = others.iter().copied().fold(0.0, f64::max);
        assert!(blob.features.energy > 10.0 * max_other);
    }

    #[test]
    fn trace_rows_follow_grid_order() {
        let img = GrayImage::filled(100, 60, 1).unwrap();
        let csv = trace_csv(&scan_frame::<f64>(&img, &settings(50, 25)).unwrap());
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines.len(), 1 + 3);
        assert_eq!(lines[1], "0,0,0,1,0,0,1,0,1");
        assert_eq!(lines[3], "2,50,0,1,0,0,1,0,1");
    }

    #[test]
    fn calibration_constant_frame() {
        let img = GrayImage::filled(100, 100, 40).unwrap();
        let p = calibrate::<f64>(&[img], &settings(50, 50)).unwrap();
        assert_eq!(p.mean_energy, 1.0);
        assert_eq!(p.std_energy, 0.0);
        assert_eq!(p.n_windows, 4);
    }

    #[test]
    fn calibration_matches_oracle_mean() {
        let frames = [stripes(1), stripes(2)];
        let p = calibrate::<f64>(&frames, &settings(50, 50)).unwrap();
        let mut energies = Vec::new();
        for f in &frames {
            for r in tile_grid(f.height(), f.width(), 50, 50).unwrap().rects {
                energies.push(oracle_energy(f, r));
            }
        }
        let mean = energies.iter().sum::<f64>() / energies.len() as f64;
        assert!((p.mean_energy - mean).abs() <= 1e-12);
        assert_eq!(p.n_windows, energies.len());
        let var = energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (energies.len() - 1) as f64;
        assert!((p.std_energy - var.sqrt()).abs() <= 1e-12);

        let twice = calibrate::<f64>(&[stripes(1), stripes(1)], &settings(50, 50)).unwrap();
        let once = calibrate::<f64>(&[stripes(1)], &settings(50, 50)).unwrap();
        assert!((twice.mean_energy - once.mean_energy).abs() <= 1e-15);
    }

    #[test]
    fn calibration_errors() {
        let img = GrayImage::filled(50, 50, 0).unwrap();
        assert!(matches!(
            calibrate::<f64>(&[img], &settings(50, 50)),
            Err(Error::TooFewWindows(1))
        ));
        assert!(matches!(
            calibrate::<f64>(&[], &settings(50, 50)),
            Err(Error::TooFewWindows(0))
        ));
        let small = GrayImage::filled(30, 30, 0).unwrap();
        assert!(calibrate::<f64>(&[small], &settings(50, 50)).is_err());
    }

    #[test]
    fn mixed_sizes_pool_per_window() {
        let a = GrayImage::filled(100, 50, 3).unwrap();
        let b = GrayImage::filled(50, 150, 3).unwrap();
        let p = calibrate::<f64>(&[a, b], &settings(50, 50)).unwrap();
        assert_eq!(p.n_windows, 5);
    }

    #[test]
    fn detector_rejects_mismatched_settings() {
        let p = calibrate::<f64>(&[stripes(1)], &settings(50, 50)).unwrap();
        let mut other = settings(50, 50);
        other.glcm.d = 2;
        let err = Detector::new(p.clone(), &other, Threshold::default()).unwrap_err();
        assert!(err.to_string().contains("d 1 != 2"), "{err}");
        assert!(Detector::new(p.clone(), &settings(50, 25), Threshold::default()).is_err());
        let bad_k = Threshold {
            k: 0.0,
            one_sided: false,
        };
        assert!(matches!(
            Detector::new(p, &settings(50, 50), bad_k),
            Err(Error::InvalidThreshold)
        ));
    }

    #[test]
    fn zero_sigma_profile_on_identical_frame() {
        let img = GrayImage::filled(100, 100, 9).unwrap();
        let s = settings(50, 50);
        let p = calibrate::<f64>(std::slice::from_ref(&img), &s).unwrap();
        let det = Detector::new(p, &s, Threshold::default()).unwrap();
        let rep = det.detect("flat", &img).unwrap();
        assert_eq!(rep.n_flagged, 0);
        assert!(rep.windows.iter().all(|w| w.z_score == 0.0));
        assert_eq!(rep.reference.sigma_used, 1e-9);

        let mut dented = img.clone();
        dented.set(10, 10, 10);
        let rep = det.detect("dent", &dented).unwrap();
        assert_eq!(rep.n_flagged, 1);
        assert!(rep.windows[0].flagged);
    }

    #[test]
    fn clean_frames_and_defect_patch() {
        let s = settings(50, 50);
        let clean: Vec<_> = (0..3).map(stripes).collect();
        let p = calibrate::<f64>(&clean, &s).unwrap();
        let det = Detector::new(p, &s, Threshold::default()).unwrap();
        for f in &clean {
            assert_eq!(det.detect("clean", f).unwrap().n_flagged, 0);
        }
        let patch = Rect::new(100, 50, 60, 60);
        let frame = insert_patch(&stripes(7), patch, 128);
        let rep = det.detect("defect", &frame).unwrap();
        for w in &rep.windows {
            if patch.encloses(&w.rect) {
                assert!(w.flagged && w.z_score > 3.0);
            }
            if w.rect.gap(&patch) > 50 {
                assert!(!w.flagged);
            }
        }
        assert!(rep.n_flagged >= 1);
        assert_eq!(rep.n_flagged, rep.flagged().count());
    }

    #[test]
    fn flag_set_shrinks_with_k() {
        let s = settings(50, 25);
        let p = calibrate::<f64>(&[stripes(1), stripes(2)], &s).unwrap();
        let frame = insert_patch(&stripes(5), Rect::new(60, 40, 70, 70), 30);
        let flagged_at = |k: f64, one_sided: bool| {
            let det = Detector::new(p.clone(), &s, Threshold { k, one_sided }).unwrap();
            det.detect("f", &frame)
                .unwrap()
                .windows
                .iter()
                .filter(|w| w.flagged)
                .map(|w| w.index)
                .collect::<std::collections::BTreeSet<_>>()
        };
        let ks = [0.5, 1.0, 2.0, 3.0, 10.0, 1e3, 1e9];
        for pair in ks.windows(2) {
            assert!(flagged_at(pair[1], false).is_subset(&flagged_at(pair[0], false)));
            assert!(flagged_at(pair[1], true).is_subset(&flagged_at(pair[0], true)));
        }
        assert!(flagged_at(3.0, true).is_subset(&flagged_at(3.0, false)));
    }

    #[test]
    fn gray_shift_leaves_flags_unchanged() {
        let s = settings(50, 50);
        let clean: Vec<_> = (0..2).map(stripes).collect();
        let frame = insert_patch(&stripes(9), Rect::new(40, 40, 60, 60), 100);
        let shift = |img: &GrayImage, c: u8| {
            GrayImage::new(
                img.width(),
                img.height(),
                img.pixels().iter().map(|&p| p + c).collect(),
            )
            .unwrap()
        };
        assert!(frame.max_level() <= 200);
        let run = |c: u8| {
            let cal: Vec<_> = clean.iter().map(|f| shift(f, c)).collect();
            let det = Detector::new(calibrate::<f64>(&cal, &s).unwrap(), &s, Threshold::default()).unwrap();
            det.detect("f", &shift(&frame, c)).unwrap()
        };
        let (a, b) = (run(0), run(37));
        assert_eq!(a.windows, b.windows);
    }

    #[test]
    fn annotate_outlines_flagged_windows_only() {
        let img = stripes(4);
        let s = settings(50, 50);
        let det = Detector::new(
            calibrate::<f64>(&[stripes(1), stripes(2)], &s).unwrap(),
            &s,
            Threshold::default(),
        )
        .unwrap();
        let clean = det.detect("c", &img).unwrap();
        assert_eq!(annotate(&img, &clean).unwrap(), img);

        let mut one = clean.clone();
        one.windows[2].flagged = true;
        one.n_flagged = 1;
        let out = annotate(&img, &one).unwrap();
        let expected = crate::imaging::draw_square_outline(&img, one.windows[2].rect, 255, 2).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn profile_json_shape() {
        let p = calibrate::<f64>(&[stripes(1)], &settings(50, 50)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json().unwrap()).unwrap();
        for key in [
            "version",
            "d",
            "theta",
            "g_levels",
            "symmetric",
            "window",
            "stride",
            "n_windows",
            "mean_energy",
            "std_energy",
            "feature_stats",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["theta"], 0);
        let back = CalibrationProfile::<f64>::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);

        let mut wrong = v.clone();
        wrong["version"] = 9.into();
        assert!(matches!(
            CalibrationProfile::<f64>::from_json(&wrong.to_string()),
            Err(Error::UnsupportedProfileVersion(9))
        ));
        wrong = v.clone();
        wrong["theta"] = 30.into();
        assert!(CalibrationProfile::<f64>::from_json(&wrong.to_string()).is_err());
    }

    #[test]
    fn single_precision_pipeline() {
        let s = settings(50, 50);
        let p32 = calibrate::<f32>(&[stripes(1), stripes(2)], &s).unwrap();
        let p64 = calibrate::<f64>(&[stripes(1), stripes(2)], &s).unwrap();
        assert!((f64::from(p32.mean_energy) - p64.mean_energy).abs() < 1e-5);
        let win = extract_window(&stripes(1), Rect::new(0, 0, 50, 50)).unwrap();
        let probs: ProbabilityMatrix<f32> =
            to_probabilities(&compute_counts(&win, &s.glcm).unwrap()).unwrap();
        assert!(energy(&probs) > 0.0);
    }
}
