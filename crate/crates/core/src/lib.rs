//! Co-occurrence texture statistics and sliding-window defect detection for
//! 8-bit grayscale fabric images.
//!
//! The pipeline per frame: quantize, tile into windows, build a gray-level
//! co-occurrence matrix per window, take its energy, and compare it against
//! a reference learned from defect-free frames. Numeric code is generic over
//! [`Scalar`] (f32 or f64); the `*64` aliases below are what the CLI uses.

pub mod cost_model;
pub mod detector;
pub mod error;
pub mod features;
pub mod glcm;
pub mod imaging;
pub mod scalar;
pub mod synth;

pub use cost_model::{scan_steps, total_computations, ScanCost};
pub use detector::{
    annotate, calibrate, scan_features, scan_frame, tile_grid, trace_csv, CalibrationProfile,
    DetectionReport, Detector, ScanSettings, Threshold, WindowFeatures, WindowGrid, WindowResult,
};
pub use error::{Error, Result};
pub use features::{extract_all, FeatureVector};
pub use glcm::{compute_counts, to_probabilities, Glcm, GlcmParams, Orientation, ProbabilityMatrix};
pub use imaging::{
    draw_square_outline, extract_window, load_pgm, quantize, save_pgm, GrayImage, PgmError, Rect,
};
pub use scalar::Scalar;

pub type FeatureVector64 = FeatureVector<f64>;
pub type FeatureVector32 = FeatureVector<f32>;
pub type ProbabilityMatrix64 = ProbabilityMatrix<f64>;
pub type ProbabilityMatrix32 = ProbabilityMatrix<f32>;
pub type CalibrationProfile64 = CalibrationProfile<f64>;
pub type CalibrationProfile32 = CalibrationProfile<f32>;
pub type DetectionReport64 = DetectionReport<f64>;
pub type DetectionReport32 = DetectionReport<f32>;
pub type Detector64 = Detector<f64>;
pub type Detector32 = Detector<f32>;
