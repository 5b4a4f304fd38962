use thiserror::Error;

use crate::imaging::{PgmError, Rect};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Pgm(#[from] PgmError),

    #[error("image dimensions {width}x{height} do not match {len} pixels")]
    InvalidDimensions { width: usize, height: usize, len: usize },

    #[error("gray level count {0} outside 2..=256")]
    InvalidLevels(u16),

    #[error("unsupported orientation {0} degrees (expected 0, 45, 90 or 135)")]
    UnsupportedOrientation(u16),

    #[error("inter-pixel distance must be at least 1")]
    InvalidDistance,

    #[error("rect {rect:?} is not inside a {width}x{height} image")]
    RectOutOfBounds { rect: Rect, width: usize, height: usize },

    #[error("outline thickness {thickness} invalid for a {w}x{h} rect")]
    InvalidThickness { thickness: usize, w: usize, h: usize },

    #[error("{width}x{height} window has no pixel pair at offset ({row_offset}, {col_offset})")]
    WindowTooSmall {
        width: usize,
        height: usize,
        row_offset: isize,
        col_offset: isize,
    },

    #[error("pixel level {level} is not below the level count {levels}")]
    LevelOutOfRange { level: u8, levels: u16 },

    #[error("co-occurrence matrix holds no pairs")]
    EmptyGlcm,

    #[error("invalid probability matrix: {0}")]
    InvalidProbabilities(String),

    #[error("window size {window} does not fit a {rows}x{cols} image")]
    WindowDoesNotFit { window: usize, rows: usize, cols: usize },

    #[error("stride must be at least 1")]
    InvalidStride,

    #[error("calibration needs at least 2 windows, got {0}")]
    TooFewWindows(usize),

    #[error("profile incompatible with run settings: {0}")]
    IncompatibleProfile(String),

    #[error("threshold multiplier must be positive and finite")]
    InvalidThreshold,

    #[error("unsupported profile version {0}")]
    UnsupportedProfileVersion(u32),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
