//! Run configuration: CLI flags over an optional flat JSON file over the
//! built-in operating point.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use texscan::detector::{DEFAULT_K, DEFAULT_WINDOW};
use texscan::{GlcmParams, Orientation, ScanSettings, Threshold};

pub const DEFAULT_BUDGET_MS: f64 = 500.0;

/// Every field optional so a file or the command line may set any subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub d: Option<usize>,
    pub theta: Option<u16>,
    pub levels: Option<u16>,
    pub symmetric: Option<bool>,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub k: Option<f64>,
    pub one_sided: Option<bool>,
    pub budget_ms: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub area_cm2: Option<f64>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            d: self.d.or(lower.d),
            theta: self.theta.or(lower.theta),
            levels: self.levels.or(lower.levels),
            symmetric: self.symmetric.or(lower.symmetric),
            window: self.window.or(lower.window),
            stride: self.stride.or(lower.stride),
            k: self.k.or(lower.k),
            one_sided: self.one_sided.or(lower.one_sided),
            budget_ms: self.budget_ms.or(lower.budget_ms),
            out_dir: self.out_dir.or(lower.out_dir),
            area_cm2: self.area_cm2.or(lower.area_cm2),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let window = self.window.unwrap_or(DEFAULT_WINDOW);
        let cfg = RunConfig {
            d: self.d.unwrap_or(1),
            theta: self.theta.unwrap_or(0),
            levels: self.levels.unwrap_or(256),
            symmetric: self.symmetric.unwrap_or(false),
            window,
            stride: self.stride.unwrap_or(window),
            k: self.k.unwrap_or(DEFAULT_K),
            one_sided: self.one_sided.unwrap_or(false),
            budget_ms: self.budget_ms.unwrap_or(DEFAULT_BUDGET_MS),
            out_dir: self.out_dir.unwrap_or_else(|| PathBuf::from(".")),
            area_cm2: self.area_cm2,
        };
        cfg.settings()?;
        cfg.threshold()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub d: usize,
    pub theta: u16,
    pub levels: u16,
    pub symmetric: bool,
    pub window: usize,
    pub stride: usize,
    pub k: f64,
    pub one_sided: bool,
    pub budget_ms: f64,
    pub out_dir: PathBuf,
    pub area_cm2: Option<f64>,
}

impl RunConfig {
    pub fn settings(&self) -> Result<ScanSettings> {
        let glcm = GlcmParams::new(
            self.d,
            Orientation::from_degrees(self.theta)?,
            self.levels,
            self.symmetric,
        )?;
        let s = ScanSettings {
            glcm,
            window: self.window,
            stride: self.stride,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn threshold(&self) -> Result<Threshold<f64>> {
        anyhow::ensure!(
            self.k > 0.0 && self.k.is_finite(),
            "--k must be positive, got {}",
            self.k
        );
        Ok(Threshold {
            k: self.k,
            one_sided: self.one_sided,
        })
    }
}

/// Parameter flags shared by every pipeline subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Inter-pixel distance
    #[arg(long)]
    pub d: Option<usize>,
    /// Orientation in degrees: 0, 45, 90 or 135
    #[arg(long)]
    pub theta: Option<u16>,
    /// Quantized gray levels (2..=256)
    #[arg(long)]
    pub levels: Option<u16>,
    /// Count unordered pairs
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub symmetric: Option<bool>,
    /// Window size in pixels
    #[arg(long)]
    pub window: Option<usize>,
    /// Step between windows (defaults to the window size)
    #[arg(long)]
    pub stride: Option<usize>,
    /// z-score threshold multiplier
    #[arg(long)]
    pub k: Option<f64>,
    /// Flag only energy peaks above the reference
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub one_sided: Option<bool>,
    /// Per-frame latency budget for `stream`
    #[arg(long)]
    pub budget_ms: Option<f64>,
    /// Directory for reports and annotated frames
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Fabric area covered by one frame, recorded in reports
    #[arg(long)]
    pub area_cm2: Option<f64>,
    /// Flat JSON config file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-window feature extraction
    #[arg(long)]
    pub threads: Option<usize>,
}

impl ParamArgs {
    fn as_partial(&self) -> PartialConfig {
        PartialConfig {
            d: self.d,
            theta: self.theta,
            levels: self.levels,
            symmetric: self.symmetric,
            window: self.window,
            stride: self.stride,
            k: self.k,
            one_sided: self.one_sided,
            budget_ms: self.budget_ms,
            out_dir: self.out_dir.clone(),
            area_cm2: self.area_cm2,
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        self.as_partial().over(file).resolve()
    }
}
