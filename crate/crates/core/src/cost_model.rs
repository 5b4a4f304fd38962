//! Abstract operation counts for a full non-overlapping window scan.
//!
//! A scan visits `floor(R/w) * floor(C/w)` positions; each position copies
//! `w²` pixels and touches all `G²` co-occurrence cells. The floored product
//! is authoritative. It only equals `R * C * G²` when `w` divides both
//! image dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::check_levels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCost {
    pub steps: u64,
    pub ops_per_window_extract: u64,
    pub ops_per_glcm: u64,
    pub total_ops: u64,
}

impl ScanCost {
    /// Total in whole units of 1e9, truncated.
    pub fn total_ops_e9(&self) -> u64 {
        self.total_ops / 1_000_000_000
    }
}

fn check_window(rows: usize, cols: usize, window: usize) -> Result<()> {
    if window == 0 || window > rows.min(cols) {
        return Err(Error::WindowDoesNotFit { window, rows, cols });
    }
    Ok(())
}

pub fn scan_steps(rows: usize, cols: usize, window: usize) -> Result<u64> {
    check_window(rows, cols, window)?;
    Ok(((rows / window) * (cols / window)) as u64)
}

pub fn total_computations(rows: usize, cols: usize, window: usize, levels: u16) -> Result<ScanCost> {
    let steps = scan_steps(rows, cols, window)?;
    check_levels(levels)?;
    let ops_per_window_extract = (window * window) as u64;
    let ops_per_glcm = u64::from(levels) * u64::from(levels);
    Ok(ScanCost {
        steps,
        ops_per_window_extract,
        ops_per_glcm,
        total_ops: steps * ops_per_window_extract * ops_per_glcm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_step_counts() {
        assert_eq!(scan_steps(461, 512, 30).unwrap(), 255);
        assert_eq!(scan_steps(461, 512, 50).unwrap(), 90);
        assert_eq!(scan_steps(461, 512, 100).unwrap(), 20);
    }

    #[test]
    fn reference_totals() {
        let rows: Vec<_> = [30, 50, 100]
            .iter()
            .map(|&w| total_computations(461, 512, w, 256).unwrap())
            .collect();
        assert_eq!(rows[0].total_ops, 15_040_512_000);
        assert_eq!(rows[1].total_ops, 14_745_600_000);
        assert_eq!(rows[2].total_ops, 13_107_200_000);
        let e9: Vec<_> = rows.iter().map(ScanCost::total_ops_e9).collect();
        assert_eq!(e9, [15, 14, 13]);
        assert!(rows[2].total_ops <= rows[1].total_ops && rows[1].total_ops <= rows[0].total_ops);
        for r in &rows {
            assert_eq!(r.total_ops, r.steps * r.ops_per_window_extract * r.ops_per_glcm);
        }
    }

    #[test]
    fn divisible_dims_collapse_to_pixel_count() {
        let c = total_computations(400, 500, 50, 256).unwrap();
        assert_eq!(c.total_ops, 400 * 500 * 256 * 256);
    }

    #[test]
    fn range_errors() {
        assert!(scan_steps(100, 100, 0).is_err());
        assert!(scan_steps(100, 99, 100).is_err());
        assert_eq!(scan_steps(100, 100, 100).unwrap(), 1);
        assert!(total_computations(100, 100, 10, 1).is_err());
        assert!(total_computations(100, 100, 10, 257).is_err());
    }
}
