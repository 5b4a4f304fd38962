//! Gray-level co-occurrence matrices.
//!
//! Orientation is measured counter-clockwise from the horizontal axis. With
//! the row axis pointing down, any angle above the horizontal therefore maps
//! to a negative row offset.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{check_levels, GrayImage};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Orientation {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [Self::Deg0, Self::Deg45, Self::Deg90, Self::Deg135];

    pub fn from_degrees(deg: u16) -> Result<Self> {
        match deg {
            0 => Ok(Self::Deg0),
            45 => Ok(Self::Deg45),
            90 => Ok(Self::Deg90),
            135 => Ok(Self::Deg135),
            other => Err(Error::UnsupportedOrientation(other)),
        }
    }

    pub fn degrees(self) -> u16 {
        match self {
            Self::Deg0 => 0,
            Self::Deg45 => 45,
            Self::Deg90 => 90,
            Self::Deg135 => 135,
        }
    }

    /// `(row_offset, col_offset)` of the neighbour at distance `d`.
    pub fn displacement(self, d: usize) -> (isize, isize) {
        let d = d as isize;
        match self {
            Self::Deg0 => (0, d),
            Self::Deg45 => (-d, d),
            Self::Deg90 => (-d, 0),
            Self::Deg135 => (-d, -d),
        }
    }
}

impl TryFrom<u16> for Orientation {
    type Error = Error;

    fn try_from(deg: u16) -> Result<Self> {
        Self::from_degrees(deg)
    }
}

impl From<Orientation> for u16 {
    fn from(o: Orientation) -> u16 {
        o.degrees()
    }
}

pub fn displacement_vector(theta_degrees: u16, d: usize) -> Result<(isize, isize)> {
    if d == 0 {
        return Err(Error::InvalidDistance);
    }
    Ok(Orientation::from_degrees(theta_degrees)?.displacement(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlcmParams {
    pub d: usize,
    pub theta: Orientation,
    pub g_levels: u16,
    pub symmetric: bool,
}

impl Default for GlcmParams {
    /// d = 1, θ = 0, G = 256, ordered pairs.
    fn default() -> Self {
        Self {
            d: 1,
            theta: Orientation::Deg0,
            g_levels: 256,
            symmetric: false,
        }
    }
}

impl GlcmParams {
    pub fn new(d: usize, theta: Orientation, g_levels: u16, symmetric: bool) -> Result<Self> {
        let p = Self {
            d,
            theta,
            g_levels,
            symmetric,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidDistance);
        }
        check_levels(self.g_levels)
    }

    pub fn displacement(&self) -> (isize, isize) {
        self.theta.displacement(self.d)
    }

    /// Closed-form pair count for a `width`×`height` window.
    pub fn pair_count(&self, width: usize, height: usize) -> u64 {
        let (dr, dc) = self.displacement();
        let rows = height.saturating_sub(dr.unsigned_abs()) as u64;
        let cols = width.saturating_sub(dc.unsigned_abs()) as u64;
        let n = rows * cols;
        if self.symmetric {
            2 * n
        } else {
            n
        }
    }
}

/// Dense G×G co-occurrence counts, row index = reference level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    levels: usize,
    counts: Vec<u32>,
    total_pairs: u64,
}

impl Glcm {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.levels + j]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    /// Row-major CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.levels * self.levels * 2);
        for row in self.counts.chunks(self.levels) {
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Counts ordered level pairs `(level(p), level(p + displacement))` over all
/// positions where both pixels lie in the window. Symmetric mode also adds
/// each pair transposed.
pub fn compute_counts(window: &GrayImage, params: &GlcmParams) -> Result<Glcm> {
    params.validate()?;
    let levels = params.g_levels as usize;
    let max = window.max_level();
    if max as usize >= levels {
        return Err(Error::LevelOutOfRange {
            level: max,
            levels: params.g_levels,
        });
    }

    let (w, h) = (window.width(), window.height());
    let (dr, dc) = params.displacement();
    if dr.unsigned_abs() >= h || dc.unsigned_abs() >= w {
        return Err(Error::WindowTooSmall {
            width: w,
            height: h,
            row_offset: dr,
            col_offset: dc,
        });
    }

    // source rows/cols whose neighbour stays in bounds
    let row_lo = (-dr).max(0) as usize;
    let row_hi = (h as isize - dr.max(0)) as usize;
    let col_lo = (-dc).max(0) as usize;
    let col_hi = (w as isize - dc.max(0)) as usize;
    let span = col_hi - col_lo;

    let mut counts = vec![0u32; levels * levels];
    for r in row_lo..row_hi {
        let src = &window.row(r)[col_lo..col_hi];
        let nr = (r as isize + dr) as usize;
        let nc = (col_lo as isize + dc) as usize;
        let dst = &window.row(nr)[nc..nc + span];
        for (&a, &b) in src.iter().zip(dst) {
            counts[a as usize * levels + b as usize] += 1;
        }
    }

    let mut total_pairs = ((row_hi - row_lo) * span) as u64;
    if params.symmetric {
        for i in 0..levels {
            for j in i + 1..levels {
                let s = counts[i * levels + j] + counts[j * levels + i];
                counts[i * levels + j] = s;
                counts[j * levels + i] = s;
            }
            counts[i * levels + i] *= 2;
        }
        total_pairs *= 2;
    }

    Ok(Glcm {
        levels,
        counts,
        total_pairs,
    })
}

/// Joint probability matrix over level pairs, row-major G×G. The nonzero
/// cells are also kept as a row-major list, since a window holds far fewer
/// distinct pairs than G² at G = 256.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    levels: usize,
    data: Vec<T>,
    cells: Vec<(usize, usize, T)>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    /// Wraps a dense row-major matrix. Entries must be finite and
    /// non-negative; normalization is the caller's responsibility.
    pub fn from_dense(levels: usize, data: Vec<T>) -> Result<Self> {
        if levels == 0 || data.len() != levels * levels {
            return Err(Error::InvalidProbabilities(format!(
                "{} entries for {levels} levels",
                data.len()
            )));
        }
        if data.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::InvalidProbabilities(
                "entries must be finite and non-negative".into(),
            ));
        }
        let cells = data
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > T::zero())
            .map(|(k, &p)| (k / levels, k % levels, p))
            .collect();
        Ok(Self { levels, data, cells })
    }

    /// Sparse constructor; repeated cells accumulate.
    pub fn from_cells(levels: usize, cells: &[(usize, usize, T)]) -> Result<Self> {
        let mut data = vec![T::zero(); levels * levels];
        for &(i, j, p) in cells {
            if i >= levels || j >= levels {
                return Err(Error::InvalidProbabilities(format!(
                    "cell ({i}, {j}) outside {levels} levels"
                )));
            }
            data[i * levels + j] = data[i * levels + j] + p;
        }
        Self::from_dense(levels, data)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.levels + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `(i, j, p)` for every cell with p > 0, in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.cells.iter().copied()
    }

    pub fn sum(&self) -> T {
        self.cells.iter().map(|c| c.2).sum()
    }
}

pub fn to_probabilities<T: Scalar>(g: &Glcm) -> Result<ProbabilityMatrix<T>> {
    if g.total_pairs == 0 {
        return Err(Error::EmptyGlcm);
    }
    let total = T::from_f64_lossy(g.total_pairs as f64);
    let mut data = vec![T::zero(); g.counts.len()];
    let mut cells = Vec::new();
    for (k, &c) in g.counts.iter().enumerate() {
        if c != 0 {
            let p = T::from_f64_lossy(f64::from(c)) / total;
            data[k] = p;
            cells.push((k / g.levels, k % g.levels, p));
        }
    }
    Ok(ProbabilityMatrix {
        levels: g.levels,
        data,
        cells,
    })
}
