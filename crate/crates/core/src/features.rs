//! Texture statistics of a normalized co-occurrence matrix.
//!
//! Every function expects `P` to sum to one. Cells with zero mass are
//! skipped, which leaves each statistic unchanged.

use serde::{Deserialize, Serialize};

use crate::glcm::ProbabilityMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub energy: T,
    pub entropy: T,
    pub contrast: T,
    pub homogeneity: T,
    pub correlation: T,
    pub max_prob: T,
}

impl<T: Scalar> FeatureVector<T> {
    pub const NAMES: [&'static str; 6] = [
        "energy",
        "entropy",
        "contrast",
        "homogeneity",
        "correlation",
        "max_prob",
    ];

    pub fn as_array(&self) -> [T; 6] {
        [
            self.energy,
            self.entropy,
            self.contrast,
            self.homogeneity,
            self.correlation,
            self.max_prob,
        ]
    }
}

/// Angular second moment, Σ p².
pub fn energy<T: Scalar>(p: &ProbabilityMatrix<T>) -> T {
    p.nonzero().map(|(_, _, v)| v * v).sum()
}

/// Shannon entropy in bits.
pub fn entropy<T: Scalar>(p: &ProbabilityMatrix<T>) -> T {
    let h: T = p.nonzero().map(|(_, _, v)| v * v.log2()).sum();
    // avoids -0.0 for a point mass
    T::zero() - h
}

pub fn contrast<T: Scalar>(p: &ProbabilityMatrix<T>) -> T {
    p.nonzero()
        .map(|(i, j, v)| {
            let diff = T::from_usize_lossy(i.abs_diff(j));
            diff * diff * v
        })
        .sum()
}

/// Inverse difference moment, Σ p / (1 + (i − j)²).
pub fn homogeneity<T: Scalar>(p: &ProbabilityMatrix<T>) -> T {
    p.nonzero()
        .map(|(i, j, v)| {
            let diff = T::from_usize_lossy(i.abs_diff(j));
            v / (T::one() + diff * diff)
        })
        .sum()
}

/// Pearson correlation between the reference and neighbour levels. Returns 0
/// when either marginal has zero variance.
pub fn correlation<T: Scalar>(p: &ProbabilityMatrix<T>) -> T {
    let g = p.levels();
    let mut row_marginal = vec![T::zero(); g];
    let mut col_marginal = vec![T::zero(); g];
    for (i, j, v) in p.nonzero() {
        row_marginal[i] = row_marginal[i] + v;
        col_marginal[j] = col_marginal[j] + v;
    }
    let moments = |m: &[T]| {
        let mean: T = m
            .iter()
            .enumerate()
            .map(|(k, &v)| T::from_usize_lossy(k) * v)
            .sum();
        let var: T = m
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let dev = T::from_usize_lossy(k) - mean;
                dev * dev * v
            })
            .sum();
        (mean, var.max(T::zero()).sqrt())
    };
    let (mu_i, sigma_i) = moments(&row_marginal);
    let (mu_j, sigma_j) = moments(&col_marginal);
    let denom = sigma_i * sigma_j;
    if denom <= T::epsilon() {
        return T::zero();
    }
    let cov: T = p
        .nonzero()
        .map(|(i, j, v)| (T::from_usize_lossy(i) - mu_i) * (T::from_usize_lossy(j) - mu_j) * v)
        .sum();
    (cov / denom).max(-T::one()).min(T::one())
}

pub fn max_probability<T: Scalar>(p: &ProbabilityMatrix<T>) -> T {
    p.nonzero().map(|c| c.2).fold(T::zero(), T::max)
}

pub fn extract_all<T: Scalar>(p: &ProbabilityMatrix<T>) -> FeatureVector<T> {
    FeatureVector {
        energy: energy(p),
        entropy: entropy(p),
        contrast: contrast(p),
        homogeneity: homogeneity(p),
        correlation: correlation(p),
        max_prob: max_probability(p),
    }
}
