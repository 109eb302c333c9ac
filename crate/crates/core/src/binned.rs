//! Continuous distributions observed through a partition into bins.
//!
//! A density `f` on a support `I` is represented by its bin probabilities
//! `p_i = ∫_{bin i} f` and the bin widths. For equal widths `Δ` the
//! continuous Rényi entropy at unit-scale resolution is `H_q(p) + ln Δ`;
//! for unequal widths only the Shannon case is available, split into a
//! spatial term and a mean-cell-size term (`H = S + Z`).

use crate::error::{Error, Result};
use crate::info_measures::{renyi_divergence, renyi_entropy, shannon_entropy, DistPair, ProbDist};

/// Relative tolerance for treating two widths or edges as equal.
const WIDTH_RTOL: f64 = 1e-9;

/// Bin probabilities over a 1-D partition.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDensity {
    probs: ProbDist,
    /// `(left, right)` edges, one per bin.
    bins: Vec<(f64, f64)>,
    support_measure: f64,
}

/// Batty's decomposition of discrete Shannon entropy over variable cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BattyDecomposition {
    /// Spatial entropy `-Σ p_i ln(p_i / Δx_i)`.
    pub spatial: f64,
    /// `-Σ p_i ln Δx_i`; its negative is the mean spatial information content.
    pub size_term: f64,
    /// Discrete Shannon entropy `H(p) = S + Z`.
    pub entropy: f64,
}

impl BinnedDensity {
    /// Builds a density from explicit bin intervals. The support measure is
    /// the total width of the bins.
    pub fn new(probs: ProbDist, bins: Vec<(f64, f64)>) -> Result<Self> {
        if probs.len() != bins.len() {
            return Err(Error::LengthMismatch(probs.len(), bins.len()));
        }
        for (i, &(l, r)) in bins.iter().enumerate() {
            if !(l.is_finite() && r.is_finite()) || r <= l {
                return Err(Error::domain(format!(
                    "bin {i} has non-positive width ({l}, {r})"
                )));
            }
        }
        let support_measure = bins.iter().map(|(l, r)| r - l).sum();
        Ok(Self {
            probs,
            bins,
            support_measure,
        })
    }

    /// Bins laid end to end starting at `origin` with the given widths.
    pub fn from_widths(probs: ProbDist, origin: f64, widths: &[f64]) -> Result<Self> {
        let mut left = origin;
        let bins = widths
            .iter()
            .map(|w| {
                let bin = (left, left + w);
                left += w;
                bin
            })
            .collect();
        Self::new(probs, bins)
    }

    /// `probs.len()` equal-width bins covering `[lo, hi]`.
    pub fn uniform_partition(probs: ProbDist, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::domain(format!("empty support [{lo}, {hi}]")));
        }
        let n = probs.len();
        let width = (hi - lo) / n as f64;
        let bins = (0..n)
            .map(|i| {
                let l = lo + i as f64 * width;
                let r = if i + 1 == n { hi } else { lo + (i + 1) as f64 * width };
                (l, r)
            })
            .collect();
        Self::new(probs, bins)
    }

    pub fn probs(&self) -> &ProbDist {
        &self.probs
    }

    pub fn bins(&self) -> &[(f64, f64)] {
        &self.bins
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bins.iter().map(|(l, r)| r - l).collect()
    }

    /// Lebesgue measure `λ(I)` of the support.
    pub fn support_measure(&self) -> f64 {
        self.support_measure
    }

    /// The common bin width, if all bins share it.
    pub fn uniform_width(&self) -> Option<f64> {
        let mean = self.support_measure / self.bins.len() as f64;
        self.widths()
            .iter()
            .all(|w| (w - mean).abs() <= WIDTH_RTOL * mean)
            .then_some(mean)
    }

    fn same_partition(&self, other: &Self) -> bool {
        let scale = self.support_measure.max(other.support_measure);
        self.bins.len() == other.bins.len()
            && self.bins.iter().zip(&other.bins).all(|(a, b)| {
                (a.0 - b.0).abs() <= WIDTH_RTOL * scale && (a.1 - b.1).abs() <= WIDTH_RTOL * scale
            })
    }

    /// The uniform density on the same support and partition.
    pub fn uniform_reference(&self) -> Self {
        let weights = self.widths().iter().map(|w| w / self.support_measure).collect();
        Self {
            probs: ProbDist::from_weights(weights).expect("positive widths"),
            bins: self.bins.clone(),
            support_measure: self.support_measure,
        }
    }
}

/// Continuous Rényi entropy estimate `H_q(p^Δ) + ln Δ` on an equal-width
/// partition. May be negative.
pub fn binned_renyi_entropy(b: &BinnedDensity, q: f64) -> Result<f64> {
    let width = b.uniform_width().ok_or_else(|| {
        Error::domain("binned Rényi entropy needs equal bin widths; use the Batty decomposition")
    })?;
    Ok(renyi_entropy(b.probs(), q)? + width.ln())
}

/// Splits the discrete Shannon entropy into `S + Z` for cells of any size.
pub fn batty_decomposition(b: &BinnedDensity) -> BattyDecomposition {
    let (spatial, size_term) = b
        .probs
        .weights()
        .iter()
        .zip(b.widths())
        .filter(|(p, _)| **p > 0.0)
        .fold((0.0, 0.0), |(s, z), (&p, w)| {
            (s - p * (p / w).ln(), z - p * w.ln())
        });
    BattyDecomposition {
        spatial,
        size_term,
        entropy: shannon_entropy(&b.probs),
    }
}

/// Rényi divergence between two densities binned on the same partition.
pub fn binned_renyi_divergence(b1: &BinnedDensity, b2: &BinnedDensity, q: f64) -> Result<f64> {
    if !b1.same_partition(b2) {
        return Err(Error::PartitionMismatch(format!(
            "{} bins vs {} bins with differing edges",
            b1.bins.len(),
            b2.bins.len()
        )));
    }
    renyi_divergence(&DistPair::new(&b1.probs, &b2.probs)?, q)
}

/// `ln λ(I) - H_q(f)`, the divergence of `f` from the uniform density on `I`.
pub fn continuous_information_difference(b: &BinnedDensity, q: f64) -> Result<f64> {
    Ok(b.support_measure.ln() - binned_renyi_entropy(b, q)?)
}
