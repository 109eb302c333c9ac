//! Discrete entropy, divergence, diversity and escort-distribution primitives.
//!
//! All logarithms are natural. Zero-probability states are excluded from
//! every power sum (`0 · ln 0 = 0`); orders `q ≤ 0` are rejected for
//! distributions with zero entries because the excluded terms would be
//! infinite.

use crate::cgf::{log_sum_exp, LogMoments};
use crate::error::{Error, Result};

/// Radius around `q = 1` inside which the Shannon / Kullback-Leibler branch
/// is used.
pub const QTOL: f64 = 1e-9;

/// Radius around `q = 1` inside which order derivatives use the cumulant
/// expansion instead of the tilted-divergence quotient.
pub(crate) const DERIVATIVE_SERIES_RADIUS: f64 = 1e-6;

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    /// Maximum deviation of the input sum from 1 that is silently renormalized.
    pub const SUM_TOL: f64 = 1e-9;

    /// Builds a distribution from probabilities that already sum to one
    /// (within [`ProbDist::SUM_TOL`]); the residual is renormalized away.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self::normalized(weights, sum))
    }

    /// Builds a distribution from arbitrary non-negative weights (counts,
    /// energies, ...) by dividing by their sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        Ok(Self::normalized(weights, sum))
    }

    fn normalized(mut weights: Vec<f64>, sum: f64) -> Self {
        if sum != 1.0 {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self { weights }
    }

    /// The equiprobable distribution `[1/n]`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// All mass on state `index`.
    pub fn degenerate(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidDistribution(format!(
                "index {index} out of range for {n} states"
            )));
        }
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of states with non-zero probability.
    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn has_zeros(&self) -> bool {
        self.support_size() < self.len()
    }

    /// Joint distribution of two independent variables, `p ⊗ r`.
    pub fn product(&self, other: &ProbDist) -> ProbDist {
        let weights = self
            .weights
            .iter()
            .flat_map(|a| other.weights.iter().map(move |b| a * b))
            .collect();
        ProbDist { weights }
    }
}

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidDistribution(format!(
            "weight {i} is {w}; weights must be finite and non-negative"
        )));
    }
    Ok(weights.iter().sum())
}

/// Deformation parameter of a Rényi-type quantity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Order(f64);

impl Order {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() {
            Ok(Self(q))
        } else {
            Err(Error::domain(format!("order must be finite, got {q}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether the order falls inside the Shannon / KL switch radius.
    pub fn is_shannon(self) -> bool {
        (self.0 - 1.0).abs() <= QTOL
    }
}

/// Two distributions over the same state space.
#[derive(Debug, Clone, Copy)]
pub struct DistPair<'a> {
    pub p1: &'a ProbDist,
    pub p2: &'a ProbDist,
}

impl<'a> DistPair<'a> {
    pub fn new(p1: &'a ProbDist, p2: &'a ProbDist) -> Result<Self> {
        if p1.len() != p2.len() {
            return Err(Error::LengthMismatch(p1.len(), p2.len()));
        }
        Ok(Self { p1, p2 })
    }

    /// Log-ratio moments under `p1`, after checking absolute continuity
    /// and the negative-order support rule.
    pub(crate) fn log_moments(&self, q: Order) -> Result<LogMoments> {
        log_ratio_moments(self.p1.weights(), self.p2.weights(), q)
    }
}

/// Shared by discrete divergences and box-level relative partition sums.
pub(crate) fn log_ratio_moments(p1: &[f64], p2: &[f64], q: Order) -> Result<LogMoments> {
    let mut w = Vec::with_capacity(p1.len());
    let mut x = Vec::with_capacity(p1.len());
    for (index, (&a, &b)) in p1.iter().zip(p2).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::AbsoluteContinuity { index, p1: a });
            }
            w.push(a);
            x.push((a / b).ln());
        } else if b > 0.0 && q.value() < 0.0 {
            return Err(Error::DegenerateSupport { q: q.value() });
        }
    }
    Ok(LogMoments::new(w, x))
}

fn entropy_moments(p: &ProbDist, q: Order) -> Result<LogMoments> {
    if q.value() <= 0.0 && p.has_zeros() {
        return Err(Error::DegenerateSupport { q: q.value() });
    }
    Ok(LogMoments::entropy(p.weights()))
}

/// Hartley information `-ln p` of an event with probability `p`.
pub fn hartley_info(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("probability must lie in (0, 1], got {p}")));
    }
    Ok(-p.ln())
}

/// Shannon entropy `-Σ p_i ln p_i`.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    // `+ 0.0` turns a negative zero into zero
    -LogMoments::entropy(p.weights()).mean() + 0.0
}

/// Rényi entropy of order `q`; Shannon entropy inside [`QTOL`] of `q = 1`.
pub fn renyi_entropy(p: &ProbDist, q: f64) -> Result<f64> {
    let q = Order::new(q)?;
    let lm = entropy_moments(p, q)?;
    if q.is_shannon() {
        return Ok(-lm.mean() + 0.0);
    }
    let t = q.value() - 1.0;
    Ok(-lm.cgf(t) / t + 0.0)
}

/// Campbell diversity index `e^{H_q}`, the effective number of states.
pub fn diversity_index(p: &ProbDist, q: f64) -> Result<f64> {
    renyi_entropy(p, q).map(f64::exp)
}

/// Kullback-Leibler divergence `Σ p1_i ln(p1_i / p2_i)`.
pub fn kl_divergence(pair: &DistPair) -> Result<f64> {
    renyi_divergence(pair, 1.0)
}

/// Rényi divergence of order `q` of `p1` from `p2`; KL inside [`QTOL`] of 1.
pub fn renyi_divergence(pair: &DistPair, q: f64) -> Result<f64> {
    let q = Order::new(q)?;
    let lm = pair.log_moments(q)?;
    if q.is_shannon() {
        return Ok(lm.mean() + 0.0);
    }
    let t = q.value() - 1.0;
    Ok(lm.cgf(t) / t + 0.0)
}

/// Relative diversity index `e^{H_q(p1‖p2)}`.
pub fn relative_diversity_index(pair: &DistPair, q: f64) -> Result<f64> {
    renyi_divergence(pair, q).map(f64::exp)
}

/// Information difference `ln n - H_q(p)`, the divergence from `[1/n]`.
pub fn information_difference(p: &ProbDist, q: f64) -> Result<f64> {
    Ok((p.len() as f64).ln() - renyi_entropy(p, q)?)
}

/// Redundancy `1 - H(p) / ln n`.
pub fn redundancy(p: &ProbDist) -> Result<f64> {
    if p.len() < 2 {
        return Err(Error::domain("redundancy needs at least two states"));
    }
    let h_max = (p.len() as f64).ln();
    Ok(1.0 - shannon_entropy(p) / h_max)
}

/// Escort (power-distorted) distribution `p_i^q / Σ_j p_j^q`.
pub fn escort_distribution(p: &ProbDist, q: f64) -> Result<ProbDist> {
    let q = Order::new(q)?;
    if q.value() == 1.0 {
        return Ok(p.clone());
    }
    if q.value() <= 0.0 && p.has_zeros() {
        return Err(Error::DegenerateSupport { q: q.value() });
    }
    let log_powers: Vec<f64> = p
        .weights()
        .iter()
        .map(|&w| if w > 0.0 { q.value() * w.ln() } else { f64::NEG_INFINITY })
        .collect();
    let log_total = log_sum_exp(&log_powers);
    if !log_total.is_finite() {
        return Err(Error::InvalidDistribution("escort power sum vanishes".into()));
    }
    let weights = log_powers.iter().map(|lp| (lp - log_total).exp()).collect();
    ProbDist::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p235() -> ProbDist {
        ProbDist::new(vec![0.2, 0.3, 0.5]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constructor_tolerance() {
        assert!(ProbDist::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(ProbDist::new(vec![0.5, 0.51]).is_err());
        assert!(ProbDist::new(vec![]).is_err());
        assert!(ProbDist::new(vec![1.5, -0.5]).is_err());
        assert!(ProbDist::new(vec![f64::NAN, 1.0]).is_err());
        let p = ProbDist::from_weights(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.weights(), &[0.25, 0.75]);
        assert!(ProbDist::from_weights(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn hartley() {
        assert_eq!(hartley_info(1.0).unwrap(), 0.0);
        assert!(close(hartley_info((-1.0f64).exp()).unwrap(), 1.0, 1e-15));
        assert!(close(hartley_info(0.5).unwrap(), std::f64::consts::LN_2, 1e-15));
        assert!(hartley_info(0.0).is_err());
        assert!(hartley_info(1.1).is_err());
    }

    #[test]
    fn renyi_entropy_examples() {
        let u = ProbDist::uniform(3).unwrap();
        for q in [-3.0, 0.0, 0.5, 1.0, 2.0, 100.0] {
            assert!(close(renyi_entropy(&u, q).unwrap(), 3f64.ln(), 1e-14), "q = {q}");
        }
        let d = ProbDist::degenerate(3, 0).unwrap();
        assert_eq!(renyi_entropy(&d, 1.0).unwrap(), 0.0);
        assert!(renyi_entropy(&d, 0.5).unwrap().abs() < 1e-15);
        assert!(matches!(
            renyi_entropy(&d, 0.0),
            Err(Error::DegenerateSupport { .. })
        ));
        // -ln 0.38
        assert!(close(renyi_entropy(&p235(), 2.0).unwrap(), 0.967_584_026_261_705_6, 1e-14));
        assert!(close(shannon_entropy(&p235()), 1.029_653_014_064_573_5, 1e-14));
        assert!(renyi_entropy(&p235(), f64::INFINITY).is_err());
    }

    #[test]
    fn shannon_switch_radius() {
        let p = p235();
        let h1 = renyi_entropy(&p, 1.0).unwrap();
        assert_eq!(renyi_entropy(&p, 1.0 + 0.5 * QTOL).unwrap(), h1);
        let just_outside = renyi_entropy(&p, 1.0 + 2.0 * QTOL).unwrap();
        assert!(close(just_outside, h1, 1e-9));
    }

    #[test]
    fn diversity_examples() {
        let d = ProbDist::degenerate(4, 2).unwrap();
        assert!(close(diversity_index(&d, 2.0).unwrap(), 1.0, 1e-15));
        let u = ProbDist::uniform(7).unwrap();
        assert!(close(diversity_index(&u, 0.3).unwrap(), 7.0, 1e-12));
        // 1 / 0.38
        assert!(close(diversity_index(&p235(), 2.0).unwrap(), 2.631_578_947_368_421, 1e-13));
    }

    #[test]
    fn divergence_examples() {
        let p = p235();
        let pair = DistPair::new(&p, &p).unwrap();
        for q in [-2.0, 0.0, 0.5, 1.0, 3.0] {
            assert_eq!(renyi_divergence(&pair, q).unwrap(), 0.0);
        }
        let a = ProbDist::new(vec![1.0, 0.0]).unwrap();
        let b = ProbDist::uniform(2).unwrap();
        let pair = DistPair::new(&a, &b).unwrap();
        assert!(close(kl_divergence(&pair).unwrap(), 2f64.ln(), 1e-15));
        assert!(close(relative_diversity_index(&pair, 1.0).unwrap(), 2.0, 1e-14));
        assert!(matches!(
            renyi_divergence(&pair, -1.0),
            Err(Error::DegenerateSupport { .. })
        ));

        let u = ProbDist::uniform(3).unwrap();
        let pair = DistPair::new(&p, &u).unwrap();
        assert!(close(kl_divergence(&pair).unwrap(), 0.068_959_274_603_536_16, 1e-14));
        assert!(close(relative_diversity_index(&pair, 2.0).unwrap(), 1.14, 1e-13));

        let rev = DistPair::new(&b, &a).unwrap();
        assert!(matches!(
            renyi_divergence(&rev, 2.0),
            Err(Error::AbsoluteContinuity { index: 1, .. })
        ));
        assert!(matches!(
            DistPair::new(&p, &a),
            Err(Error::LengthMismatch(3, 2))
        ));
    }

    #[test]
    fn information_difference_and_redundancy() {
        let u = ProbDist::uniform(5).unwrap();
        assert!(information_difference(&u, 2.0).unwrap().abs() < 1e-14);
        let d = ProbDist::degenerate(3, 1).unwrap();
        assert!(close(information_difference(&d, 1.0).unwrap(), 3f64.ln(), 1e-15));
        assert!(close(information_difference(&p235(), 1.0).unwrap(), 0.068_959_274_603_536_16, 1e-14));

        assert!(redundancy(&u).unwrap().abs() < 1e-14);
        assert!(close(redundancy(&d).unwrap(), 1.0, 1e-15));
        assert!(close(redundancy(&p235()).unwrap(), 0.062_769_436_783_870_47, 1e-14));
        assert!(redundancy(&ProbDist::uniform(1).unwrap()).is_err());
    }

    #[test]
    fn escort_examples() {
        let p = p235();
        assert_eq!(escort_distribution(&p, 1.0).unwrap(), p);
        let e0 = escort_distribution(&p, 0.0).unwrap();
        assert!(e0.weights().iter().all(|w| close(*w, 1.0 / 3.0, 1e-15)));
        let e2 = escort_distribution(&p, 2.0).unwrap();
        let expected = [0.105_263_157_894_736_84, 0.236_842_105_263_157_9, 0.657_894_736_842_105_3];
        for (a, b) in e2.weights().iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }
        let edge = ProbDist::new(vec![0.5, 0.5, 0.0]).unwrap();
        let e = escort_distribution(&edge, 7.0).unwrap();
        assert_eq!(e.weights()[2], 0.0);
        assert!(close(e.weights()[0], 0.5, 1e-15));
        assert!(escort_distribution(&edge, -1.0).is_err());
    }

    #[test]
    fn product_is_extensive() {
        let p = p235();
        let r = ProbDist::new(vec![0.6, 0.4]).unwrap();
        let pr = p.product(&r);
        for q in [0.5, 1.0, 2.0, 6.0] {
            let lhs = renyi_entropy(&pr, q).unwrap();
            let rhs = renyi_entropy(&p, q).unwrap() + renyi_entropy(&r, q).unwrap();
            assert!(close(lhs, rhs, 1e-13));
        }
    }
}
