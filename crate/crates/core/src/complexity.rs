//! Product-type generalized complexity and relative complexity measures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info_measures::{
    self, renyi_divergence, renyi_entropy, shannon_entropy, DistPair, Order, ProbDist,
    DERIVATIVE_SERIES_RADIUS,
};

/// Default `(α, β)` axis: `[0, 10]` in steps of 0.1.
pub const DEFAULT_GRID: (f64, f64, f64) = (0.0, 10.0, 0.1);

/// Pair of deformation parameters `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderPair {
    pub alpha: f64,
    pub beta: f64,
}

impl OrderPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Order::new(alpha)?;
        Order::new(beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn swapped(self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    pub fn is_diagonal(self) -> bool {
        self.alpha == self.beta
    }
}

/// What an `(α, β)` map holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementMode {
    /// `f(α) - f(β)`.
    Raw,
    /// `(f(α) - f(β)) / (α - β)`, with the derivative `f'(α)` on the diagonal.
    Relative,
}

/// Values over an `(α, β)` grid; `None` marks cells where the measure is
/// undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityMap {
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    /// Row `i` belongs to `alpha_grid[i]`, column `j` to `beta_grid[j]`.
    pub values: Vec<Vec<Option<f64>>>,
}

impl ComplexityMap {
    /// Evaluates `cell(α, β)` on every grid cell, rows in parallel.
    pub fn build<F>(alpha_grid: &[f64], beta_grid: &[f64], cell: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Option<f64> + Sync,
    {
        if alpha_grid.is_empty() || beta_grid.is_empty() {
            return Err(Error::Grid("map grids must be non-empty".into()));
        }
        let values = alpha_grid
            .par_iter()
            .map(|&a| beta_grid.iter().map(|&b| cell(a, b)).collect())
            .collect();
        Ok(Self {
            alpha_grid: alpha_grid.to_vec(),
            beta_grid: beta_grid.to_vec(),
            values,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values.get(i)?.get(j).copied().flatten()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().flatten().filter(|v| v.is_none()).count()
    }
}

/// `min, min + step, …` up to `max` (inclusive, within a small rounding
/// allowance). Points are computed from the index so they do not drift.
pub fn order_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || max < min {
        return Err(Error::Grid(format!(
            "invalid grid min={min} max={max} step={step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let v = min + i as f64 * step;
            // snap values like 0.30000000000000004 onto the decimal grid
            (v * 1e12).round() / 1e12
        })
        .collect())
}

/// LMC complexity `H(p) · Σ (p_i - 1/n)²`.
pub fn c_lmc(p: &ProbDist) -> f64 {
    let n = p.len() as f64;
    let disequilibrium: f64 = p.weights().iter().map(|w| (w - 1.0 / n).powi(2)).sum();
    shannon_entropy(p) * disequilibrium
}

/// Disequilibrium-based exponential LMC measure, `C_{1,2}`.
pub fn c_lmc_exp(p: &ProbDist) -> Result<f64> {
    generalized_complexity(p, OrderPair { alpha: 1.0, beta: 2.0 })
}

/// `C_{α,β}(p) = e^{H_α(p) - H_β(p)}`, the diversity ratio `DI_α / DI_β`.
pub fn generalized_complexity(p: &ProbDist, ab: OrderPair) -> Result<f64> {
    if ab.is_diagonal() {
        renyi_entropy(p, ab.alpha)?;
        return Ok(1.0);
    }
    Ok((renyi_entropy(p, ab.alpha)? - renyi_entropy(p, ab.beta)?).exp())
}

/// `C_{α,β}(p1‖p2) = e^{H_α(p1‖p2) - H_β(p1‖p2)}`.
pub fn generalized_relative_complexity(pair: &DistPair, ab: OrderPair) -> Result<f64> {
    if ab.is_diagonal() {
        renyi_divergence(pair, ab.alpha)?;
        return Ok(1.0);
    }
    Ok((renyi_divergence(pair, ab.alpha)? - renyi_divergence(pair, ab.beta)?).exp())
}

/// `(H_α - H_β) / (α - β)`; never positive.
pub fn relative_increment(p: &ProbDist, ab: OrderPair) -> Result<f64> {
    if ab.is_diagonal() {
        return Err(Error::DiagonalOrder(ab.alpha));
    }
    Ok((renyi_entropy(p, ab.alpha)? - renyi_entropy(p, ab.beta)?) / (ab.alpha - ab.beta))
}

/// `(H_α(p1‖p2) - H_β(p1‖p2)) / (α - β)`; never negative for positive orders.
pub fn relative_divergence_increment(pair: &DistPair, ab: OrderPair) -> Result<f64> {
    if ab.is_diagonal() {
        return Err(Error::DiagonalOrder(ab.alpha));
    }
    Ok(
        (renyi_divergence(pair, ab.alpha)? - renyi_divergence(pair, ab.beta)?)
            / (ab.alpha - ab.beta),
    )
}

/// `dH_q/dq`, evaluated analytically as `-KL(p^{q,*} ‖ p) / (q - 1)²` (and its
/// limit `-Var_p[ln p] / 2` at `q = 1`).
pub fn entropy_derivative(p: &ProbDist, q: f64) -> Result<f64> {
    let order = Order::new(q)?;
    if order.value() <= 0.0 && p.has_zeros() {
        return Err(Error::DegenerateSupport { q });
    }
    let lm = crate::cgf::LogMoments::entropy(p.weights());
    Ok(-lm.scaled_cgf_slope(q - 1.0, DERIVATIVE_SERIES_RADIUS))
}

/// `d/dq H_q(p1‖p2)`; never negative.
pub fn divergence_derivative(pair: &DistPair, q: f64) -> Result<f64> {
    let order = Order::new(q)?;
    let lm = pair.log_moments(order)?;
    Ok(lm.scaled_cgf_slope(q - 1.0, DERIVATIVE_SERIES_RADIUS))
}

/// `C_{α,β}(p)` over the grid; undefined cells become `None`.
pub fn complexity_map(p: &ProbDist, alpha_grid: &[f64], beta_grid: &[f64]) -> Result<ComplexityMap> {
    ComplexityMap::build(alpha_grid, beta_grid, |a, b| {
        generalized_complexity(p, OrderPair { alpha: a, beta: b }).ok()
    })
}

/// `C_{α,β}(p1‖p2)` over the grid.
pub fn relative_complexity_map(
    pair: &DistPair,
    alpha_grid: &[f64],
    beta_grid: &[f64],
) -> Result<ComplexityMap> {
    ComplexityMap::build(alpha_grid, beta_grid, |a, b| {
        generalized_relative_complexity(pair, OrderPair { alpha: a, beta: b }).ok()
    })
}

/// Entropy increments `H_α - H_β` or relative increments over the grid.
pub fn entropy_increment_map(
    p: &ProbDist,
    alpha_grid: &[f64],
    beta_grid: &[f64],
    mode: IncrementMode,
) -> Result<ComplexityMap> {
    ComplexityMap::build(alpha_grid, beta_grid, |a, b| {
        let ab = OrderPair { alpha: a, beta: b };
        match mode {
            IncrementMode::Raw => {
                Some(info_measures::renyi_entropy(p, a).ok()? - renyi_entropy(p, b).ok()?)
            }
            IncrementMode::Relative if ab.is_diagonal() => entropy_derivative(p, a).ok(),
            IncrementMode::Relative => relative_increment(p, ab).ok(),
        }
    })
}

/// Divergence increments or relative increments over the grid.
pub fn divergence_increment_map(
    pair: &DistPair,
    alpha_grid: &[f64],
    beta_grid: &[f64],
    mode: IncrementMode,
) -> Result<ComplexityMap> {
    ComplexityMap::build(alpha_grid, beta_grid, |a, b| {
        let ab = OrderPair { alpha: a, beta: b };
        match mode {
            IncrementMode::Raw => {
                Some(renyi_divergence(pair, a).ok()? - renyi_divergence(pair, b).ok()?)
            }
            IncrementMode::Relative if ab.is_diagonal() => divergence_derivative(pair, a).ok(),
            IncrementMode::Relative => relative_divergence_increment(pair, ab).ok(),
        }
    })
}
