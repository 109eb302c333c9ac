//! Box-counting estimates of generalized Rényi dimensions `D_q` and
//! generalized relative Rényi dimensions `D_q(μ₁‖μ₂)`.
//!
//! For each box width `ε` a measure is reduced to a [`PartitionDistribution`]
//! over its non-null boxes. The limit `ε → 0` in the definitions is realized
//! as an ordinary-least-squares slope over the supplied scales:
//!
//! * ordinary: `(1/(q-1)) ln Σ μ^q` (Shannon numerator `Σ μ ln μ` at `q = 1`)
//!   regressed on `ln ε`;
//! * relative: `(1/(q-1)) ln Σ μ₁^q μ₂^{1-q}` (numerator `Σ μ₁ ln(μ₁/μ₂)` at
//!   `q = 1`) regressed on `ln(1/ε)`, so the curve is non-decreasing in `q`
//!   and non-negative at `q = 1`.

use serde::{Deserialize, Serialize};

use crate::complexity::{ComplexityMap, IncrementMode, OrderPair};
use crate::error::{Error, Result};
use crate::info_measures::{log_ratio_moments, renyi_entropy, Order, ProbDist, QTOL};

/// Default q axis: `-10` to `10` in steps of `0.25`.
pub const DEFAULT_Q_GRID: (f64, f64, f64) = (-10.0, 10.0, 0.25);

/// Minimum number of scales for a slope fit.
pub const MIN_SCALES: usize = 3;

/// Masses of a measure over its non-null boxes of width `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionDistribution {
    epsilon: f64,
    /// Lattice index of each occupied box, strictly increasing.
    boxes: Vec<u64>,
    masses: ProbDist,
}

impl PartitionDistribution {
    /// `weights[i]` is the (unnormalized) content of box `boxes[i]`; every
    /// weight must be strictly positive.
    pub fn new(epsilon: f64, boxes: Vec<u64>, weights: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("box width must be positive, got {epsilon}")));
        }
        if boxes.len() != weights.len() {
            return Err(Error::LengthMismatch(boxes.len(), weights.len()));
        }
        if boxes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::PartitionMismatch("box indices must be strictly increasing".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "box weights must be strictly positive, got {w}"
            )));
        }
        Ok(Self {
            epsilon,
            boxes,
            masses: ProbDist::from_weights(weights)?,
        })
    }

    /// Boxes numbered `0..weights.len()`.
    pub fn contiguous(epsilon: f64, weights: Vec<f64>) -> Result<Self> {
        let boxes = (0..weights.len() as u64).collect();
        Self::new(epsilon, boxes, weights)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn boxes(&self) -> &[u64] {
        &self.boxes
    }

    pub fn masses(&self) -> &ProbDist {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }
}

/// `(ln ε, statistic)` pairs ordered from coarse to fine.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSeries {
    entries: Vec<(f64, f64)>,
}

impl ScaleSeries {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.len() < MIN_SCALES {
            return Err(Error::TooFewScales {
                needed: MIN_SCALES,
                got: entries.len(),
            });
        }
        if entries.windows(2).any(|w| !(w[1].0 < w[0].0)) {
            return Err(Error::Grid("ln ε must be strictly decreasing".into()));
        }
        if let Some(e) = entries.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::domain(format!("non-finite scale entry {e:?}")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Least-squares line `statistic = slope · ln ε + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Dimension estimates over a q axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionCurve {
    pub q_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub r_squared: Vec<f64>,
}

impl DimensionCurve {
    pub fn new(q_grid: Vec<f64>, values: Vec<f64>, r_squared: Vec<f64>) -> Result<Self> {
        if q_grid.len() != values.len() || q_grid.len() != r_squared.len() {
            return Err(Error::LengthMismatch(q_grid.len(), values.len()));
        }
        Ok(Self {
            q_grid,
            values,
            r_squared,
        })
    }

    pub fn len(&self) -> usize {
        self.q_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_grid.is_empty()
    }

    /// Value at `q`: exact grid hit, else linear interpolation; `None`
    /// outside the grid.
    pub fn value_at(&self, q: f64) -> Option<f64> {
        let grid = &self.q_grid;
        let hit = |a: f64| (a - q).abs() <= 1e-9 * q.abs().max(1.0);
        if let Some(i) = grid.iter().position(|&a| hit(a)) {
            return Some(self.values[i]);
        }
        let i = grid.windows(2).position(|w| w[0] < q && q < w[1])?;
        let (q0, q1) = (grid[i], grid[i + 1]);
        let t = (q - q0) / (q1 - q0);
        Some(self.values[i] + t * (self.values[i + 1] - self.values[i]))
    }

    /// Largest rise `D_{q_{i+1}} - D_{q_i}` between consecutive orders.
    pub fn max_rise(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest drop `D_{q_i} - D_{q_{i+1}}` between consecutive orders.
    pub fn max_drop(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same curve with values of opposite sign, for display.
    pub fn negated(&self) -> Self {
        Self {
            q_grid: self.q_grid.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            r_squared: self.r_squared.clone(),
        }
    }

    pub fn min_r_squared(&self) -> f64 {
        self.r_squared.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `(1/(q-1)) ln Σ m_k^q`, or `Σ m_k ln m_k` at `q = 1`; this is `-H_q(P_ε)`.
pub fn partition_sum_log(pd: &PartitionDistribution, q: f64) -> Result<f64> {
    Ok(-renyi_entropy(pd.masses(), q)?)
}

/// `(1/(q-1)) ln Σ m1_k^q m2_k^{1-q}` over the boxes occupied by `pd2`, or
/// `Σ m1_k ln(m1_k / m2_k)` at `q = 1`; this is the Rényi divergence of the
/// partition distributions.
pub fn relative_partition_sum_log(
    pd1: &PartitionDistribution,
    pd2: &PartitionDistribution,
    q: f64,
) -> Result<f64> {
    let order = Order::new(q)?;
    let (m1, m2) = align(pd1, pd2)?;
    let lm = log_ratio_moments(&m1, &m2, order)?;
    if order.is_shannon() {
        return Ok(lm.mean());
    }
    let t = q - 1.0;
    Ok(lm.cgf(t) / t)
}

/// Masses of both partitions on the boxes of `pd2`.
fn align(pd1: &PartitionDistribution, pd2: &PartitionDistribution) -> Result<(Vec<f64>, Vec<f64>)> {
    let scale = pd1.epsilon.max(pd2.epsilon);
    if (pd1.epsilon - pd2.epsilon).abs() > 1e-12 * scale {
        return Err(Error::PartitionMismatch(format!(
            "box widths differ: {} vs {}",
            pd1.epsilon, pd2.epsilon
        )));
    }
    let w1 = pd1.masses.weights();
    let mut m1 = vec![0.0; pd2.len()];
    let mut i = 0;
    for (j, b) in pd2.boxes.iter().enumerate() {
        if i < pd1.len() && pd1.boxes[i] < *b {
            return Err(Error::AbsoluteContinuity {
                index: pd1.boxes[i] as usize,
                p1: w1[i],
            });
        }
        if i < pd1.len() && pd1.boxes[i] == *b {
            m1[j] = w1[i];
            i += 1;
        }
    }
    if i < pd1.len() {
        return Err(Error::AbsoluteContinuity {
            index: pd1.boxes[i] as usize,
            p1: w1[i],
        });
    }
    Ok((m1, pd2.masses.weights().to_vec()))
}

/// OLS slope and coefficient of determination of the series. A series that
/// is fitted without residual reports `R² = 1`, including a flat one.
pub fn fit_dimension(series: &ScaleSeries) -> Result<LinearFit> {
    let n = series.entries.len() as f64;
    let mean_x = series.entries.iter().map(|e| e.0).sum::<f64>() / n;
    let mean_y = series.entries.iter().map(|e| e.1).sum::<f64>() / n;
    let (sxx, sxy, syy) = series.entries.iter().fold((0.0, 0.0, 0.0), |(sxx, sxy, syy), (x, y)| {
        let (dx, dy) = (x - mean_x, y - mean_y);
        (sxx + dx * dx, sxy + dx * dy, syy + dy * dy)
    });
    if !(sxx > 0.0) {
        return Err(Error::DegenerateAbscissa);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = series
        .entries
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Sorts partitions from coarse to fine and checks the scale count.
fn ordered_scales(pds: &[PartitionDistribution]) -> Result<Vec<&PartitionDistribution>> {
    if pds.len() < MIN_SCALES {
        return Err(Error::TooFewScales {
            needed: MIN_SCALES,
            got: pds.len(),
        });
    }
    let mut sorted: Vec<_> = pds.iter().collect();
    sorted.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    Ok(sorted)
}

fn series_for<F>(scales: &[&PartitionDistribution], stat: F) -> Result<ScaleSeries>
where
    F: Fn(&PartitionDistribution) -> Result<f64>,
{
    let entries = scales
        .iter()
        .map(|pd| Ok((pd.epsilon.ln(), stat(pd)?)))
        .collect::<Result<Vec<_>>>()?;
    ScaleSeries::new(entries)
}

/// `D_q` for every `q` in the grid, fitted over all supplied scales.
pub fn generalized_dimensions(pds: &[PartitionDistribution], q_grid: &[f64]) -> Result<DimensionCurve> {
    let scales = ordered_scales(pds)?;
    let fits = q_grid
        .iter()
        .map(|&q| fit_dimension(&series_for(&scales, |pd| partition_sum_log(pd, q))?))
        .collect::<Result<Vec<_>>>()?;
    curve_from_fits(q_grid, &fits, 1.0)
}

fn curve_from_fits(q_grid: &[f64], fits: &[LinearFit], sign: f64) -> Result<DimensionCurve> {
    DimensionCurve::new(
        q_grid.to_vec(),
        fits.iter().map(|f| sign * f.slope).collect(),
        fits.iter().map(|f| f.r_squared).collect(),
    )
}

/// Pairs partitions of two measures scale by scale (coarse to fine).
fn paired_scales<'a>(
    pds1: &'a [PartitionDistribution],
    pds2: &'a [PartitionDistribution],
) -> Result<Vec<(&'a PartitionDistribution, &'a PartitionDistribution)>> {
    if pds1.len() != pds2.len() {
        return Err(Error::PartitionMismatch(format!(
            "{} scales vs {} scales",
            pds1.len(),
            pds2.len()
        )));
    }
    let a = ordered_scales(pds1)?;
    let b = ordered_scales(pds2)?;
    Ok(a.into_iter().zip(b).collect())
}

fn relative_series<F>(
    pairs: &[(&PartitionDistribution, &PartitionDistribution)],
    stat: F,
) -> Result<ScaleSeries>
where
    F: Fn(&PartitionDistribution, &PartitionDistribution) -> Result<f64>,
{
    let entries = pairs
        .iter()
        .map(|(a, b)| Ok((a.epsilon.ln(), stat(a, b)?)))
        .collect::<Result<Vec<_>>>()?;
    ScaleSeries::new(entries)
}

/// `D_q(μ₁‖μ₂)` for every `q` in the grid; `pds1[i]` and `pds2[i]` must
/// share a box lattice.
pub fn generalized_relative_dimensions(
    pds1: &[PartitionDistribution],
    pds2: &[PartitionDistribution],
    q_grid: &[f64],
) -> Result<DimensionCurve> {
    let pairs = paired_scales(pds1, pds2)?;
    let fits = q_grid
        .iter()
        .map(|&q| {
            fit_dimension(&relative_series(&pairs, |a, b| {
                relative_partition_sum_log(a, b, q)
            })?)
        })
        .collect::<Result<Vec<_>>>()?;
    // regressed on ln ε; the relative dimension is the slope on ln(1/ε)
    curve_from_fits(q_grid, &fits, -1.0)
}

/// Pointwise mean of `D_q(μ₁‖μ₂)` and `D_q(μ₂‖μ₁)`; `R²` is the smaller of the two.
pub fn symmetrized_relative_dimensions(
    curve_pq: &DimensionCurve,
    curve_qp: &DimensionCurve,
) -> Result<DimensionCurve> {
    if curve_pq.q_grid != curve_qp.q_grid {
        return Err(Error::Grid("curves have different q grids".into()));
    }
    DimensionCurve::new(
        curve_pq.q_grid.clone(),
        curve_pq
            .values
            .iter()
            .zip(&curve_qp.values)
            .map(|(a, b)| (a + b) / 2.0)
            .collect(),
        curve_pq
            .r_squared
            .iter()
            .zip(&curve_qp.r_squared)
            .map(|(a, b)| a.min(*b))
            .collect(),
    )
}

/// `dD/dq` on a uniformly spaced grid: central differences inside, second
/// order one-sided differences at both ends.
pub fn dimension_derivative(curve: &DimensionCurve) -> Result<DimensionCurve> {
    let n = curve.len();
    if n < 3 {
        return Err(Error::Grid(format!("derivative needs at least 3 orders, got {n}")));
    }
    let q = &curve.q_grid;
    let h = (q[n - 1] - q[0]) / (n - 1) as f64;
    if !(h > 0.0) || q.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
        return Err(Error::Grid("derivative needs a uniformly spaced q grid".into()));
    }
    let v = &curve.values;
    let values = (0..n)
        .map(|i| match i {
            0 => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
            i if i == n - 1 => (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h),
            i => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect();
    DimensionCurve::new(q.clone(), values, curve.r_squared.clone())
}

/// `D_α - D_β` or `(D_α - D_β)/(α - β)` over the grid. Orders between grid
/// points are linearly interpolated; orders outside the curve are missing.
/// In relative mode the diagonal holds `D'_α`.
pub fn dimension_increment_map(
    curve: &DimensionCurve,
    alpha_grid: &[f64],
    beta_grid: &[f64],
    mode: IncrementMode,
) -> Result<ComplexityMap> {
    let derivative = match mode {
        IncrementMode::Relative => Some(dimension_derivative(curve)?),
        IncrementMode::Raw => None,
    };
    ComplexityMap::build(alpha_grid, beta_grid, |a, b| {
        let da = curve.value_at(a)?;
        let db = curve.value_at(b)?;
        match (&derivative, a == b) {
            (None, _) => Some(da - db),
            (Some(d), true) => d.value_at(a),
            (Some(_), false) => Some((da - db) / (a - b)),
        }
    })
}

/// Fitted scaling exponent of `C_{α,β}` against `ε` next to the matching
/// dimension increment `D_β - D_α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkCheck {
    pub estimated_exponent: f64,
    pub curve_increment: f64,
    pub r_squared: f64,
}

/// Regresses `ln C_{α,β}(P_ε)` on `ln ε` and compares with `D_β - D_α`.
pub fn complexity_dimension_link_check(pds: &[PartitionDistribution], ab: OrderPair) -> Result<LinkCheck> {
    let scales = ordered_scales(pds)?;
    let series = series_for(&scales, |pd| {
        // ln C = H_α - H_β
        Ok(partition_sum_log(pd, ab.beta)? - partition_sum_log(pd, ab.alpha)?)
    })?;
    let fit = fit_dimension(&series)?;
    let curve = generalized_dimensions(pds, &[ab.alpha, ab.beta])?;
    Ok(LinkCheck {
        estimated_exponent: fit.slope,
        curve_increment: curve.values[1] - curve.values[0],
        r_squared: fit.r_squared,
    })
}

/// Relative counterpart: `ln C_{α,β}(P₁,ε‖P₂,ε)` on `ln ε` against
/// `D_β(μ₁‖μ₂) - D_α(μ₁‖μ₂)`.
pub fn relative_complexity_dimension_link_check(
    pds1: &[PartitionDistribution],
    pds2: &[PartitionDistribution],
    ab: OrderPair,
) -> Result<LinkCheck> {
    let pairs = paired_scales(pds1, pds2)?;
    let series = relative_series(&pairs, |a, b| {
        Ok(relative_partition_sum_log(a, b, ab.alpha)? - relative_partition_sum_log(a, b, ab.beta)?)
    })?;
    let fit = fit_dimension(&series)?;
    let curve = generalized_relative_dimensions(pds1, pds2, &[ab.alpha, ab.beta])?;
    Ok(LinkCheck {
        estimated_exponent: fit.slope,
        curve_increment: curve.values[1] - curve.values[0],
        r_squared: fit.r_squared,
    })
}

/// Multiplicative cascade: each box splits into `weights.len()` equal
/// sub-boxes receiving the corresponding share of its mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    weights: ProbDist,
    depth: u32,
}

impl CascadeSpec {
    pub fn new(weights: ProbDist, depth: u32) -> Result<Self> {
        if weights.len() < 2 || weights.has_zeros() {
            return Err(Error::InvalidDistribution(
                "cascade needs at least two strictly positive weights".into(),
            ));
        }
        if depth == 0 {
            return Err(Error::domain("cascade depth must be positive"));
        }
        Ok(Self { weights, depth })
    }

    /// Binomial cascade `(m0, 1 - m0)`.
    pub fn binomial(m0: f64, depth: u32) -> Result<Self> {
        Self::new(ProbDist::new(vec![m0, 1.0 - m0])?, depth)
    }

    pub fn weights(&self) -> &ProbDist {
        &self.weights
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn branching(&self) -> usize {
        self.weights.len()
    }
}

/// Box masses of the cascade at `level`, with `ε = b^{-level}` on `[0, 1]`.
pub fn cascade_partition(spec: &CascadeSpec, level: u32) -> Result<PartitionDistribution> {
    if level == 0 || level > spec.depth {
        return Err(Error::domain(format!(
            "level {level} outside 1..={}",
            spec.depth
        )));
    }
    let mut masses = vec![1.0];
    for _ in 0..level {
        masses = masses
            .iter()
            .flat_map(|m| spec.weights.weights().iter().map(move |w| m * w))
            .collect();
    }
    let epsilon = (spec.branching() as f64).powi(-(level as i32));
    PartitionDistribution::contiguous(epsilon, masses)
}

/// Closed form `log_b(Σ m^q) / (1 - q)`, and `-Σ m log_b m` at `q = 1`.
pub fn cascade_dimension_closed_form(spec: &CascadeSpec, q: f64) -> f64 {
    let base = spec.branching() as f64;
    let m = spec.weights.weights();
    if (q - 1.0).abs() <= QTOL {
        -m.iter().map(|w| w * w.log(base)).sum::<f64>()
    } else {
        m.iter().map(|w| w.powf(q)).sum::<f64>().log(base) / (1.0 - q)
    }
}

/// Closed form `log_b(Σ m1^q m2^{1-q}) / (q - 1)` for two cascades with the
/// same branching, and `Σ m1 log_b(m1/m2)` at `q = 1`.
pub fn cascade_relative_dimension_closed_form(a: &CascadeSpec, b: &CascadeSpec, q: f64) -> Result<f64> {
    if a.branching() != b.branching() {
        return Err(Error::LengthMismatch(a.branching(), b.branching()));
    }
    let base = a.branching() as f64;
    let pairs = a.weights.weights().iter().zip(b.weights.weights());
    Ok(if (q - 1.0).abs() <= QTOL {
        pairs.map(|(x, y)| x * (x / y).log(base)).sum()
    } else {
        pairs.map(|(x, y)| x.powf(q) * y.powf(1.0 - q)).sum::<f64>().log(base) / (q - 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn cascade_levels(m0: f64, levels: std::ops::RangeInclusive<u32>) -> Vec<PartitionDistribution> {
        let spec = CascadeSpec::binomial(m0, *levels.end()).unwrap();
        levels.map(|l| cascade_partition(&spec, l).unwrap()).collect()
    }

    #[test]
    fn partition_sum_examples() {
        let single = PartitionDistribution::contiguous(0.5, vec![3.0]).unwrap();
        for q in [-2.0, 0.0, 1.0, 4.0] {
            assert_eq!(partition_sum_log(&single, q).unwrap(), 0.0);
        }
        let n = 8;
        let equal = PartitionDistribution::contiguous(0.125, vec![1.0; n]).unwrap();
        assert!(close(partition_sum_log(&equal, 2.0).unwrap(), -(n as f64).ln(), 1e-14));
        let pd = PartitionDistribution::contiguous(0.5, vec![0.3, 0.7]).unwrap();
        assert!(close(partition_sum_log(&pd, 2.0).unwrap(), -0.544_727_175_441_672, 1e-14));
    }

    #[test]
    fn partition_validation() {
        assert!(PartitionDistribution::contiguous(0.0, vec![1.0]).is_err());
        assert!(PartitionDistribution::contiguous(0.5, vec![1.0, 0.0]).is_err());
        assert!(PartitionDistribution::new(0.5, vec![1, 1], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn fit_examples() {
        let xs = [-1.0, -2.0, -3.0, -4.0];
        let s = ScaleSeries::new(xs.iter().map(|&x| (x, x)).collect()).unwrap();
        let f = fit_dimension(&s).unwrap();
        assert!(close(f.slope, 1.0, 1e-15));
        assert_eq!(f.r_squared, 1.0);
        let s = ScaleSeries::new(xs.iter().map(|&x| (x, 0.7 * x + 3.0)).collect()).unwrap();
        let f = fit_dimension(&s).unwrap();
        assert!(close(f.slope, 0.7, 1e-14));
        assert!(close(f.intercept, 3.0, 1e-14));
        assert!(close(f.r_squared, 1.0, 1e-14));

        assert!(matches!(
            ScaleSeries::new(vec![(-1.0, 0.0), (-2.0, 0.0)]),
            Err(Error::TooFewScales { .. })
        ));
        assert!(ScaleSeries::new(vec![(-1.0, 0.0), (-1.0, 0.0), (-2.0, 0.0)]).is_err());
    }

    #[test]
    fn cascade_partition_examples() {
        let spec = CascadeSpec::binomial(0.3, 4).unwrap();
        let l1 = cascade_partition(&spec, 1).unwrap();
        assert_eq!(l1.epsilon(), 0.5);
        assert!(close(l1.masses().weights()[0], 0.3, 1e-16));
        let l2 = cascade_partition(&spec, 2).unwrap();
        for (a, b) in l2.masses().weights().iter().zip([0.09, 0.21, 0.21, 0.49]) {
            assert!(close(*a, b, 1e-16));
        }
        let fair = CascadeSpec::binomial(0.5, 6).unwrap();
        let l6 = cascade_partition(&fair, 6).unwrap();
        assert_eq!(l6.len(), 64);
        assert!(l6.masses().weights().iter().all(|&m| m == 1.0 / 64.0));
        assert!(cascade_partition(&spec, 5).is_err());
        assert!(CascadeSpec::binomial(0.0, 3).is_err());
    }

    #[test]
    fn closed_forms() {
        let fair = CascadeSpec::binomial(0.5, 3).unwrap();
        for q in [-3.0, 0.0, 1.0, 2.0] {
            assert!(close(cascade_dimension_closed_form(&fair, q), 1.0, 1e-15));
        }
        let spec = CascadeSpec::binomial(0.3, 3).unwrap();
        assert!(close(cascade_dimension_closed_form(&spec, 1.0), 0.881_290_899_230_692_6, 1e-15));
        assert!(close(cascade_dimension_closed_form(&spec, 2.0), 0.785_875_194_647_152_6, 1e-15));
        let other = CascadeSpec::binomial(0.4, 3).unwrap();
        assert!(close(
            cascade_relative_dimension_closed_form(&spec, &other, 2.0).unwrap(),
            0.058_893_689_053_568_51,
            1e-15
        ));
        assert!(close(
            cascade_relative_dimension_closed_form(&spec, &other, 1.0).unwrap(),
            0.031_163_445_151_860_4,
            1e-15
        ));
    }

    #[test]
    fn dimension_examples() {
        let uniform: Vec<_> = (1..=12)
            .map(|j| PartitionDistribution::contiguous(2f64.powi(-j), vec![1.0; 1 << j]).unwrap())
            .collect();
        let curve = generalized_dimensions(&uniform, &[-3.0, 0.0, 1.0, 2.0, 5.0]).unwrap();
        assert!(curve.values.iter().all(|d| close(*d, 1.0, 1e-10)));

        let pds = cascade_levels(0.3, 1..=10);
        let curve = generalized_dimensions(&pds, &[0.0, 2.0]).unwrap();
        assert!(close(curve.values[0], 1.0, 1e-10));
        assert!(close(curve.values[1], 0.785_875_194_647_152_6, 1e-10));
        assert!(generalized_dimensions(&pds[..2], &[1.0]).is_err());
    }

    #[test]
    fn relative_partition_examples() {
        let a = PartitionDistribution::contiguous(0.5, vec![0.3, 0.7]).unwrap();
        let b = PartitionDistribution::contiguous(0.5, vec![0.4, 0.6]).unwrap();
        for q in [-1.0, 0.5, 1.0, 2.0] {
            assert_eq!(relative_partition_sum_log(&a, &a, q).unwrap(), 0.0);
        }
        assert!(close(relative_partition_sum_log(&a, &b, 2.0).unwrap(), 0.040_821_994_520_255_13, 1e-15));
        assert!(close(relative_partition_sum_log(&a, &b, 1.0).unwrap(), 0.021_600_854_143_546_53, 1e-15));

        let coarse = PartitionDistribution::contiguous(1.0, vec![1.0]).unwrap();
        assert!(matches!(
            relative_partition_sum_log(&a, &coarse, 2.0),
            Err(Error::PartitionMismatch(_))
        ));
        let sparse = PartitionDistribution::new(0.5, vec![1], vec![1.0]).unwrap();
        assert!(matches!(
            relative_partition_sum_log(&a, &sparse, 2.0),
            Err(Error::AbsoluteContinuity { index: 0, .. })
        ));
        // μ₁ may vanish where μ₂ does not
        let d = relative_partition_sum_log(&sparse, &a, 1.0).unwrap();
        assert!(close(d, (1.0f64 / 0.7).ln(), 1e-15));
        assert!(relative_partition_sum_log(&sparse, &a, -1.0).is_err());
    }

    #[test]
    fn relative_dimension_examples() {
        let a = cascade_levels(0.3, 1..=10);
        let b = cascade_levels(0.4, 1..=10);
        let grid = [-2.0, 1.0, 2.0];
        let zero = generalized_relative_dimensions(&a, &a, &grid).unwrap();
        assert!(zero.values.iter().all(|v| v.abs() < 1e-12));
        let curve = generalized_relative_dimensions(&a, &b, &grid).unwrap();
        assert!(close(curve.values[1], 0.031_163_445_151_860_4, 1e-10));
        assert!(close(curve.values[2], 0.058_893_689_053_568_51, 1e-10));
        assert!(generalized_relative_dimensions(&a, &b[1..], &grid).is_err());
    }

    #[test]
    fn symmetrization() {
        let a = cascade_levels(0.3, 1..=8);
        let b = cascade_levels(0.4, 1..=8);
        let grid = [0.5, 2.0];
        let ab = generalized_relative_dimensions(&a, &b, &grid).unwrap();
        let ba = generalized_relative_dimensions(&b, &a, &grid).unwrap();
        let sym = symmetrized_relative_dimensions(&ab, &ba).unwrap();
        assert!(close(sym.values[1], 0.063_003_942_456_052_74, 1e-10));
        assert_eq!(symmetrized_relative_dimensions(&ab, &ab).unwrap(), ab);
        let other = generalized_relative_dimensions(&a, &b, &[1.0, 2.0]).unwrap();
        assert!(symmetrized_relative_dimensions(&ab, &other).is_err());
    }

    #[test]
    fn derivative_examples() {
        let flat = DimensionCurve::new(vec![0.0, 0.5, 1.0, 1.5], vec![1.0; 4], vec![1.0; 4]).unwrap();
        assert!(dimension_derivative(&flat).unwrap().values.iter().all(|v| *v == 0.0));
        let uneven = DimensionCurve::new(vec![0.0, 0.5, 2.0], vec![1.0; 3], vec![1.0; 3]).unwrap();
        assert!(dimension_derivative(&uneven).is_err());

        // analytic d/dq of log2(m0^q + m1^q)/(1 - q) at q = 2
        let analytic = -0.081_620_439_196_221_38;
        let spec = CascadeSpec::binomial(0.3, 1).unwrap();
        for h in [0.25, 0.01] {
            let q: Vec<f64> = (0..=8).map(|i| 2.0 + (i as f64 - 4.0) * h).collect();
            let v = q.iter().map(|&q| cascade_dimension_closed_form(&spec, q)).collect();
            let d = dimension_derivative(&DimensionCurve::new(q, v, vec![1.0; 9]).unwrap()).unwrap();
            assert!(close(d.values[4], analytic, 2.0 * h * h), "h = {h}");
        }
    }

    #[test]
    fn increment_map_examples() {
        let grid = [0.0, 1.0, 2.0];
        let mono = DimensionCurve::new(grid.to_vec(), vec![1.0; 3], vec![1.0; 3]).unwrap();
        let m = dimension_increment_map(&mono, &grid, &grid, IncrementMode::Relative).unwrap();
        assert!(m.values.iter().flatten().all(|v| *v == Some(0.0)));

        let spec = CascadeSpec::binomial(0.3, 1).unwrap();
        let q: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let v = q.iter().map(|&q| cascade_dimension_closed_form(&spec, q)).collect();
        let curve = DimensionCurve::new(q, v, vec![1.0; 9]).unwrap();
        let raw = dimension_increment_map(&curve, &[0.0], &[2.0, 3.0], IncrementMode::Raw).unwrap();
        assert!(close(raw.get(0, 0).unwrap(), 0.214_124_805_352_847_4, 1e-15));
        assert!(raw.get(0, 1).is_none());

        let rel = dimension_increment_map(&curve, &[0.5, 1.0], &[0.5, 1.0], IncrementMode::Relative).unwrap();
        let deriv = dimension_derivative(&curve).unwrap();
        assert_eq!(rel.get(0, 0), deriv.value_at(0.5));
        assert!(close(
            rel.get(0, 1).unwrap(),
            (curve.value_at(0.5).unwrap() - curve.value_at(1.0).unwrap()) / -0.5,
            1e-15
        ));
        // between grid points the curve is interpolated
        let mid = dimension_increment_map(&curve, &[0.1], &[0.0], IncrementMode::Raw).unwrap();
        let expected = 0.4 * curve.values[1] + 0.6 * curve.values[0] - curve.values[0];
        assert!(close(mid.get(0, 0).unwrap(), expected, 1e-15));
    }

    #[test]
    fn link_checks() {
        let flat: Vec<_> = (1..=6)
            .map(|j| PartitionDistribution::contiguous(2f64.powi(-j), vec![1.0; 1 << j]).unwrap())
            .collect();
        let lc = complexity_dimension_link_check(&flat, OrderPair::new(1.0, 2.0).unwrap()).unwrap();
        assert!(lc.estimated_exponent.abs() < 1e-12 && lc.curve_increment.abs() < 1e-12);

        let a = cascade_levels(0.3, 4..=12);
        let lc = complexity_dimension_link_check(&a, OrderPair::new(1.0, 2.0).unwrap()).unwrap();
        assert!(close(lc.estimated_exponent, -0.095_415_704_583_540_04, 1e-9));
        assert!(close(lc.estimated_exponent, lc.curve_increment, 1e-12));

        let b = cascade_levels(0.4, 4..=12);
        let lc = relative_complexity_dimension_link_check(&a, &b, OrderPair::new(1.0, 2.0).unwrap()).unwrap();
        assert!(close(lc.estimated_exponent, 0.027_730_243_901_708_11, 1e-9));
        assert!(close(lc.estimated_exponent, lc.curve_increment, 1e-12));
    }
}
