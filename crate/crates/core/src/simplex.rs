//! Measures evaluated over the ternary probability simplex.

use rayon::prelude::*;

use crate::complexity::{
    c_lmc, entropy_derivative, generalized_complexity, generalized_relative_complexity, OrderPair,
};
use crate::error::{Error, Result};
use crate::info_measures::{
    diversity_index, escort_distribution, information_difference, renyi_entropy, DistPair, ProbDist,
};

/// Grid resolution used when none is given.
pub const DEFAULT_RESOLUTION: u32 = 200;

/// Names accepted by [`FieldMeasure::from_name`].
pub const MEASURE_NAMES: &[&str] = &[
    "renyi_entropy",
    "shannon",
    "diversity_index",
    "information_difference",
    "c_lmc",
    "generalized_complexity",
    "generalized_relative_complexity",
    "entropy_derivative",
];

/// Barycentric lattice `(i/R, j/R, k/R)`, `i + j + k = R`, in lexicographic
/// order of `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexGrid {
    resolution: u32,
    points: Vec<[u32; 3]>,
}

impl SimplexGrid {
    pub fn new(resolution: u32) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Grid("simplex resolution must be at least 1".into()));
        }
        let r = resolution;
        let points = (0..=r)
            .flat_map(|i| (0..=r - i).map(move |j| [i, j, r - i - j]))
            .collect();
        Ok(Self { resolution, points })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integer lattice coordinates.
    pub fn lattice(&self) -> &[[u32; 3]] {
        &self.points
    }

    pub fn coords(&self, index: usize) -> [f64; 3] {
        let r = self.resolution as f64;
        self.points[index].map(|c| c as f64 / r)
    }

    pub fn dist(&self, index: usize) -> ProbDist {
        ProbDist::from_weights(self.points[index].map(f64::from).to_vec())
            .expect("lattice points are non-negative and sum to R > 0")
    }

    /// Position of a lattice point, if it belongs to the grid.
    pub fn index_of(&self, point: [u32; 3]) -> Option<usize> {
        self.points.binary_search(&point).ok()
    }
}

/// A measure that can be drawn as a field over the simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldMeasure {
    RenyiEntropy { q: f64 },
    DiversityIndex { q: f64 },
    InformationDifference { q: f64 },
    CLmc,
    GeneralizedComplexity(OrderPair),
    GeneralizedRelativeComplexity(OrderPair),
    EntropyDerivative { q: f64 },
}

impl FieldMeasure {
    /// Looks a measure up by name. `q` feeds single-order measures and
    /// `(alpha, beta)` the two-order ones; `shannon` is Rényi entropy at 1.
    pub fn from_name(name: &str, q: f64, alpha: f64, beta: f64) -> Result<Self> {
        let pair = || OrderPair::new(alpha, beta);
        Ok(match name {
            "renyi_entropy" => Self::RenyiEntropy { q },
            "shannon" => Self::RenyiEntropy { q: 1.0 },
            "diversity_index" => Self::DiversityIndex { q },
            "information_difference" => Self::InformationDifference { q },
            "c_lmc" => Self::CLmc,
            "generalized_complexity" => Self::GeneralizedComplexity(pair()?),
            "generalized_relative_complexity" => Self::GeneralizedRelativeComplexity(pair()?),
            "entropy_derivative" => Self::EntropyDerivative { q },
            _ => {
                return Err(Error::UnknownMeasure {
                    name: name.to_string(),
                    valid: MEASURE_NAMES.join(", "),
                })
            }
        })
    }

    pub fn is_relative(&self) -> bool {
        matches!(self, Self::GeneralizedRelativeComplexity(_))
    }

    fn name(&self) -> &'static str {
        match self {
            Self::RenyiEntropy { .. } => "renyi_entropy",
            Self::DiversityIndex { .. } => "diversity_index",
            Self::InformationDifference { .. } => "information_difference",
            Self::CLmc => "c_lmc",
            Self::GeneralizedComplexity(_) => "generalized_complexity",
            Self::GeneralizedRelativeComplexity(_) => "generalized_relative_complexity",
            Self::EntropyDerivative { .. } => "entropy_derivative",
        }
    }
}

/// Which argument of a relative measure the grid point fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceRole {
    /// Field of `M(p ‖ ref)` over `p`.
    #[default]
    Second,
    /// Field of `M(ref ‖ p)` over `p`.
    First,
}

/// A field over the simplex; `None` where the measure is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldResult {
    pub grid: SimplexGrid,
    pub values: Vec<Option<f64>>,
}

impl FieldResult {
    pub fn value_at(&self, point: [u32; 3]) -> Option<f64> {
        self.values[self.grid.index_of(point)?]
    }
}

pub fn simplex_grid(resolution: u32) -> Result<SimplexGrid> {
    SimplexGrid::new(resolution)
}

/// Evaluates `measure` at every grid point, with the grid point as the first
/// argument of relative measures.
pub fn evaluate_field(
    grid: &SimplexGrid,
    measure: &FieldMeasure,
    reference: Option<&ProbDist>,
) -> Result<FieldResult> {
    evaluate_field_with_role(grid, measure, reference, ReferenceRole::Second)
}

pub fn evaluate_field_with_role(
    grid: &SimplexGrid,
    measure: &FieldMeasure,
    reference: Option<&ProbDist>,
    role: ReferenceRole,
) -> Result<FieldResult> {
    let reference = match (measure.is_relative(), reference) {
        (true, None) => return Err(Error::MissingReference(measure.name().into())),
        (true, Some(r)) if r.len() != 3 => return Err(Error::LengthMismatch(r.len(), 3)),
        (_, r) => r,
    };
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.dist(idx);
            evaluate_point(&p, measure, reference, role).ok()
        })
        .collect();
    Ok(FieldResult {
        grid: grid.clone(),
        values,
    })
}

fn evaluate_point(
    p: &ProbDist,
    measure: &FieldMeasure,
    reference: Option<&ProbDist>,
    role: ReferenceRole,
) -> Result<f64> {
    match *measure {
        FieldMeasure::RenyiEntropy { q } => renyi_entropy(p, q),
        FieldMeasure::DiversityIndex { q } => diversity_index(p, q),
        FieldMeasure::InformationDifference { q } => information_difference(p, q),
        FieldMeasure::CLmc => Ok(c_lmc(p)),
        FieldMeasure::GeneralizedComplexity(ab) => generalized_complexity(p, ab),
        FieldMeasure::EntropyDerivative { q } => entropy_derivative(p, q),
        FieldMeasure::GeneralizedRelativeComplexity(ab) => {
            let r = reference.ok_or_else(|| Error::MissingReference(measure.name().into()))?;
            let pair = match role {
                ReferenceRole::Second => DistPair::new(p, r)?,
                ReferenceRole::First => DistPair::new(r, p)?,
            };
            generalized_relative_complexity(&pair, ab)
        }
    }
}

/// Escort distributions `p0^{q,*}` along an order schedule that starts at 1
/// and moves monotonically away from it.
pub fn distortion_path(p0: &ProbDist, schedule: &[f64]) -> Result<Vec<ProbDist>> {
    if schedule.first() != Some(&1.0) {
        return Err(Error::Grid("distortion schedule must start at q = 1".into()));
    }
    let increasing = schedule.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = schedule.windows(2).all(|w| w[1] <= w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Grid("distortion schedule must be monotone".into()));
    }
    schedule.iter().map(|&q| escort_distribution(p0, q)).collect()
}
