//! Rényi-type information measures, generalized complexity, and
//! box-counting generalized (relative) dimensions.
//!
//! The modules build on each other:
//!
//! * [`info_measures`]: entropy, divergence, diversity and escort
//!   distributions over a [`ProbDist`];
//! * [`complexity`]: two-order complexity `C_{α,β}` and its relative form,
//!   increments, order derivatives and `(α, β)` maps;
//! * [`binned`]: continuous densities seen through a partition;
//! * [`simplex`]: fields over the ternary simplex;
//! * [`multifractal`]: `D_q` and `D_q(μ₁‖μ₂)` from box counting, with
//!   cascade oracles;
//! * [`catalog`]: event catalogs reduced to frequency and energy box counts;
//! * [`cli`]: the `infodim` command-line front end.

// `!(x > y)` comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cgf;
pub mod binned;
pub mod catalog;
pub mod cli;
pub mod complexity;
pub mod error;
pub mod info_measures;
pub mod io;
pub mod multifractal;
pub mod simplex;

pub use complexity::{ComplexityMap, IncrementMode, OrderPair};
pub use error::{Error, Result};
pub use info_measures::{DistPair, Order, ProbDist};
pub use multifractal::{DimensionCurve, PartitionDistribution};
