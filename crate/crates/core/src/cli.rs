//! The `infodim` command line.
//!
//! Three subcommands share `--out`, `--format` and `--config`:
//!
//! * `measures`: a report of scalar measures for distribution files;
//! * `simplex`: a measure field over the ternary simplex;
//! * `mfa`: generalized (relative) dimension curves, their derivatives and
//!   relative-increment maps for each phase of an event catalog.
//!
//! A `--config` file is a JSON object whose keys are the long flag names
//! with underscores (`q_min`, `energy_exponent`, ...). Flags given on the
//! command line override the file. Relative paths resolve against the
//! working directory.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binned::{
    batty_decomposition, binned_renyi_divergence, binned_renyi_entropy,
    continuous_information_difference, BinnedDensity,
};
use crate::catalog::{
    dyadic_partitions, parse_catalog, parse_time, split_phases, BoxingOptions, CatalogFormat,
    EventCatalog, Phase, TimeFormat, TimeWindow, Weighting, DEFAULT_ENERGY_EXPONENT, DEFAULT_LEVELS,
};
use crate::complexity::{
    c_lmc, c_lmc_exp, divergence_derivative, entropy_derivative, generalized_complexity,
    generalized_relative_complexity, order_grid, relative_divergence_increment,
    relative_increment, IncrementMode, OrderPair,
};
use crate::error::Error;
use crate::info_measures::{
    diversity_index, information_difference, kl_divergence, redundancy, relative_diversity_index,
    renyi_divergence, renyi_entropy, shannon_entropy, DistPair, ProbDist,
};
use crate::io::{self, OutputFormat};
use crate::multifractal::{
    dimension_derivative, dimension_increment_map, generalized_dimensions,
    generalized_relative_dimensions, symmetrized_relative_dimensions, DimensionCurve,
    DEFAULT_Q_GRID, MIN_SCALES,
};
use crate::simplex::{
    evaluate_field_with_role, simplex_grid, FieldMeasure, ReferenceRole, DEFAULT_RESOLUTION,
};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "infodim", version, about = "Rényi information, complexity and multifractal measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scalar measures of discrete or binned distributions.
    Measures(MeasuresArgs),
    /// A measure field over the ternary simplex.
    Simplex(SimplexArgs),
    /// Generalized dimensions of an event catalog, phase by phase.
    Mfa(MfaArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasuresArgs {
    /// Distribution file: weights one per line or comma separated.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Reference distribution for relative measures.
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: Option<PathBuf>,
    /// Binned density file with rows `left,right,probability`.
    #[arg(long)]
    pub binned: Option<PathBuf>,
    /// Reference binned density on the same partition.
    #[arg(long)]
    pub binned_ref: Option<PathBuf>,
    /// Measures to report (repeatable or comma separated).
    #[arg(long = "measure", value_delimiter = ',')]
    #[serde(rename = "measure")]
    pub measures: Vec<String>,
    /// Order for single-order measures [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Divide non-negative weights by their sum instead of requiring a sum of 1.
    #[arg(long)]
    pub normalize: bool,
    /// Report order derivatives with the sign flipped.
    #[arg(long)]
    pub negate_derivatives: bool,
    /// Output directory; the report goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleArg {
    /// Field of `M(p ‖ ref)`.
    #[default]
    Second,
    /// Field of `M(ref ‖ p)`.
    First,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplexArgs {
    #[arg(long)]
    pub measure: Option<String>,
    /// Lattice resolution R; the grid has (R+1)(R+2)/2 points [default: 200].
    #[arg(long)]
    pub resolution: Option<u32>,
    /// Order for single-order measures [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Reference distribution `p1,p2,p3` for relative measures.
    #[arg(long)]
    pub reference: Option<String>,
    /// Which argument of the relative measure the grid point fills.
    #[arg(long, value_enum)]
    pub reference_role: Option<RoleArg>,
    #[arg(long)]
    pub negate_derivatives: bool,
    /// Output directory; the field goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeFormatArg {
    #[default]
    Auto,
    Epoch,
    Iso,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfaArgs {
    /// CSV catalog with `time` and `magnitude` columns.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub time_format: Option<TimeFormatArg>,
    /// Phase cut points `t1,t2,...` (epoch seconds or ISO-8601).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phases: Vec<Timestamp>,
    /// Analysis window `t0,t1` closing the first and last phase [default:
    /// each phase's data span].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Vec<Timestamp>,
    #[arg(long, allow_negative_numbers = true)]
    pub q_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q_max: Option<f64>,
    #[arg(long)]
    pub q_step: Option<f64>,
    /// Dyadic levels `jmin:jmax`; level j uses boxes of width span·2^-j [default: 3:11].
    #[arg(long)]
    pub scales: Option<LevelRange>,
    /// Also compute relative dimensions between event counts and energy.
    #[arg(long)]
    pub energy: bool,
    /// Exponent b in the event energy 10^(b·M) [default: 1.5].
    #[arg(long, allow_negative_numbers = true)]
    pub energy_exponent: Option<f64>,
    /// Boxes with fewer events are dropped [default: 1].
    #[arg(long)]
    pub min_occupancy: Option<usize>,
    /// Flag any curve whose fits fall below this R² as a numeric failure.
    #[arg(long)]
    pub min_r2: Option<f64>,
    /// Order grid of the increment maps [default: the q grid].
    #[arg(long, allow_negative_numbers = true)]
    pub ab_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub ab_max: Option<f64>,
    #[arg(long)]
    pub ab_step: Option<f64>,
    /// Write derivative curves with the sign flipped.
    #[arg(long)]
    pub negate_derivatives: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// A time given as epoch seconds or ISO-8601.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "RawTime")]
pub struct Timestamp(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTime {
    Number(f64),
    Text(String),
}

impl TryFrom<RawTime> for Timestamp {
    type Error = String;

    fn try_from(raw: RawTime) -> Result<Self, String> {
        match raw {
            RawTime::Number(t) if t.is_finite() => Ok(Timestamp(t)),
            RawTime::Number(t) => Err(format!("invalid time {t}")),
            RawTime::Text(s) => s.parse(),
        }
    }
}

impl FromStr for Timestamp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_time(s, TimeFormat::Auto)
            .map(Timestamp)
            .ok_or_else(|| format!("invalid time '{s}'"))
    }
}

/// Inclusive range of dyadic levels written `jmin:jmax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "String")]
pub struct LevelRange {
    pub min: u32,
    pub max: u32,
}

impl TryFrom<String> for LevelRange {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid scale window '{s}', expected jmin:jmax");
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let min = a.trim().parse().map_err(|_| bad())?;
        let max = b.trim().parse().map_err(|_| bad())?;
        if max < min || (max - min + 1) < MIN_SCALES as u32 {
            return Err(format!("scale window '{s}' needs at least {MIN_SCALES} levels"));
        }
        Ok(Self { min, max })
    }
}

/// A diagnostic with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownMeasure { .. } | Error::MissingReference(_) => EXIT_USAGE,
            ref e if !e.is_data_error() => EXIT_NUMERIC,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Measures(a) => with_config(a, |a| a.config.clone(), merge_measures).and_then(run_measures),
        Command::Simplex(a) => with_config(a, |a| a.config.clone(), merge_simplex).and_then(run_simplex),
        Command::Mfa(a) => with_config(a, |a| a.config.clone(), merge_mfa).and_then(run_mfa),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn with_config<A: for<'de> Deserialize<'de>>(
    flags: A,
    path: impl Fn(&A) -> Option<PathBuf>,
    merge: impl Fn(A, A) -> A,
) -> CliResult<A> {
    let Some(path) = path(&flags) else {
        return Ok(flags);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
    let file: A = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
    Ok(merge(flags, file))
}

fn merge_measures(f: MeasuresArgs, c: MeasuresArgs) -> MeasuresArgs {
    MeasuresArgs {
        dist: f.dist.or(c.dist),
        reference: f.reference.or(c.reference),
        binned: f.binned.or(c.binned),
        binned_ref: f.binned_ref.or(c.binned_ref),
        measures: if f.measures.is_empty() { c.measures } else { f.measures },
        q: f.q.or(c.q),
        alpha: f.alpha.or(c.alpha),
        beta: f.beta.or(c.beta),
        normalize: f.normalize || c.normalize,
        negate_derivatives: f.negate_derivatives || c.negate_derivatives,
        out: f.out.or(c.out),
        format: f.format.or(c.format),
        config: f.config,
    }
}

fn merge_simplex(f: SimplexArgs, c: SimplexArgs) -> SimplexArgs {
    SimplexArgs {
        measure: f.measure.or(c.measure),
        resolution: f.resolution.or(c.resolution),
        q: f.q.or(c.q),
        alpha: f.alpha.or(c.alpha),
        beta: f.beta.or(c.beta),
        reference: f.reference.or(c.reference),
        reference_role: f.reference_role.or(c.reference_role),
        negate_derivatives: f.negate_derivatives || c.negate_derivatives,
        out: f.out.or(c.out),
        format: f.format.or(c.format),
        config: f.config,
    }
}

fn merge_mfa(f: MfaArgs, c: MfaArgs) -> MfaArgs {
    let list = |a: Vec<Timestamp>, b: Vec<Timestamp>| if a.is_empty() { b } else { a };
    MfaArgs {
        catalog: f.catalog.or(c.catalog),
        time_format: f.time_format.or(c.time_format),
        phases: list(f.phases, c.phases),
        window: list(f.window, c.window),
        q_min: f.q_min.or(c.q_min),
        q_max: f.q_max.or(c.q_max),
        q_step: f.q_step.or(c.q_step),
        scales: f.scales.or(c.scales),
        energy: f.energy || c.energy,
        energy_exponent: f.energy_exponent.or(c.energy_exponent),
        min_occupancy: f.min_occupancy.or(c.min_occupancy),
        min_r2: f.min_r2.or(c.min_r2),
        ab_min: f.ab_min.or(c.ab_min),
        ab_max: f.ab_max.or(c.ab_max),
        ab_step: f.ab_step.or(c.ab_step),
        negate_derivatives: f.negate_derivatives || c.negate_derivatives,
        out: f.out.or(c.out),
        format: f.format.or(c.format),
        config: f.config,
    }
}

/// Writes `contents` to `dir/name` atomically, or to stdout without a directory.
fn emit(dir: Option<&Path>, name: &str, contents: &str) -> CliResult<()> {
    match dir {
        Some(dir) => Ok(io::write_atomic(&dir.join(name), contents)?),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn prepare_out_dir(dir: Option<&Path>) -> CliResult<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}

fn csv_text<R: Serialize>(rows: &[R]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
}

fn table<R: Serialize>(rows: &[R], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv_text(rows),
        OutputFormat::Json => io::to_json(rows),
    }
}


/// Names accepted by `measures --measure`.
pub const REPORT_MEASURES: &[&str] = &[
    "renyi_entropy",
    "shannon_entropy",
    "diversity_index",
    "information_difference",
    "redundancy",
    "c_lmc",
    "c_lmc_exp",
    "generalized_complexity",
    "relative_increment",
    "entropy_derivative",
    "kl_divergence",
    "renyi_divergence",
    "relative_diversity_index",
    "generalized_relative_complexity",
    "relative_divergence_increment",
    "divergence_derivative",
    "binned_renyi_entropy",
    "batty_decomposition",
    "continuous_information_difference",
    "binned_renyi_divergence",
];

fn canonical_measure(name: &str) -> CliResult<&'static str> {
    let name = match name.trim() {
        "entropy" => "renyi_entropy",
        "shannon" => "shannon_entropy",
        "kl" => "kl_divergence",
        "divergence" => "renyi_divergence",
        other => other,
    };
    REPORT_MEASURES
        .iter()
        .copied()
        .find(|m| *m == name)
        .ok_or_else(|| Failure::usage(format!("unknown measure '{name}' (valid: {})", REPORT_MEASURES.join(", "))))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ReportRow {
    measure: &'static str,
    q: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    value: f64,
}

struct MeasureInputs {
    dist: Option<ProbDist>,
    reference: Option<ProbDist>,
    binned: Option<BinnedDensity>,
    binned_ref: Option<BinnedDensity>,
}

fn load<T>(path: &Option<PathBuf>, parse: impl Fn(&str) -> crate::Result<T>) -> CliResult<Option<T>> {
    path.as_ref()
        .map(|p| {
            let text = io::read_to_string(p)?;
            parse(&text).map_err(|e| Failure::data(format!("{}: {e}", p.display())))
        })
        .transpose()
}

fn run_measures(a: MeasuresArgs) -> CliResult<i32> {
    if a.measures.is_empty() {
        return Err(Failure::usage(format!(
            "no --measure given (valid: {})",
            REPORT_MEASURES.join(", ")
        )));
    }
    let names = a
        .measures
        .iter()
        .map(|m| canonical_measure(m))
        .collect::<CliResult<Vec<_>>>()?;
    let inputs = MeasureInputs {
        dist: load(&a.dist, |t| io::parse_distribution(t, a.normalize))?,
        reference: load(&a.reference, |t| io::parse_distribution(t, a.normalize))?,
        binned: load(&a.binned, io::parse_binned_density)?,
        binned_ref: load(&a.binned_ref, io::parse_binned_density)?,
    };
    let mut rows = Vec::new();
    for name in names {
        rows.extend(report_measure(name, &a, &inputs)?);
    }
    let format = a.format.unwrap_or_default();
    prepare_out_dir(a.out.as_deref())?;
    emit(a.out.as_deref(), &format!("measures.{}", format.extension()), &table(&rows, format))?;
    Ok(EXIT_SUCCESS)
}

fn report_measure(name: &'static str, a: &MeasuresArgs, inp: &MeasureInputs) -> CliResult<Vec<ReportRow>> {
    let need = |x: Option<f64>, flag: &str| {
        x.ok_or_else(|| Failure::usage(format!("measure '{name}' needs --{flag}")))
    };
    let q = a.q.unwrap_or(1.0);
    let dist = || {
        inp.dist
            .as_ref()
            .ok_or_else(|| Failure::usage(format!("measure '{name}' needs --dist")))
    };
    let reference = || {
        inp.reference
            .as_ref()
            .ok_or_else(|| Failure::usage(format!("measure '{name}' needs --ref")))
    };
    let binned = || {
        inp.binned
            .as_ref()
            .ok_or_else(|| Failure::usage(format!("measure '{name}' needs --binned")))
    };
    let pair = || -> CliResult<(&ProbDist, &ProbDist)> { Ok((dist()?, reference()?)) };
    let orders = || -> CliResult<OrderPair> {
        Ok(OrderPair::new(need(a.alpha, "alpha")?, need(a.beta, "beta")?)?)
    };
    let sign = if a.negate_derivatives { -1.0 } else { 1.0 };
    let at_q = |value: f64| ReportRow { measure: name, q: Some(q), alpha: None, beta: None, value };
    let plain = |value: f64| ReportRow { measure: name, q: None, alpha: None, beta: None, value };
    let at_ab = |ab: OrderPair, value: f64| ReportRow {
        measure: name,
        q: None,
        alpha: Some(ab.alpha),
        beta: Some(ab.beta),
        value,
    };
    let row = match name {
        "renyi_entropy" => at_q(renyi_entropy(dist()?, q)?),
        "shannon_entropy" => plain(shannon_entropy(dist()?)),
        "diversity_index" => at_q(diversity_index(dist()?, q)?),
        "information_difference" => at_q(information_difference(dist()?, q)?),
        "redundancy" => plain(redundancy(dist()?)?),
        "c_lmc" => plain(c_lmc(dist()?)),
        "c_lmc_exp" => plain(c_lmc_exp(dist()?)?),
        "generalized_complexity" => {
            let ab = orders()?;
            at_ab(ab, generalized_complexity(dist()?, ab)?)
        }
        "relative_increment" => {
            let ab = orders()?;
            at_ab(ab, relative_increment(dist()?, ab)?)
        }
        "entropy_derivative" => at_q(sign * entropy_derivative(dist()?, q)?),
        "kl_divergence" => {
            let (p1, p2) = pair()?;
            plain(kl_divergence(&DistPair::new(p1, p2)?)?)
        }
        "renyi_divergence" => {
            let (p1, p2) = pair()?;
            at_q(renyi_divergence(&DistPair::new(p1, p2)?, q)?)
        }
        "relative_diversity_index" => {
            let (p1, p2) = pair()?;
            at_q(relative_diversity_index(&DistPair::new(p1, p2)?, q)?)
        }
        "generalized_relative_complexity" => {
            let (p1, p2) = pair()?;
            let ab = orders()?;
            at_ab(ab, generalized_relative_complexity(&DistPair::new(p1, p2)?, ab)?)
        }
        "relative_divergence_increment" => {
            let (p1, p2) = pair()?;
            let ab = orders()?;
            at_ab(ab, relative_divergence_increment(&DistPair::new(p1, p2)?, ab)?)
        }
        "divergence_derivative" => {
            let (p1, p2) = pair()?;
            at_q(sign * divergence_derivative(&DistPair::new(p1, p2)?, q)?)
        }
        "binned_renyi_entropy" => at_q(binned_renyi_entropy(binned()?, q)?),
        "continuous_information_difference" => at_q(continuous_information_difference(binned()?, q)?),
        "binned_renyi_divergence" => {
            let b2 = inp
                .binned_ref
                .as_ref()
                .ok_or_else(|| Failure::usage(format!("measure '{name}' needs --binned-ref")))?;
            at_q(binned_renyi_divergence(binned()?, b2, q)?)
        }
        "batty_decomposition" => {
            let d = batty_decomposition(binned()?);
            let part = |measure, value| ReportRow { measure, q: None, alpha: None, beta: None, value };
            return Ok(vec![
                part("batty_spatial_entropy", d.spatial),
                part("batty_size_term", d.size_term),
                part("batty_entropy", d.entropy),
            ]);
        }
        _ => unreachable!("names are canonicalized against REPORT_MEASURES"),
    };
    Ok(vec![row])
}


fn run_simplex(a: SimplexArgs) -> CliResult<i32> {
    let name = a.measure.as_deref().ok_or_else(|| {
        Failure::usage(format!(
            "no --measure given (valid: {})",
            crate::simplex::MEASURE_NAMES.join(", ")
        ))
    })?;
    let two_order = matches!(name, "generalized_complexity" | "generalized_relative_complexity");
    let (alpha, beta) = match (a.alpha, a.beta) {
        (Some(al), Some(be)) => (al, be),
        _ if two_order => return Err(Failure::usage(format!("measure '{name}' needs --alpha and --beta"))),
        _ => (0.0, 1.0),
    };
    let measure = FieldMeasure::from_name(name, a.q.unwrap_or(1.0), alpha, beta)?;
    let reference = a
        .reference
        .as_deref()
        .map(|r| io::parse_distribution(&r.replace(';', ","), false))
        .transpose()
        .map_err(|e| Failure::usage(format!("--reference: {e}")))?;
    if measure.is_relative() && reference.is_none() {
        return Err(Failure::usage(format!("measure '{name}' needs --reference p1,p2,p3")));
    }
    let role = match a.reference_role.unwrap_or_default() {
        RoleArg::Second => ReferenceRole::Second,
        RoleArg::First => ReferenceRole::First,
    };
    let grid = simplex_grid(a.resolution.unwrap_or(DEFAULT_RESOLUTION))
        .map_err(|e| Failure::usage(e.to_string()))?;
    let mut field = evaluate_field_with_role(&grid, &measure, reference.as_ref(), role)?;
    if a.negate_derivatives && matches!(measure, FieldMeasure::EntropyDerivative { .. }) {
        field.values.iter_mut().flatten().for_each(|v| *v = -*v);
    }
    let format = a.format.unwrap_or_default();
    let text = match format {
        OutputFormat::Csv => io::field_to_csv(&field),
        OutputFormat::Json => io::field_to_json(&field),
    };
    prepare_out_dir(a.out.as_deref())?;
    emit(a.out.as_deref(), &format!("{name}_field.{}", format.extension()), &text)?;
    Ok(EXIT_SUCCESS)
}


struct MfaPlan {
    q_grid: Vec<f64>,
    ab_grid: Vec<f64>,
    levels: LevelRange,
    energy_exponent: Option<f64>,
    boxing: BoxingOptions,
    window: Option<TimeWindow>,
    min_r2: Option<f64>,
    negate_derivatives: bool,
    format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PhaseSummary {
    phase: String,
    start: Option<f64>,
    end: Option<f64>,
    events: usize,
    status: &'static str,
    min_r_squared: Option<f64>,
    message: String,
}

struct PhaseOutcome {
    summary: PhaseSummary,
    artifacts: Vec<(String, String)>,
    code: i32,
}

fn run_mfa(a: MfaArgs) -> CliResult<i32> {
    let catalog_path = a.catalog.as_ref().ok_or_else(|| Failure::usage("--catalog is required"))?;
    let out = a.out.clone().ok_or_else(|| Failure::usage("--out is required"))?;
    let plan = mfa_plan(&a)?;
    let time_format = match a.time_format.unwrap_or_default() {
        TimeFormatArg::Auto => TimeFormat::Auto,
        TimeFormatArg::Epoch => TimeFormat::EpochSeconds,
        TimeFormatArg::Iso => TimeFormat::Iso8601,
    };
    let file = fs::File::open(catalog_path).map_err(|e| Failure::data(format!("{}: {e}", catalog_path.display())))?;
    let catalog = parse_catalog(file, &CatalogFormat { time_format })
        .map_err(|e| Failure::data(format!("{}: {e}", catalog_path.display())))?;
    let boundaries: Vec<f64> = a.phases.iter().map(|t| t.0).collect();
    let split = split_phases(&catalog, &boundaries).map_err(|e| Failure::usage(e.to_string()))?;

    let outcomes: Vec<PhaseOutcome> = split.phases.par_iter().map(|p| analyze_phase(p, &plan)).collect();

    prepare_out_dir(Some(&out))?;
    let mut summaries = Vec::new();
    let mut code = EXIT_SUCCESS;
    for o in outcomes {
        for (name, text) in &o.artifacts {
            io::write_atomic(&out.join(name), text)?;
        }
        if o.code != EXIT_SUCCESS {
            eprintln!("phase {}: {}", o.summary.phase, o.summary.message);
            code = match (code, o.code) {
                (EXIT_DATA, _) | (_, EXIT_DATA) => EXIT_DATA,
                (_, c) => c,
            };
        }
        summaries.push(o.summary);
    }
    let ext = plan.format.extension();
    io::write_atomic(&out.join(format!("phases.{ext}")), &table(&summaries, plan.format))?;
    Ok(code)
}

fn mfa_plan(a: &MfaArgs) -> CliResult<MfaPlan> {
    let (dq_min, dq_max, dq_step) = DEFAULT_Q_GRID;
    let q_grid = order_grid(
        a.q_min.unwrap_or(dq_min),
        a.q_max.unwrap_or(dq_max),
        a.q_step.unwrap_or(dq_step),
    )
    .map_err(|e| Failure::usage(format!("q grid: {e}")))?;
    if q_grid.len() < 3 {
        return Err(Failure::usage("q grid needs at least 3 orders for derivatives"));
    }
    let ab_grid = if a.ab_min.is_none() && a.ab_max.is_none() && a.ab_step.is_none() {
        q_grid.clone()
    } else {
        order_grid(
            a.ab_min.unwrap_or(q_grid[0]),
            a.ab_max.unwrap_or(q_grid[q_grid.len() - 1]),
            a.ab_step.unwrap_or(q_grid[1] - q_grid[0]),
        )
        .map_err(|e| Failure::usage(format!("map grid: {e}")))?
    };
    let window = match a.window.as_slice() {
        [] => None,
        [t0, t1] => Some(TimeWindow::new(t0.0, t1.0).map_err(|e| Failure::usage(format!("--window: {e}")))?),
        _ => return Err(Failure::usage("--window takes exactly two times t0,t1")),
    };
    let energy_exponent = a.energy_exponent.unwrap_or(DEFAULT_ENERGY_EXPONENT);
    if !energy_exponent.is_finite() {
        return Err(Failure::usage("--energy-exponent must be finite"));
    }
    let min_occupancy = a.min_occupancy.unwrap_or(1);
    if min_occupancy == 0 {
        return Err(Failure::usage("--min-occupancy must be at least 1"));
    }
    Ok(MfaPlan {
        q_grid,
        ab_grid,
        levels: a.scales.unwrap_or(LevelRange {
            min: DEFAULT_LEVELS.0,
            max: DEFAULT_LEVELS.1,
        }),
        energy_exponent: a.energy.then_some(energy_exponent),
        boxing: BoxingOptions { min_occupancy },
        window,
        min_r2: a.min_r2,
        negate_derivatives: a.negate_derivatives,
        format: a.format.unwrap_or_default(),
    })
}

fn analyze_phase(phase: &Phase, plan: &MfaPlan) -> PhaseOutcome {
    let mut summary = PhaseSummary {
        phase: phase.label.clone(),
        start: phase.start,
        end: phase.end,
        events: phase.catalog.len(),
        status: "ok",
        min_r_squared: None,
        message: String::new(),
    };
    let mut artifacts = Vec::new();
    let result = phase_curves(phase, plan).and_then(|curves| {
        let mut flagged = Vec::new();
        for (name, curve) in &curves {
            let r2 = curve.min_r_squared();
            summary.min_r_squared = Some(summary.min_r_squared.map_or(r2, |m: f64| m.min(r2)));
            if let Some(threshold) = plan.min_r2 {
                if r2 < threshold {
                    flagged.push(format!("{name}: min R² {r2} below {threshold}"));
                }
            }
            artifacts.extend(curve_artifacts(&phase.label, name, curve, plan)?);
        }
        if flagged.is_empty() {
            Ok(())
        } else {
            Err(Failure::numeric(flagged.join("; ")))
        }
    });
    let code = match result {
        Ok(()) => EXIT_SUCCESS,
        Err(f) => {
            summary.status = if f.code == EXIT_NUMERIC { "numeric_failure" } else { "data_error" };
            summary.message = f.message;
            f.code
        }
    };
    PhaseOutcome {
        summary,
        artifacts,
        code,
    }
}

fn phase_curves(phase: &Phase, plan: &MfaPlan) -> CliResult<Vec<(&'static str, DimensionCurve)>> {
    let c: &EventCatalog = &phase.catalog;
    if c.is_empty() {
        return Err(Failure::data("phase has no events"));
    }
    let window = phase.window(plan.window)?;
    let levels = plan.levels.min..=plan.levels.max;
    let freq = dyadic_partitions(c, window, levels.clone(), Weighting::Frequency, plan.boxing)?;
    let mut curves = vec![("dq", generalized_dimensions(&freq, &plan.q_grid)?)];
    if let Some(exponent) = plan.energy_exponent {
        let energy = dyadic_partitions(c, window, levels, Weighting::Energy { exponent }, plan.boxing)?;
        let pe = generalized_relative_dimensions(&freq, &energy, &plan.q_grid)?;
        let ep = generalized_relative_dimensions(&energy, &freq, &plan.q_grid)?;
        let sym = symmetrized_relative_dimensions(&pe, &ep)?;
        curves.extend([("rel_pe", pe), ("rel_ep", ep), ("rel_sym", sym)]);
    }
    for (name, curve) in &curves {
        if let Some(q) = curve
            .q_grid
            .iter()
            .zip(&curve.values)
            .find(|(_, v)| !v.is_finite())
            .map(|(q, _)| q)
        {
            return Err(Failure::numeric(format!("{name}: non-finite estimate at q = {q}")));
        }
    }
    Ok(curves)
}

fn curve_artifacts(
    label: &str,
    name: &str,
    curve: &DimensionCurve,
    plan: &MfaPlan,
) -> CliResult<Vec<(String, String)>> {
    let ext = plan.format.extension();
    let curve_text = |c: &DimensionCurve| match plan.format {
        OutputFormat::Csv => io::curve_to_csv(c),
        OutputFormat::Json => io::curve_to_json(c),
    };
    let mut derivative = dimension_derivative(curve)?;
    if plan.negate_derivatives {
        derivative = derivative.negated();
    }
    let map = dimension_increment_map(curve, &plan.ab_grid, &plan.ab_grid, IncrementMode::Relative)?;
    let map_text = match plan.format {
        OutputFormat::Csv => io::map_to_csv(&map),
        OutputFormat::Json => io::map_to_json(&map),
    };
    Ok(vec![
        (format!("{label}_{name}.{ext}"), curve_text(curve)),
        (format!("{label}_{name}_increments.{ext}"), map_text),
        (format!("{label}_{name}_derivative.{ext}"), curve_text(&derivative)),
    ])
}
