//! File formats: distribution and binned-density inputs; field, map, curve
//! and report outputs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::binned::BinnedDensity;
use crate::complexity::ComplexityMap;
use crate::error::{Error, Result};
use crate::info_measures::ProbDist;
use crate::multifractal::DimensionCurve;
use crate::simplex::FieldResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    token.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number '{}'", token.trim()),
    })
}

/// Weights written one per line or as a single comma-separated row. Blank
/// lines and lines starting with `#` are ignored.
pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    let mut weights = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for token in line.split(',').filter(|t| !t.trim().is_empty()) {
            weights.push(parse_number(token, i + 1)?);
        }
    }
    if weights.is_empty() {
        return Err(Error::InvalidDistribution("no weights in input".into()));
    }
    Ok(weights)
}

/// Parses a distribution file. With `normalize`, any non-negative weights
/// are accepted and divided by their sum.
pub fn parse_distribution(text: &str, normalize: bool) -> Result<ProbDist> {
    let weights = parse_weights(text)?;
    if normalize {
        ProbDist::from_weights(weights)
    } else {
        ProbDist::new(weights)
    }
}

/// Rows `bin_left_edge,bin_right_edge,probability`; a non-numeric first
/// row is taken as a header.
pub fn parse_binned_density(text: &str) -> Result<BinnedDensity> {
    let mut bins = Vec::new();
    let mut probs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if bins.is_empty() && probs.is_empty() && cells[0].trim().parse::<f64>().is_err() {
            continue;
        }
        if cells.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 3 columns, found {}", cells.len()),
            });
        }
        let left = parse_number(cells[0], i + 1)?;
        let right = parse_number(cells[1], i + 1)?;
        bins.push((left, right));
        probs.push(parse_number(cells[2], i + 1)?);
    }
    if bins.is_empty() {
        return Err(Error::InvalidDistribution("no bins in input".into()));
    }
    BinnedDensity::new(ProbDist::new(probs)?, bins)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `p1,p2,p3,value` rows in grid order; missing values are empty cells.
pub fn field_to_csv(field: &FieldResult) -> String {
    let mut out = String::from("p1,p2,p3,value\n");
    for (idx, v) in field.values.iter().enumerate() {
        let [a, b, c] = field.grid.coords(idx);
        let _ = writeln!(out, "{a},{b},{c},{}", cell(*v));
    }
    out
}

pub fn field_to_json(field: &FieldResult) -> String {
    let points: Vec<_> = field
        .values
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let [a, b, c] = field.grid.coords(idx);
            json!({ "p1": a, "p2": b, "p3": c, "value": v })
        })
        .collect();
    to_json(&json!({ "resolution": field.grid.resolution(), "points": points }))
}

/// Matrix with the β grid in the header row and the α grid in the first
/// column.
pub fn map_to_csv(map: &ComplexityMap) -> String {
    let mut out = String::from("alpha\\beta");
    for b in &map.beta_grid {
        let _ = write!(out, ",{b}");
    }
    out.push('\n');
    for (a, row) in map.alpha_grid.iter().zip(&map.values) {
        out.push_str(&a.to_string());
        for v in row {
            out.push(',');
            out.push_str(&cell(*v));
        }
        out.push('\n');
    }
    out
}

/// Explicit grids plus row-major values (`null` for missing cells).
pub fn map_to_json(map: &ComplexityMap) -> String {
    let values: Vec<Option<f64>> = map.values.iter().flatten().copied().collect();
    to_json(&json!({
        "alpha_grid": map.alpha_grid,
        "beta_grid": map.beta_grid,
        "values": values,
    }))
}

pub fn curve_to_csv(curve: &DimensionCurve) -> String {
    let mut out = String::from("q,value,r_squared\n");
    for ((q, v), r) in curve.q_grid.iter().zip(&curve.values).zip(&curve.r_squared) {
        let _ = writeln!(out, "{q},{v},{r}");
    }
    out
}

pub fn curve_to_json(curve: &DimensionCurve) -> String {
    to_json(curve)
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Parses a curve written by [`curve_to_csv`].
pub fn curve_from_csv(text: &str) -> Result<DimensionCurve> {
    let (mut q, mut v, mut r) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected q,value,r_squared".into(),
            });
        }
        q.push(parse_number(cells[0], i + 1)?);
        v.push(parse_number(cells[1], i + 1)?);
        r.push(parse_number(cells[2], i + 1)?);
    }
    DimensionCurve::new(q, v, r)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
