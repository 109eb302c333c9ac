//! Event catalogs: ingestion, phase splitting and reduction to temporal
//! box-count distributions.

use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::multifractal::PartitionDistribution;

/// Energy-magnitude exponent `b` in `E ∝ 10^{b·M}`.
pub const DEFAULT_ENERGY_EXPONENT: f64 = 1.5;

/// Default dyadic levels `j` for `ε_j = span · 2^{-j}`.
pub const DEFAULT_LEVELS: (u32, u32) = (3, 11);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    /// Seconds since the Unix epoch.
    pub time: f64,
    pub magnitude: Option<f64>,
    pub lon: Option<f64>,
    pub lat: Option<f64>,
    pub depth_km: Option<f64>,
}

impl Event {
    pub fn new(time: f64, magnitude: f64) -> Self {
        Self {
            time,
            magnitude: Some(magnitude),
            lon: None,
            lat: None,
            depth_km: None,
        }
    }
}

/// Events sorted by time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventCatalog {
    events: Vec<Event>,
}

/// Closed time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::Catalog(format!("empty time window [{start}, {end}]")));
        }
        Ok(Self { start, end })
    }

    pub fn span(&self) -> f64 {
        self.end - self.start
    }
}

impl EventCatalog {
    pub fn new(mut events: Vec<Event>) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| !e.time.is_finite()) {
            return Err(Error::Catalog(format!("non-finite event time {}", e.time)));
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(Self { events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `[first event time, last event time]`, if the catalog spans a
    /// positive interval.
    pub fn span(&self) -> Option<TimeWindow> {
        let (first, last) = (self.events.first()?, self.events.last()?);
        TimeWindow::new(first.time, last.time).ok()
    }

    /// A copy with `delta` added to every magnitude.
    pub fn with_magnitude_shift(&self, delta: f64) -> Self {
        let events = self
            .events
            .iter()
            .map(|e| Event {
                magnitude: e.magnitude.map(|m| m + delta),
                ..*e
            })
            .collect();
        Self { events }
    }
}

/// How the `time` column is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeFormat {
    /// Epoch seconds when the cell parses as a number, ISO-8601 otherwise.
    #[default]
    Auto,
    EpochSeconds,
    Iso8601,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CatalogFormat {
    pub time_format: TimeFormat,
}

/// Seconds since the epoch from a numeric or ISO-8601 cell.
pub fn parse_time(cell: &str, format: TimeFormat) -> Option<f64> {
    let cell = cell.trim();
    let epoch = || cell.parse::<f64>().ok().filter(|t| t.is_finite());
    let iso = || {
        if let Ok(dt) = DateTime::parse_from_rfc3339(cell) {
            return Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
            if let Ok(dt) = NaiveDateTime::parse_from_str(cell, fmt) {
                let utc = dt.and_utc();
                return Some(utc.timestamp() as f64 + utc.timestamp_subsec_nanos() as f64 * 1e-9);
            }
        }
        NaiveDate::parse_from_str(cell, "%Y-%m-%d")
            .ok()
            .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp() as f64)
    };
    match format {
        TimeFormat::EpochSeconds => epoch(),
        TimeFormat::Iso8601 => iso(),
        TimeFormat::Auto => epoch().or_else(iso),
    }
}

/// Reads a CSV catalog with a header row. Required columns: `time`,
/// `magnitude`; optional: `lon`, `lat`, `depth_km`. Column names are
/// case-insensitive. An empty magnitude cell is read as missing.
pub fn parse_catalog<R: Read>(source: R, format: &CatalogFormat) -> Result<EventCatalog> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let time_col = column("time").ok_or(Error::Parse {
        line: 1,
        msg: "missing required column 'time'".into(),
    })?;
    let mag_col = column("magnitude").ok_or(Error::Parse {
        line: 1,
        msg: "missing required column 'magnitude'".into(),
    })?;
    let optional = [column("lon"), column("lat"), column("depth_km")];

    let mut events = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let time_cell = &record[time_col];
        let time = parse_time(time_cell, format.time_format).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unparseable time '{time_cell}'"),
        })?;
        let number = |col: usize, name: &str| -> Result<Option<f64>> {
            let cell = &record[col];
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("invalid {name} '{cell}'"),
                })
        };
        let opt = |i: usize, name: &str| optional[i].map_or(Ok(None), |c| number(c, name));
        events.push(Event {
            time,
            magnitude: number(mag_col, "magnitude")?,
            lon: opt(0, "lon")?,
            lat: opt(1, "lat")?,
            depth_km: opt(2, "depth_km")?,
        });
    }
    if events.is_empty() {
        return Err(Error::Catalog("catalog has no events".into()));
    }
    EventCatalog::new(events)
}

/// One sub-period of a split catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub label: String,
    /// Cut point opening the phase (`None` for the first phase).
    pub start: Option<f64>,
    /// Cut point closing the phase (`None` for the last phase).
    pub end: Option<f64>,
    pub catalog: EventCatalog,
}

impl Phase {
    pub fn is_empty(&self) -> bool {
        self.catalog.is_empty()
    }

    /// Analysis window: the phase's own data span, or, when an outer window
    /// is given, the cut points closed off by that window.
    pub fn window(&self, outer: Option<TimeWindow>) -> Result<TimeWindow> {
        match outer {
            Some(w) => TimeWindow::new(self.start.unwrap_or(w.start), self.end.unwrap_or(w.end)),
            None => self.catalog.span().ok_or_else(|| {
                Error::Catalog(format!(
                    "phase {} has {} event(s) and no positive time span",
                    self.label,
                    self.catalog.len()
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSplit {
    pub boundaries: Vec<f64>,
    pub phases: Vec<Phase>,
}

impl PhaseSplit {
    /// Labels of phases that received no events.
    pub fn empty_phases(&self) -> Vec<&str> {
        self.phases
            .iter()
            .filter(|p| p.is_empty())
            .map(|p| p.label.as_str())
            .collect()
    }
}

fn phase_label(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("P{}", i + 1)
    }
}

/// Splits at strictly increasing cut points; an event exactly on a cut point
/// belongs to the later phase.
pub fn split_phases(c: &EventCatalog, boundaries: &[f64]) -> Result<PhaseSplit> {
    if boundaries.iter().any(|b| !b.is_finite()) || boundaries.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Catalog(format!(
            "phase boundaries must be finite and strictly increasing: {boundaries:?}"
        )));
    }
    let mut buckets = vec![Vec::new(); boundaries.len() + 1];
    for e in &c.events {
        let phase = boundaries.partition_point(|&b| b <= e.time);
        buckets[phase].push(*e);
    }
    let phases = buckets
        .into_iter()
        .enumerate()
        .map(|(i, events)| Phase {
            label: phase_label(i),
            start: i.checked_sub(1).map(|j| boundaries[j]),
            end: boundaries.get(i).copied(),
            catalog: EventCatalog { events },
        })
        .collect();
    Ok(PhaseSplit {
        boundaries: boundaries.to_vec(),
        phases,
    })
}

/// Per-event weight used in box counting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    /// Unit weight: plain event counts.
    Frequency,
    /// Released energy `∝ 10^{b·M}`.
    Energy { exponent: f64 },
}

/// Box-counting options shared by all scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxingOptions {
    /// Boxes with fewer events are dropped before normalization.
    pub min_occupancy: usize,
}

impl Default for BoxingOptions {
    fn default() -> Self {
        Self { min_occupancy: 1 }
    }
}

fn event_weights(c: &EventCatalog, weighting: Weighting) -> Result<Vec<f64>> {
    match weighting {
        Weighting::Frequency => Ok(vec![1.0; c.len()]),
        Weighting::Energy { exponent } => {
            let mags = c
                .events
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    e.magnitude.ok_or_else(|| {
                        Error::Catalog(format!("event {i} at t = {} has no magnitude", e.time))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            // shifting by the largest magnitude cancels under normalization
            let top = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(mags.iter().map(|m| 10f64.powf(exponent * (m - top))).collect())
        }
    }
}

fn require_boxable(c: &EventCatalog) -> Result<()> {
    if c.len() < 2 {
        return Err(Error::Catalog(format!(
            "box counting needs at least 2 events, got {}",
            c.len()
        )));
    }
    Ok(())
}

/// Accumulates weights into `n_boxes` boxes; `position(t)` maps a time to a
/// fractional box coordinate in `[0, n_boxes]`.
fn accumulate(
    c: &EventCatalog,
    weights: &[f64],
    n_boxes: u64,
    epsilon: f64,
    position: impl Fn(f64) -> f64,
    options: BoxingOptions,
) -> Result<PartitionDistribution> {
    let mut boxes: Vec<(u64, usize, f64)> = Vec::new();
    for (e, &w) in c.events.iter().zip(weights) {
        let x = position(e.time);
        if !(x >= 0.0 && x <= n_boxes as f64 * (1.0 + 1e-12)) {
            return Err(Error::Catalog(format!(
                "event at t = {} lies outside the analysis window",
                e.time
            )));
        }
        let k = (x.floor() as u64).min(n_boxes - 1);
        match boxes.last_mut() {
            Some((last, count, sum)) if *last == k => {
                *count += 1;
                *sum += w;
            }
            _ => boxes.push((k, 1, w)),
        }
    }
    let (ids, sums): (Vec<u64>, Vec<f64>) = boxes
        .into_iter()
        .filter(|(_, count, _)| *count >= options.min_occupancy)
        .map(|(k, _, s)| (k, s))
        .unzip();
    if ids.is_empty() {
        return Err(Error::Catalog(format!(
            "no box reaches the minimum occupancy of {}",
            options.min_occupancy
        )));
    }
    PartitionDistribution::new(epsilon, ids, sums)
}

/// Weighted box counting over `window` with boxes of width `epsilon`
/// anchored at `window.start`.
pub fn box_partition(
    c: &EventCatalog,
    window: TimeWindow,
    epsilon: f64,
    weighting: Weighting,
    options: BoxingOptions,
) -> Result<PartitionDistribution> {
    require_boxable(c)?;
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("box width must be positive, got {epsilon}")));
    }
    let n_boxes = ((window.span() / epsilon) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let weights = event_weights(c, weighting)?;
    accumulate(c, &weights, n_boxes, epsilon, |t| (t - window.start) / epsilon, options)
}

/// Event-count distribution `P̄_ε`, boxes anchored at the first event.
pub fn frequency_partition(c: &EventCatalog, epsilon: f64) -> Result<PartitionDistribution> {
    let window = data_window(c)?;
    box_partition(c, window, epsilon, Weighting::Frequency, BoxingOptions::default())
}

/// Accumulated-energy distribution `Ē_ε`, each event weighted by
/// `10^{b·M}` with `b = energy_exponent`.
pub fn energy_partition(c: &EventCatalog, epsilon: f64, energy_exponent: f64) -> Result<PartitionDistribution> {
    let window = data_window(c)?;
    box_partition(
        c,
        window,
        epsilon,
        Weighting::Energy {
            exponent: energy_exponent,
        },
        BoxingOptions::default(),
    )
}

fn data_window(c: &EventCatalog) -> Result<TimeWindow> {
    require_boxable(c)?;
    c.span()
        .ok_or_else(|| Error::Catalog("all events share one time stamp".into()))
}

/// Partitions at `ε_j = span · 2^{-j}` for each level `j`, coarse to fine.
/// Box `k` at level `j` covers `[start + k ε_j, start + (k+1) ε_j)`, so
/// boxes nest across levels.
pub fn dyadic_partitions(
    c: &EventCatalog,
    window: TimeWindow,
    levels: std::ops::RangeInclusive<u32>,
    weighting: Weighting,
    options: BoxingOptions,
) -> Result<Vec<PartitionDistribution>> {
    require_boxable(c)?;
    if levels.is_empty() || *levels.end() > 52 {
        return Err(Error::Grid(format!("invalid dyadic levels {levels:?}")));
    }
    let weights = event_weights(c, weighting)?;
    levels
        .map(|j| {
            let n_boxes = 1u64 << j;
            let epsilon = window.span() / n_boxes as f64;
            let scale = n_boxes as f64 / window.span();
            accumulate(c, &weights, n_boxes, epsilon, |t| (t - window.start) * scale, options)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog(times: &[f64]) -> EventCatalog {
        EventCatalog::new(times.iter().map(|&t| Event::new(t, 2.0)).collect()).unwrap()
    }

    #[test]
    fn parses_and_sorts() {
        let csv = "time,magnitude,lat,lon\n30,1.5,27.7,-18.0\n10,2.0,,\n20,3.1,27.6,-18.1\n";
        let c = parse_catalog(csv.as_bytes(), &CatalogFormat::default()).unwrap();
        assert_eq!(c.len(), 3);
        let times: Vec<f64> = c.events().iter().map(|e| e.time).collect();
        assert_eq!(times, [10.0, 20.0, 30.0]);
        assert_eq!(c.events()[0].lat, None);
        assert_eq!(c.events()[1].lon, Some(-18.1));
    }

    #[test]
    fn parses_iso_times() {
        let csv = "Time,Magnitude\n2011-07-19T00:00:00Z,1.0\n2011-07-19 00:00:30.5,1.0\n2011-07-20,2\n";
        let c = parse_catalog(csv.as_bytes(), &CatalogFormat::default()).unwrap();
        let t0 = 1_311_033_600.0;
        let times: Vec<f64> = c.events().iter().map(|e| e.time).collect();
        assert_eq!(times, [t0, t0 + 30.5, t0 + 86_400.0]);
        let strict = CatalogFormat {
            time_format: TimeFormat::EpochSeconds,
        };
        assert!(parse_catalog(csv.as_bytes(), &strict).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_catalog("".as_bytes(), &CatalogFormat::default()),
            Err(Error::Parse { .. }) | Err(Error::Catalog(_))
        ));
        assert!(matches!(
            parse_catalog("time,magnitude\n".as_bytes(), &CatalogFormat::default()),
            Err(Error::Catalog(_))
        ));
        let bad = "time,magnitude\n1,2.0\n2,abc\n3,1.0\n";
        match parse_catalog(bad.as_bytes(), &CatalogFormat::default()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let no_mag = "time,lat\n1,2\n";
        assert!(matches!(
            parse_catalog(no_mag.as_bytes(), &CatalogFormat::default()),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad_time = "time,magnitude\nyesterday,1\n";
        assert!(matches!(
            parse_catalog(bad_time.as_bytes(), &CatalogFormat::default()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn phase_splitting() {
        let c = catalog(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let one = split_phases(&c, &[]).unwrap();
        assert_eq!(one.phases.len(), 1);
        assert_eq!(one.phases[0].catalog, c);

        let three = split_phases(&c, &[2.5, 4.0]).unwrap();
        let counts: Vec<usize> = three.phases.iter().map(|p| p.catalog.len()).collect();
        assert_eq!(counts, [2, 1, 3]);
        assert_eq!(three.phases[2].catalog.events()[0].time, 4.0);
        assert_eq!(three.phases[1].label, "B");

        let early = split_phases(&c, &[0.5]).unwrap();
        assert_eq!(early.empty_phases(), ["A"]);

        assert!(split_phases(&c, &[3.0, 2.0]).is_err());
        assert!(split_phases(&c, &[3.0, 3.0]).is_err());
    }

    #[test]
    fn phase_windows() {
        let c = catalog(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let split = split_phases(&c, &[3.5]).unwrap();
        let b = &split.phases[1];
        assert_eq!(b.window(None).unwrap(), TimeWindow::new(4.0, 6.0).unwrap());
        let outer = TimeWindow::new(0.0, 10.0).unwrap();
        assert_eq!(b.window(Some(outer)).unwrap(), TimeWindow::new(3.5, 10.0).unwrap());
        assert_eq!(split.phases[0].window(Some(outer)).unwrap(), TimeWindow::new(0.0, 3.5).unwrap());
    }

    #[test]
    fn frequency_examples() {
        let pd = frequency_partition(&catalog(&[0.0, 0.1, 0.9, 1.0]), 0.5).unwrap();
        assert_eq!(pd.masses().weights(), &[0.5, 0.5]);
        let pd = frequency_partition(&catalog(&[0.1, 0.2, 0.6, 0.7]), 0.3).unwrap();
        assert_eq!(pd.boxes(), &[0, 1]);
        assert_eq!(pd.masses().weights(), &[0.5, 0.5]);
        let pd = frequency_partition(&catalog(&[0.0, 0.1, 0.2]), 5.0).unwrap();
        assert_eq!(pd.masses().weights(), &[1.0]);
        assert!(frequency_partition(&catalog(&[1.0]), 0.5).is_err());

        let window = TimeWindow::new(0.0, 1.0).unwrap();
        let pd = box_partition(
            &catalog(&[0.1, 0.2, 0.6, 0.7]),
            window,
            0.5,
            Weighting::Frequency,
            BoxingOptions::default(),
        )
        .unwrap();
        assert_eq!(pd.masses().weights(), &[0.5, 0.5]);
    }

    #[test]
    fn energy_examples() {
        let c = EventCatalog::new(vec![Event::new(0.0, 2.0), Event::new(1.0, 4.0)]).unwrap();
        let pd = energy_partition(&c, 0.5, 1.5).unwrap();
        let expected = 1e3 / (1e3 + 1e6);
        assert!((pd.masses().weights()[0] - expected).abs() < 1e-15);
        assert_eq!(energy_partition(&c, 0.5, 0.0).unwrap(), frequency_partition(&c, 0.5).unwrap());

        let flat = catalog(&[0.0, 0.2, 0.3, 1.0]);
        assert_eq!(energy_partition(&flat, 0.25, 1.5).unwrap(), frequency_partition(&flat, 0.25).unwrap());

        let missing = EventCatalog::new(vec![
            Event::new(0.0, 1.0),
            Event {
                magnitude: None,
                ..Event::new(1.0, 0.0)
            },
        ])
        .unwrap();
        assert!(energy_partition(&missing, 0.5, 1.5).is_err());
        assert!(frequency_partition(&missing, 0.5).is_ok());
    }

    #[test]
    fn dyadic_boxes_nest() {
        let c = catalog(&[0.0, 0.05, 0.3, 0.31, 0.74, 1.0]);
        let window = TimeWindow::new(0.0, 1.0).unwrap();
        let pds = dyadic_partitions(&c, window, 1..=3, Weighting::Frequency, BoxingOptions::default()).unwrap();
        assert_eq!(pds[0].boxes(), &[0, 1]);
        assert_eq!(pds[1].boxes(), &[0, 1, 2, 3]);
        assert_eq!(pds[2].boxes(), &[0, 2, 5, 7]);
        assert_eq!(pds[2].epsilon(), 0.125);
        assert_eq!(pds[2].masses().weights(), &[2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);

        let sparse = dyadic_partitions(&c, window, 3..=3, Weighting::Frequency, BoxingOptions { min_occupancy: 2 })
            .unwrap();
        assert_eq!(sparse[0].boxes(), &[0, 2]);

        let narrow = TimeWindow::new(0.1, 1.0).unwrap();
        assert!(dyadic_partitions(&c, narrow, 1..=2, Weighting::Frequency, BoxingOptions::default()).is_err());
    }
}
