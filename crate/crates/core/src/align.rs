//! Time alignment of message activity with climate observations.
//!
//! Activity is counted per fixed-width UTC bucket. Climate values are
//! averaged per bucket (first per station, then across stations). A bucket
//! missing any requested series is dropped from every series, never
//! imputed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::synop::{ClimateFrame, ClimateVariable};
use crate::text::RawMessage;

#[derive(Debug, thiserror::Error)]
pub enum AlignError {
    #[error("activity and climate data do not overlap in time")]
    NoOverlap,
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("aligned frame is empty")]
    EmptyFrame,
    #[error("invalid bucket width {0:?}")]
    InvalidBucket(String),
    #[error("plot data: {0}")]
    Format(String),
}

pub const ACTIVITY_TOTAL: &str = "activity_total";

/// Parses `90s`, `30m`, `1h`, `1d`.
pub fn parse_bucket(s: &str) -> Result<TimeDelta, AlignError> {
    let bad = || AlignError::InvalidBucket(s.to_string());
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
    let n: i64 = s[..split].parse().map_err(|_| bad())?;
    let unit = match &s[split..] {
        "s" => 1,
        "m" | "min" => 60,
        "h" => 3600,
        "d" => 86400,
        _ => return Err(bad()),
    };
    if n <= 0 {
        return Err(bad());
    }
    Ok(TimeDelta::seconds(n * unit))
}

fn bucket_start(t: DateTime<Utc>, width: TimeDelta) -> DateTime<Utc> {
    let w = width.num_seconds();
    let s = t.timestamp().div_euclid(w) * w;
    DateTime::from_timestamp(s, 0).expect("bucket start in range")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityPoint {
    pub start: DateTime<Utc>,
    pub total: u64,
    /// Count per label, every label of the series present (possibly 0).
    pub labels: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySeries {
    pub bucket_width: TimeDelta,
    pub points: Vec<ActivityPoint>,
}

/// Counts messages per bucket, zero-filling empty buckets inside the
/// observed span. Messages without a label count toward the total only.
pub fn bucket_activity(msgs: &[RawMessage], labels: &HashMap<String, String>, bucket: TimeDelta) -> ActivitySeries {
    assert!(bucket.num_seconds() > 0, "bucket width must be at least one second");
    let names: BTreeSet<&str> = msgs.iter().filter_map(|m| labels.get(&m.id)).map(String::as_str).collect();
    let zero: BTreeMap<String, u64> = names.iter().map(|n| (n.to_string(), 0)).collect();
    let mut counts: BTreeMap<DateTime<Utc>, ActivityPoint> = BTreeMap::new();
    for m in msgs {
        let start = bucket_start(m.timestamp, bucket);
        let p = counts
            .entry(start)
            .or_insert_with(|| ActivityPoint { start, total: 0, labels: zero.clone() });
        p.total += 1;
        if let Some(l) = labels.get(&m.id) {
            *p.labels.get_mut(l).unwrap() += 1;
        }
    }
    let mut points = Vec::new();
    if let (Some(&first), Some(&last)) = (counts.keys().next(), counts.keys().next_back()) {
        let mut t = first;
        while t <= last {
            points.push(
                counts
                    .remove(&t)
                    .unwrap_or_else(|| ActivityPoint { start: t, total: 0, labels: zero.clone() }),
            );
            t += bucket;
        }
    }
    ActivitySeries { bucket_width: bucket, points }
}

/// Equal-length series over common timestamps, in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedFrame {
    pub timestamps: Vec<DateTime<Utc>>,
    pub series: Vec<(String, Vec<f64>)>,
    /// Candidate buckets removed because some series had no value.
    pub dropped: usize,
}

/// How several stations reporting in the same bucket are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StationAgg {
    #[default]
    Mean,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Per-bucket climate value: mean over stations of each station's mean.
fn climate_buckets(
    climate: &ClimateFrame,
    var: ClimateVariable,
    width: TimeDelta,
) -> BTreeMap<DateTime<Utc>, f64> {
    let mut per: BTreeMap<DateTime<Utc>, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for o in &climate.rows {
        let (Some(t), Some(v)) = (o.observed_at, var.get(o)) else { continue };
        per.entry(bucket_start(t, width)).or_default().entry(&o.station_id).or_default().push(v);
    }
    per.into_iter()
        .map(|(t, stations)| {
            let means: Vec<f64> = stations.values().map(|v| mean(v)).collect();
            (t, mean(&means))
        })
        .collect()
}

/// Series order: total activity, one series per activity label (sorted),
/// then `variables` in the order given.
pub fn align_frames(
    activity: &ActivitySeries,
    climate: &ClimateFrame,
    variables: &[ClimateVariable],
    station_agg: StationAgg,
) -> Result<AlignedFrame, AlignError> {
    let StationAgg::Mean = station_agg;
    let width = activity.bucket_width;
    let obs_times: Vec<DateTime<Utc>> = climate.rows.iter().filter_map(|o| o.observed_at).collect();
    let (Some(a0), Some(a1)) = (activity.points.first(), activity.points.last()) else {
        return Err(AlignError::NoOverlap);
    };
    let (Some(c0), Some(c1)) = (obs_times.iter().min(), obs_times.iter().max()) else {
        return Err(AlignError::NoOverlap);
    };
    let lo = a0.start.max(bucket_start(*c0, width));
    let hi = a1.start.min(bucket_start(*c1, width));
    if lo > hi {
        return Err(AlignError::NoOverlap);
    }

    let acts: BTreeMap<DateTime<Utc>, &ActivityPoint> = activity.points.iter().map(|p| (p.start, p)).collect();
    let label_names: BTreeSet<&String> = activity.points.iter().flat_map(|p| p.labels.keys()).collect();
    let clim: Vec<BTreeMap<DateTime<Utc>, f64>> =
        variables.iter().map(|&v| climate_buckets(climate, v, width)).collect();

    let mut names = vec![ACTIVITY_TOTAL.to_string()];
    names.extend(label_names.iter().map(|l| format!("activity_{l}")));
    names.extend(variables.iter().map(|v| v.name().to_string()));
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut timestamps = Vec::new();
    let mut dropped = 0;

    let mut t = lo;
    while t <= hi {
        let row: Option<Vec<f64>> = acts.get(&t).and_then(|p| {
            let mut row = vec![p.total as f64];
            for l in &label_names {
                row.push(*p.labels.get(*l)? as f64);
            }
            for c in &clim {
                row.push(*c.get(&t)?);
            }
            Some(row)
        });
        match row {
            Some(row) => {
                timestamps.push(t);
                cols.iter_mut().zip(row).for_each(|(c, v)| c.push(v));
            }
            None => dropped += 1,
        }
        t += width;
    }
    Ok(AlignedFrame {
        timestamps,
        series: names.into_iter().zip(cols).collect(),
        dropped,
    })
}

/// Pearson correlation. When exactly one series is constant there is no
/// linear association to measure and the result is 0.
pub fn correlate(x: &[f64], y: &[f64]) -> Result<f64, AlignError> {
    if x.len() != y.len() {
        return Err(AlignError::DegenerateSeries(format!("lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(AlignError::DegenerateSeries(format!("{} points", x.len())));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    match (sxx == 0.0, syy == 0.0) {
        (true, true) => Err(AlignError::DegenerateSeries("both series constant".into())),
        (true, false) | (false, true) => Ok(0.0),
        _ => Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)),
    }
}

/// Correlation of every activity series with every other series.
pub fn correlation_table(frame: &AlignedFrame) -> Vec<(String, String, Option<f64>)> {
    let mut out = Vec::new();
    for (i, (a, x)) in frame.series.iter().enumerate() {
        if !a.starts_with("activity_") {
            continue;
        }
        for (b, y) in &frame.series[i + 1..] {
            out.push((a.clone(), b.clone(), correlate(x, y).ok()));
        }
    }
    out
}

impl AlignedFrame {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Parses the output of [`emit_plot_data`]. `dropped` is not part of the
    /// table and reads back as 0.
    pub fn from_csv(text: &str) -> Result<Self, AlignError> {
        let fmt = |m: String| AlignError::Format(m);
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| fmt("empty input".into()))?.split(',').collect();
        if header.first() != Some(&"iso_time") {
            return Err(fmt("first column must be iso_time".into()));
        }
        let mut frame = AlignedFrame {
            timestamps: Vec::new(),
            series: header[1..].iter().map(|n| (n.to_string(), Vec::new())).collect(),
            dropped: 0,
        };
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(fmt(format!("row {}: {} cells", i + 1, cells.len())));
            }
            let t = DateTime::parse_from_rfc3339(cells[0]).map_err(|e| fmt(format!("row {}: {e}", i + 1)))?;
            frame.timestamps.push(t.with_timezone(&Utc));
            for ((_, col), c) in frame.series.iter_mut().zip(&cells[1..]) {
                col.push(c.parse().map_err(|_| fmt(format!("row {}: bad number {c:?}", i + 1)))?);
            }
        }
        Ok(frame)
    }
}

/// CSV: `iso_time` then one column per series. Numbers use the shortest
/// representation that parses back to the same value.
pub fn emit_plot_data(frame: &AlignedFrame) -> Result<String, AlignError> {
    if frame.is_empty() {
        return Err(AlignError::EmptyFrame);
    }
    let mut out = String::from("iso_time");
    for (n, _) in &frame.series {
        if n.contains(',') || n.contains('\n') {
            return Err(AlignError::Format(format!("series name {n:?}")));
        }
        write!(out, ",{n}").unwrap();
    }
    out.push('\n');
    for (i, t) in frame.timestamps.iter().enumerate() {
        out.push_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true));
        for (_, v) in &frame.series {
            write!(out, ",{}", v[i]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// JSON with the same content as the CSV plus the drop count.
pub fn emit_plot_json(frame: &AlignedFrame) -> Result<String, AlignError> {
    if frame.is_empty() {
        return Err(AlignError::EmptyFrame);
    }
    #[derive(Serialize)]
    struct Plot<'a> {
        iso_time: Vec<String>,
        series: serde_json::Map<String, serde_json::Value>,
        order: Vec<&'a str>,
        dropped: usize,
    }
    let plot = Plot {
        iso_time: frame.timestamps.iter().map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true)).collect(),
        series: frame.series.iter().map(|(n, v)| (n.clone(), serde_json::json!(v))).collect(),
        order: frame.series.iter().map(|(n, _)| n.as_str()).collect(),
        dropped: frame.dropped,
    };
    serde_json::to_string_pretty(&plot).map_err(|e| AlignError::Format(e.to_string()))
}
