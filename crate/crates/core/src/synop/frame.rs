use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};

use super::groups::Precipitation;
use super::report::{decode_report, ReportDiagnostics};
use super::{SynopError, SynopObservation, SynopReport};

const HEADER: [&str; 10] = [
    "station",
    "iso_time",
    "wind_kmh",
    "tmax_c",
    "tavg_c",
    "rh_pct",
    "precip_mm",
    "trace",
    "precip_period",
    "pressure_hpa",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameDiagnostics {
    /// Repeated `(station, time)` pairs dropped after the first.
    pub duplicates: usize,
    /// Reports without a full date, left out of the frame.
    pub undated: usize,
    pub malformed_groups: usize,
    pub out_of_range: usize,
}

/// Decoded observations in time order, at most one per `(station, time)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClimateFrame {
    pub rows: Vec<SynopObservation>,
    pub stations: BTreeSet<String>,
    pub diagnostics: FrameDiagnostics,
}

pub fn observations_frame(reports: &[SynopReport]) -> ClimateFrame {
    let mut diag = FrameDiagnostics::default();
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(reports.len());
    for r in reports {
        let Some(t) = r.observed_at else {
            diag.undated += 1;
            continue;
        };
        if !seen.insert((r.station_id.clone(), t)) {
            diag.duplicates += 1;
            continue;
        }
        let obs = decode_report(r);
        diag.malformed_groups += obs.diagnostics.malformed_groups as usize;
        diag.out_of_range += obs.diagnostics.out_of_range as usize;
        rows.push(obs);
    }
    rows.sort_by(|a, b| (a.observed_at, &a.station_id).cmp(&(b.observed_at, &b.station_id)));
    ClimateFrame {
        stations: rows.iter().map(|o| o.station_id.clone()).collect(),
        rows,
        diagnostics: diag,
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_cell(s: &str, line: usize) -> Result<Option<f64>, SynopError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| SynopError::Table(format!("line {line}: bad number {s:?}")))
}

impl ClimateFrame {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows from the given stations only.
    pub fn restrict(&self, stations: &[String]) -> ClimateFrame {
        let keep: HashSet<&str> = stations.iter().map(String::as_str).collect();
        let rows: Vec<_> = self.rows.iter().filter(|o| keep.contains(o.station_id.as_str())).cloned().collect();
        ClimateFrame {
            stations: rows.iter().map(|o| o.station_id.clone()).collect(),
            rows,
            diagnostics: self.diagnostics,
        }
    }

    /// One row per observation, empty cells for absent values.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SynopError> {
        let mut out = csv::Writer::from_writer(w);
        let table = |e: csv::Error| SynopError::Table(e.to_string());
        out.write_record(HEADER).map_err(table)?;
        for o in &self.rows {
            let time = o.observed_at.expect("frame rows are dated");
            out.write_record([
                o.station_id.clone(),
                time.to_rfc3339_opts(SecondsFormat::Secs, true),
                cell(o.wind_speed_kmh),
                cell(o.max_temp_c),
                cell(o.avg_temp_c),
                cell(o.rel_humidity_pct),
                cell(o.precip.map(|p| p.mm)),
                o.precip.map(|p| if p.trace { "1" } else { "0" }.to_string()).unwrap_or_default(),
                o.precip.and_then(|p| p.period).map(|p| p.to_string()).unwrap_or_default(),
                cell(o.pressure_hpa),
            ])
            .map_err(table)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a table written by [`ClimateFrame::write_csv`]. Wind direction
    /// and diagnostics are not part of the table.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, SynopError> {
        let mut input = csv::Reader::from_reader(r);
        let table = |e: csv::Error| SynopError::Table(e.to_string());
        if input.headers().map_err(table)?.iter().ne(HEADER) {
            return Err(SynopError::Table("unexpected header".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in input.records().enumerate() {
            let rec = rec.map_err(table)?;
            let line = i + 2;
            let time = DateTime::parse_from_rfc3339(&rec[1])
                .map_err(|e| SynopError::Table(format!("line {line}: {e}")))?
                .with_timezone(&Utc);
            let precip = match parse_cell(&rec[6], line)? {
                None => None,
                Some(mm) => Some(Precipitation {
                    mm,
                    trace: &rec[7] == "1",
                    period: if rec[8].is_empty() {
                        None
                    } else {
                        Some(rec[8].parse().map_err(|_| SynopError::Table(format!("line {line}: bad period")))?)
                    },
                }),
            };
            rows.push(SynopObservation {
                station_id: rec[0].to_string(),
                observed_at: Some(time),
                wind_speed_kmh: parse_cell(&rec[2], line)?,
                wind_direction_deg: None,
                max_temp_c: parse_cell(&rec[3], line)?,
                avg_temp_c: parse_cell(&rec[4], line)?,
                rel_humidity_pct: parse_cell(&rec[5], line)?,
                precip,
                pressure_hpa: parse_cell(&rec[9], line)?,
                diagnostics: ReportDiagnostics::default(),
            });
        }
        Ok(ClimateFrame {
            stations: rows.iter().map(|o| o.station_id.clone()).collect(),
            rows,
            diagnostics: FrameDiagnostics::default(),
        })
    }
}
