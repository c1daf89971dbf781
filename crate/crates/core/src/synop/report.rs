use chrono::{DateTime, Utc};

use super::groups::{
    decode_humidity, decode_precip, decode_pressure, decode_sea_level_pressure, decode_temperature, decode_wind,
    Precipitation,
};
use super::{SynopError, SynopReport};

const TEMP_RANGE: (f64, f64) = (-80.0, 60.0);
const PRESSURE_RANGE: (f64, f64) = (850.0, 1100.0);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReportDiagnostics {
    /// Groups that did not fit their layout.
    pub malformed_groups: u32,
    /// Decoded values outside the plausible range, dropped.
    pub out_of_range: u32,
    /// `4PPPP`, kept for inspection only.
    pub sea_level_pressure_hpa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynopObservation {
    pub station_id: String,
    pub observed_at: Option<DateTime<Utc>>,
    pub wind_speed_kmh: Option<f64>,
    pub wind_direction_deg: Option<u16>,
    pub max_temp_c: Option<f64>,
    pub avg_temp_c: Option<f64>,
    pub rel_humidity_pct: Option<f64>,
    pub precip: Option<Precipitation>,
    pub pressure_hpa: Option<f64>,
    pub diagnostics: ReportDiagnostics,
}

impl SynopObservation {
    fn empty(r: &SynopReport) -> Self {
        Self {
            station_id: r.station_id.clone(),
            observed_at: r.observed_at,
            wind_speed_kmh: None,
            wind_direction_deg: None,
            max_temp_c: None,
            avg_temp_c: None,
            rel_humidity_pct: None,
            precip: None,
            pressure_hpa: None,
            diagnostics: ReportDiagnostics::default(),
        }
    }
}

impl ReportDiagnostics {
    fn keep<T>(&mut self, r: Result<Option<T>, SynopError>) -> Option<T> {
        r.unwrap_or_else(|e| {
            log::debug!("{e}");
            self.malformed_groups += 1;
            None
        })
    }

    fn in_range(&mut self, v: Option<f64>, (lo, hi): (f64, f64)) -> Option<f64> {
        match v {
            Some(x) if !(lo..=hi).contains(&x) => {
                self.out_of_range += 1;
                None
            }
            v => v,
        }
    }
}

fn lead(g: &str) -> u8 {
    g.as_bytes()[0]
}

/// Decodes sections 1 and 3 of a report. Never fails: undecodable or
/// implausible groups leave their field absent and are counted in
/// [`SynopObservation::diagnostics`].
pub fn decode_report(report: &SynopReport) -> SynopObservation {
    let mut obs = SynopObservation::empty(report);
    let d = &mut obs.diagnostics;
    let s1 = &report.section1;

    let ir = s1.first().and_then(|g| g.chars().next()).and_then(|c| c.to_digit(10));
    let mut rest = s1.iter().skip(2).map(String::as_str).peekable();
    if let Some(nddff) = s1.get(1) {
        let extra = if nddff.get(3..5) == Some("99") && rest.peek().is_some_and(|g| g.starts_with("00")) {
            rest.next()
        } else {
            None
        };
        if let Some(w) = d.keep(decode_wind(nddff, extra, report.iw)) {
            obs.wind_speed_kmh = Some(w.speed_kmh);
            obs.wind_direction_deg = w.direction_deg;
        }
    }

    let (mut humidity, mut precip1) = (None, None);
    for g in rest {
        match lead(g) {
            b'1' if obs.avg_temp_c.is_none() => {
                let t = d.keep(decode_temperature(g));
                obs.avg_temp_c = d.in_range(t, TEMP_RANGE);
            }
            b'2' if humidity.is_none() => humidity = Some(g),
            b'3' if obs.pressure_hpa.is_none() => {
                let p = d.keep(decode_pressure(g));
                obs.pressure_hpa = d.in_range(p, PRESSURE_RANGE);
            }
            b'4' => d.sea_level_pressure_hpa = d.keep(decode_sea_level_pressure(g)),
            b'6' if precip1.is_none() => precip1 = d.keep(decode_precip(g)),
            _ => {}
        }
    }
    if let Some(g) = humidity {
        obs.rel_humidity_pct = d.keep(decode_humidity(obs.avg_temp_c, g));
    }

    // Section 3 groups come in ascending order of their lead digit, so a
    // 1-group after anything higher is a radiation group, not Tx.
    let mut precip3 = None;
    let mut past_tx = false;
    for g in &report.section3 {
        match lead(g) {
            b'1' if !past_tx && obs.max_temp_c.is_none() => {
                let t = d.keep(decode_temperature(g));
                obs.max_temp_c = d.in_range(t, TEMP_RANGE);
            }
            b'6' if precip3.is_none() => precip3 = d.keep(decode_precip(g)),
            _ => {}
        }
        past_tx |= lead(g) >= b'2';
    }

    obs.precip = match ir {
        Some(3) => Some(Precipitation { mm: 0.0, trace: false, period: None }),
        Some(4) => None,
        Some(1) => precip1,
        Some(2) => precip3,
        _ => precip1.or(precip3),
    };
    obs
}
