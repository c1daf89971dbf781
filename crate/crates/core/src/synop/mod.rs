//! FM-12 SYNOP decoding into the six climate variables used for alignment:
//! wind speed, maximum and air temperature, relative humidity,
//! precipitation and station pressure.
//!
//! ```
//! use crisis_pulse::synop::{decode_report, parse_bulletin};
//!
//! let b = parse_bulletin("AAXX 11124 03772 41450 52015 10182 20125 30147=").unwrap();
//! let obs = decode_report(&b.reports[0]);
//! assert_eq!(obs.avg_temp_c, Some(18.2));
//! assert_eq!(obs.pressure_hpa, Some(1014.7));
//! ```

mod fetch;
mod frame;
mod groups;
mod parse;
mod report;

pub use fetch::{fetch_ogimet, OgimetQuery, OGIMET_GETSYNOP};
pub use frame::{observations_frame, ClimateFrame, FrameDiagnostics};
pub use groups::{
    decode_humidity, decode_precip, decode_pressure, decode_sea_level_pressure, decode_temperature, decode_wind,
    encode_pressure, encode_temperature, knots_to_kmh, magnus_rh, ms_to_kmh, Precipitation, Wind, KNOT_KMH, MS_KMH,
};
pub use parse::{parse_bulletin, parse_bulletin_with, Bulletin, ParseOptions};
pub use report::{decode_report, ReportDiagnostics, SynopObservation};

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};

#[derive(Debug, thiserror::Error)]
pub enum SynopError {
    #[error("no SYNOP reports found ({skipped} malformed messages skipped)")]
    NoReportsFound { skipped: usize },
    #[error("malformed group {0}")]
    MalformedGroup(String),
    #[error("climate table: {0}")]
    Table(String),
    #[error("fetch failed: {0}")]
    Fetch(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// One land-station report, split into its sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynopReport {
    pub station_id: String,
    /// Day of month and hour from `YYGG`.
    pub day: u32,
    pub hour: u32,
    /// Full observation time when the bulletin supplies year and month.
    pub observed_at: Option<DateTime<Utc>>,
    /// Wind unit indicator; `None` when reported as `/`.
    pub iw: Option<u8>,
    /// `YYGGiw` and `IIiii`.
    pub section0: Vec<String>,
    pub section1: Vec<String>,
    pub section3: Vec<String>,
}

/// The six climate variables, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClimateVariable {
    WindKmh,
    MaxTempC,
    AvgTempC,
    RelHumidityPct,
    PrecipMm,
    PressureHpa,
}

impl ClimateVariable {
    pub const ALL: [ClimateVariable; 6] = [
        ClimateVariable::WindKmh,
        ClimateVariable::MaxTempC,
        ClimateVariable::AvgTempC,
        ClimateVariable::RelHumidityPct,
        ClimateVariable::PrecipMm,
        ClimateVariable::PressureHpa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClimateVariable::WindKmh => "wind_kmh",
            ClimateVariable::MaxTempC => "tmax_c",
            ClimateVariable::AvgTempC => "tavg_c",
            ClimateVariable::RelHumidityPct => "rh_pct",
            ClimateVariable::PrecipMm => "precip_mm",
            ClimateVariable::PressureHpa => "pressure_hpa",
        }
    }

    pub fn get(self, obs: &SynopObservation) -> Option<f64> {
        match self {
            ClimateVariable::WindKmh => obs.wind_speed_kmh,
            ClimateVariable::MaxTempC => obs.max_temp_c,
            ClimateVariable::AvgTempC => obs.avg_temp_c,
            ClimateVariable::RelHumidityPct => obs.rel_humidity_pct,
            ClimateVariable::PrecipMm => obs.precip.map(|p| p.mm),
            ClimateVariable::PressureHpa => obs.pressure_hpa,
        }
    }
}

impl fmt::Display for ClimateVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClimateVariable {
    type Err = SynopError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| SynopError::Table(format!("unknown climate variable {s:?}")))
    }
}
