//! Single-group decoders. Each returns `Ok(None)` when the value carries a
//! `/` (not observed) and `Err` when the group does not fit its layout.

use super::SynopError;

pub const KNOT_KMH: f64 = 1.852;
pub const MS_KMH: f64 = 3.6;

// Magnus coefficients over water
const MAGNUS_A: f64 = 17.625;
const MAGNUS_B: f64 = 243.04;

fn malformed(group: &str, why: &str) -> SynopError {
    SynopError::MalformedGroup(format!("{group:?}: {why}"))
}

fn check(group: &str, lead: char) -> Result<(), SynopError> {
    if group.len() != 5 || !group.bytes().all(|b| b.is_ascii_digit() || b == b'/') {
        return Err(malformed(group, "not a 5-character group"));
    }
    if !group.starts_with(lead) {
        return Err(malformed(group, &format!("expected leading {lead}")));
    }
    Ok(())
}

/// Integer value of an all-digit field, `None` if any digit is `/`.
fn digits(s: &str) -> Option<u32> {
    if s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

/// Signed tenths from a `sTTT` field, `None` if any part is missing.
fn signed_tenths(group: &str) -> Result<Option<f64>, SynopError> {
    let sign = match &group[1..2] {
        "0" => 1.0,
        "1" => -1.0,
        "/" => return Ok(None),
        _ => return Err(malformed(group, "sign digit not 0 or 1")),
    };
    Ok(digits(&group[2..5]).map(|v| sign * (v as f64 / 10.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wind {
    pub speed_kmh: f64,
    /// Degrees; `None` for variable or unreported direction.
    pub direction_deg: Option<u16>,
}

pub fn knots_to_kmh(kt: f64) -> f64 {
    kt * KNOT_KMH
}

pub fn ms_to_kmh(ms: f64) -> f64 {
    ms * MS_KMH
}

/// `Nddff` (plus `00fff` when `ff` is 99) in the unit declared by `iw`.
pub fn decode_wind(nddff: &str, extra_00fff: Option<&str>, iw: Option<u8>) -> Result<Option<Wind>, SynopError> {
    check(nddff, nddff.chars().next().unwrap_or('x'))?;
    let to_kmh: fn(f64) -> f64 = match iw {
        Some(0 | 1) => ms_to_kmh,
        Some(3 | 4) => knots_to_kmh,
        None => return Ok(None),
        Some(other) => return Err(malformed(nddff, &format!("wind unit indicator {other}"))),
    };
    let speed = match digits(&nddff[3..5]) {
        None => return Ok(None),
        Some(99) => {
            let g = extra_00fff.ok_or_else(|| malformed(nddff, "ff=99 without 00fff group"))?;
            check(g, '0')?;
            if !g.starts_with("00") {
                return Err(malformed(g, "expected 00fff"));
            }
            match digits(&g[2..5]) {
                Some(v) => v,
                None => return Ok(None),
            }
        }
        Some(v) => v,
    };
    let direction_deg = match digits(&nddff[1..3]) {
        Some(dd @ 0..=36) => Some(dd as u16 * 10),
        Some(99) | None => None,
        Some(dd) => return Err(malformed(nddff, &format!("direction {dd}"))),
    };
    Ok(Some(Wind {
        speed_kmh: to_kmh(speed as f64),
        direction_deg,
    }))
}

/// `1sTTT` (air temperature, or maximum temperature in section 3).
pub fn decode_temperature(group: &str) -> Result<Option<f64>, SynopError> {
    check(group, '1')?;
    signed_tenths(group)
}

/// `3PPPP` station pressure in hPa; the thousands digit is implied.
pub fn decode_pressure(group: &str) -> Result<Option<f64>, SynopError> {
    check(group, '3')?;
    decode_pressure_digits(group)
}

/// `4PPPP` sea-level pressure. Groups giving a standard-level height
/// (`4a3hhh`, a3 in 1..=8) yield `None`.
pub fn decode_sea_level_pressure(group: &str) -> Result<Option<f64>, SynopError> {
    check(group, '4')?;
    match &group[1..2] {
        "0" | "9" => decode_pressure_digits(group),
        _ => Ok(None),
    }
}

fn decode_pressure_digits(group: &str) -> Result<Option<f64>, SynopError> {
    Ok(digits(&group[1..5]).map(|v| {
        let tenths = if v < 5000 { v + 10000 } else { v };
        tenths as f64 / 10.0
    }))
}

/// Relative humidity (%) from air and dewpoint temperature, Magnus form.
pub fn magnus_rh(temp_c: f64, dewpoint_c: f64) -> f64 {
    let e = |x: f64| (MAGNUS_A * x / (MAGNUS_B + x)).exp();
    100.0 * e(dewpoint_c) / e(temp_c)
}

/// `2snTdTdTd`: dewpoint (sn 0/1) converted through [`magnus_rh`], or
/// humidity given directly (sn 9). Clamped to `[0, 100]`.
pub fn decode_humidity(temp_c: Option<f64>, group: &str) -> Result<Option<f64>, SynopError> {
    check(group, '2')?;
    let rh = if &group[1..2] == "9" {
        digits(&group[2..5]).map(|v| v as f64)
    } else {
        match (temp_c, signed_tenths(group)?) {
            (Some(t), Some(td)) => Some(magnus_rh(t, td)),
            _ => None,
        }
    };
    Ok(rh.map(|v| v.clamp(0.0, 100.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precipitation {
    pub mm: f64,
    pub trace: bool,
    /// Reference period code `tR` (1 = 6 h, 2 = 12 h, 4 = 24 h, ...).
    pub period: Option<u8>,
}

/// `6RRRtR`.
pub fn decode_precip(group: &str) -> Result<Option<Precipitation>, SynopError> {
    check(group, '6')?;
    let period = digits(&group[4..5]).map(|p| p as u8);
    let (mm, trace) = match digits(&group[1..4]) {
        None | Some(989) => return Ok(None),
        Some(990) => (0.0, true),
        Some(v @ 991..=999) => ((v - 990) as f64 / 10.0, false),
        Some(v) => (v as f64, false),
    };
    Ok(Some(Precipitation { mm, trace, period }))
}

/// Inverse of [`decode_temperature`] for values with one decimal.
pub fn encode_temperature(t: f64) -> String {
    let tenths = (t * 10.0).round() as i64;
    format!("1{}{:03}", if tenths < 0 { 1 } else { 0 }, tenths.abs())
}

/// Inverse of [`decode_pressure`] for 500.0..=1499.9 hPa.
pub fn encode_pressure(p: f64) -> String {
    let tenths = (p * 10.0).round() as i64;
    format!("3{:04}", tenths % 10000)
}
