use std::time::Duration;

use chrono::NaiveDateTime;

use super::SynopError;

pub const OGIMET_GETSYNOP: &str = "https://www.ogimet.com/cgi-bin/getsynop";

/// A `getsynop` request: WMO block or station prefix and a UTC window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OgimetQuery {
    pub block: String,
    pub begin: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl OgimetQuery {
    pub fn url(&self, base: &str) -> String {
        let f = "%Y%m%d%H%M";
        format!("{base}?block={}&begin={}&end={}", self.block, self.begin.format(f), self.end.format(f))
    }
}

/// Downloads the raw export. The body is returned untouched so it can be
/// archived verbatim and parsed later.
pub fn fetch_ogimet(base: &str, query: &OgimetQuery, timeout: Duration) -> Result<String, SynopError> {
    if query.block.is_empty() || !query.block.bytes().all(|b| b.is_ascii_digit()) {
        return Err(SynopError::Fetch(format!("invalid block {:?}", query.block)));
    }
    if query.end < query.begin {
        return Err(SynopError::Fetch("end precedes begin".into()));
    }
    let fetch = |e: reqwest::Error| SynopError::Fetch(e.to_string());
    let client = reqwest::blocking::Client::builder().timeout(timeout).build().map_err(fetch)?;
    let resp = client.get(query.url(base)).send().map_err(fetch)?;
    let status = resp.status();
    if !status.is_success() {
        return Err(SynopError::Fetch(format!("server answered {status}")));
    }
    resp.text().map_err(fetch)
}
