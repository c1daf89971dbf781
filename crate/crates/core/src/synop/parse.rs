//! Splitting bulletins into reports.
//!
//! Accepted layouts, freely mixed:
//! - raw FM-12 text, `=`-terminated, one `AAXX YYGGiw` header per report or
//!   one per bulletin followed by bare station reports;
//! - OGIMET `getsynop` lines `IIiii,YYYY,MM,DD,HH,mm,AAXX ...=`;
//! - a `YYYY/MM/DD HH:MM` line giving year and month for what follows.
//!
//! `YYGG` only carries day and hour, so a report gets a full timestamp only
//! when one of the above (or [`ParseOptions::reference_month`]) supplies the
//! rest.

use std::sync::LazyLock;

use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use regex::Regex;

use super::{SynopError, SynopReport};

static CSV_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d{5}),(\d{4}),(\d{1,2}),(\d{1,2}),(\d{1,2}),(\d{1,2}),(.*)$").unwrap());
static DATE_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{4})/(\d{2})/\d{2} \d{2}:\d{2}$").unwrap());

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// `(year, month)` for reports with no other date context.
    pub reference_month: Option<(i32, u32)>,
}

#[derive(Debug, Clone, Default)]
pub struct Bulletin {
    pub reports: Vec<SynopReport>,
    /// Messages that could not be parsed, including `NIL` reports.
    pub skipped: usize,
}

pub fn parse_bulletin(text: &str) -> Result<Bulletin, SynopError> {
    parse_bulletin_with(text, &ParseOptions::default())
}

#[derive(Default)]
struct Pending {
    tokens: Vec<String>,
    stamp: Option<DateTime<Utc>>,
    month: Option<(i32, u32)>,
}

struct Parser<'o> {
    opts: &'o ParseOptions,
    out: Bulletin,
    header_month: Option<(i32, u32)>,
    active_yygg: Option<String>,
    pending: Pending,
}

impl Parser<'_> {
    fn push(&mut self, token: &str, stamp: Option<DateTime<Utc>>) {
        if self.pending.tokens.is_empty() {
            self.pending.stamp = stamp;
            self.pending.month = self.header_month.or(self.opts.reference_month);
        }
        self.pending.tokens.push(token.to_string());
    }

    fn finish(&mut self) {
        let p = std::mem::take(&mut self.pending);
        if p.tokens.is_empty() {
            return;
        }
        match self.build(p) {
            Some(r) => self.out.reports.push(r),
            None => self.out.skipped += 1,
        }
    }

    fn build(&mut self, p: Pending) -> Option<SynopReport> {
        let mut toks = p.tokens.as_slice();
        if let Some(i) = toks.iter().position(|t| t == "AAXX") {
            toks = &toks[i + 1..];
            self.active_yygg = Some(toks.first()?.clone());
            toks = &toks[1..];
        }
        let yygg = self.active_yygg.clone()?;
        let (station, rest) = toks.split_first()?;
        if yygg.len() != 5 || !is_digits(&yygg[..4]) || !is_digits(station) || station.len() != 5 {
            return None;
        }
        if rest.iter().any(|t| t == "NIL") {
            return None;
        }
        let day: u32 = yygg[..2].parse().ok()?;
        let hour: u32 = yygg[2..4].parse().ok()?;
        if !(1..=31).contains(&day) || hour > 23 {
            return None;
        }
        let iw = match yygg.as_bytes()[4] {
            b'/' => None,
            b @ b'0'..=b'9' => Some(b - b'0'),
            _ => return None,
        };

        let mut section1 = Vec::new();
        let mut section3 = Vec::new();
        let mut section = 1;
        for t in rest {
            match t.as_str() {
                "333" => section = 3,
                "444" | "555" => section = 0,
                t if t.starts_with("222") => section = 2,
                t if section == 1 || section == 3 => {
                    if t.len() != 5 || !t.bytes().all(|b| b.is_ascii_digit() || b == b'/') {
                        return None;
                    }
                    if section == 1 { &mut section1 } else { &mut section3 }.push(t.to_string());
                }
                _ => {}
            }
        }

        let observed_at = match (p.stamp, p.month) {
            (Some(s), _) => Some(s),
            (None, Some((y, m))) => Some(NaiveDate::from_ymd_opt(y, m, day)?.and_hms_opt(hour, 0, 0)?.and_utc()),
            (None, None) => None,
        };
        Some(SynopReport {
            station_id: station.clone(),
            day,
            hour,
            observed_at,
            iw,
            section0: vec![yygg, station.clone()],
            section1,
            section3,
        })
    }
}

fn is_digits(s: &str) -> bool {
    s.bytes().all(|b| b.is_ascii_digit())
}

pub fn parse_bulletin_with(text: &str, opts: &ParseOptions) -> Result<Bulletin, SynopError> {
    let mut p = Parser {
        opts,
        out: Bulletin::default(),
        header_month: None,
        active_yygg: None,
        pending: Pending::default(),
    };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = DATE_LINE.captures(line) {
            p.header_month = Some((c[1].parse().unwrap(), c[2].parse().unwrap()));
            continue;
        }
        let (content, stamp) = match CSV_LINE.captures(line) {
            Some(c) => {
                if !p.pending.tokens.is_empty() {
                    // an unterminated message before a new export line
                    p.pending = Pending::default();
                    p.out.skipped += 1;
                }
                let n = |i: usize| c[i].parse::<u32>().unwrap();
                match Utc.with_ymd_and_hms(c[2].parse().unwrap(), n(3), n(4), n(5), n(6), 0).single() {
                    Some(s) => (c.get(7).unwrap().as_str(), Some(s)),
                    None => {
                        p.out.skipped += 1;
                        continue;
                    }
                }
            }
            None => (line, None),
        };
        for tok in content.split_whitespace() {
            let mut parts = tok.split('=');
            if let Some(first) = parts.next().filter(|s| !s.is_empty()) {
                p.push(first, stamp);
            }
            for part in parts {
                p.finish();
                if !part.is_empty() {
                    p.push(part, stamp);
                }
            }
        }
    }
    if !p.pending.tokens.is_empty() {
        p.out.skipped += 1;
    }
    if p.out.reports.is_empty() {
        return Err(SynopError::NoReportsFound { skipped: p.out.skipped });
    }
    Ok(p.out)
}
