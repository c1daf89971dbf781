//! Comparison of the decoder against the hand-decoded golden corpus.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use crisis_pulse::synop::{observations_frame, parse_bulletin};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synop").join(name)
}

/// Tolerances for wind, tmax, tavg, rh and precipitation, in CSV column
/// order; pressure shares the temperature tolerance.
const TOL: [f64; 5] = [0.01, 0.05, 0.05, 0.5, 0.0];
const PRESSURE_TOL: f64 = 0.05;

pub struct Outcome {
    pub reports: usize,
    pub skipped: usize,
    pub mismatches: Vec<String>,
}

fn expected() -> HashMap<(String, String), csv::StringRecord> {
    let text = fs::read_to_string(fixture("golden_expected.csv")).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            ((rec[0].to_string(), rec[1].to_string()), rec)
        })
        .collect()
}

fn close(got: &str, want: &str, tol: f64) -> bool {
    match (got, want) {
        ("", "") => true,
        (g, w) if !g.is_empty() && !w.is_empty() => {
            let (g, w): (f64, f64) = (g.parse().unwrap(), w.parse().unwrap());
            (g - w).abs() <= tol
        }
        _ => false,
    }
}

/// Decodes `golden.txt` and lists every field that disagrees with
/// `golden_expected.csv`.
pub fn check() -> Outcome {
    let bulletin = parse_bulletin(&fs::read_to_string(fixture("golden.txt")).unwrap()).unwrap();
    let frame = observations_frame(&bulletin.reports);
    let want = expected();
    let mut mismatches = Vec::new();
    if frame.len() != want.len() {
        mismatches.push(format!("{} rows decoded, {} expected", frame.len(), want.len()));
    }
    let mut buf = Vec::new();
    frame.write_csv(&mut buf).unwrap();
    let mut got = csv::Reader::from_reader(buf.as_slice());
    let header = got.headers().unwrap().clone();
    for rec in got.records() {
        let rec = rec.unwrap();
        let key = (rec[0].to_string(), rec[1].to_string());
        let Some(w) = want.get(&key) else {
            mismatches.push(format!("{key:?} not expected"));
            continue;
        };
        let mut cols: Vec<(usize, f64)> = (2..7).zip(TOL).collect();
        cols.push((9, PRESSURE_TOL));
        for (col, tol) in cols {
            if !close(&rec[col], &w[col], tol) {
                mismatches.push(format!("{key:?} {}: {:?} vs {:?}", &header[col], &rec[col], &w[col]));
            }
        }
        for col in [7, 8] {
            if rec[col] != w[col] {
                mismatches.push(format!("{key:?} {}: {:?} vs {:?}", &header[col], &rec[col], &w[col]));
            }
        }
    }
    Outcome { reports: frame.len(), skipped: bulletin.skipped, mismatches }
}
