//! Decoding SYNOP text into a climate frame.
//!
//! cargo run --example synop_decode -- path/to/ogimet_export.txt

use std::path::PathBuf;

use crisis_pulse::synop::{decode_report, observations_frame, parse_bulletin_with, ParseOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synop/golden.txt")
    });
    let bulletin = parse_bulletin_with(&std::fs::read_to_string(&path)?, &ParseOptions::default())?;
    println!("{} reports, {} skipped", bulletin.reports.len(), bulletin.skipped);

    let first = &bulletin.reports[0];
    let obs = decode_report(first);
    println!("\nstation {} day {} hour {}", first.station_id, first.day, first.hour);
    println!("  wind       {:?} km/h from {:?} deg", obs.wind_speed_kmh, obs.wind_direction_deg);
    println!("  temp       {:?} C (max {:?})", obs.avg_temp_c, obs.max_temp_c);
    println!("  humidity   {:?} %", obs.rel_humidity_pct);
    println!("  precip     {:?}", obs.precip);
    println!("  pressure   {:?} hPa", obs.pressure_hpa);

    let frame = observations_frame(&bulletin.reports);
    println!("\nframe: {} rows from {:?}, {:?}\n", frame.len(), frame.stations, frame.diagnostics);
    frame.write_csv(std::io::stdout())?;
    Ok(())
}
