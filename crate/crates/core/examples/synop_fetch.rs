//! Downloading a day of SYNOP reports for one WMO block from OGIMET and
//! decoding them. Needs network access.
//!
//! cargo run --example synop_fetch -- 03 2020-11-12

use std::time::Duration;

use chrono::NaiveDate;
use crisis_pulse::synop::{fetch_ogimet, observations_frame, parse_bulletin, OgimetQuery, OGIMET_GETSYNOP};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let block = args.next().unwrap_or_else(|| "03".into());
    let day: NaiveDate = args.next().as_deref().unwrap_or("2020-11-12").parse()?;
    let query = OgimetQuery {
        block,
        begin: day.and_hms_opt(0, 0, 0).unwrap(),
        end: day.and_hms_opt(23, 59, 0).unwrap(),
    };
    println!("GET {}", query.url(OGIMET_GETSYNOP));
    let text = match fetch_ogimet(OGIMET_GETSYNOP, &query, Duration::from_secs(60)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let frame = observations_frame(&parse_bulletin(&text)?.reports);
    println!("{} observations from {} stations", frame.len(), frame.stations.len());
    Ok(())
}
