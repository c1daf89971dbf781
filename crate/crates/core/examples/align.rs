//! Hourly message activity next to decoded weather, with correlations and
//! plot data.

use std::collections::HashMap;
use std::path::PathBuf;

use crisis_pulse::align::{align_frames, bucket_activity, correlation_table, emit_plot_data, parse_bucket, StationAgg};
use crisis_pulse::classify::{filter_pipeline, BaselineClassifier, FilterCategory, FilterItem};
use crisis_pulse::synop::{observations_frame, parse_bulletin, ClimateVariable};
use crisis_pulse::text::{read_messages, Preprocessor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline");
    let msgs = read_messages(dir.join("messages.jsonl"))?;
    let pre = Preprocessor::default();
    let docs: Vec<_> = msgs.iter().map(|m| pre.document(m)).collect();
    let items: Vec<FilterItem> =
        msgs.iter().zip(&docs).map(|(m, d)| FilterItem { id: &m.id, text: &m.text, doc: d }).collect();
    let outcome = filter_pipeline(&items, &BaselineClassifier::default())?;
    let labels: HashMap<String, String> = outcome
        .get(FilterCategory::Disaster)
        .message_ids
        .iter()
        .map(|id| (id.clone(), "disaster".to_string()))
        .collect();

    let activity = bucket_activity(&msgs, &labels, parse_bucket("3h")?);
    let climate = observations_frame(&parse_bulletin(&std::fs::read_to_string(dir.join("synop.txt"))?)?.reports);
    let vars = [ClimateVariable::WindKmh, ClimateVariable::PressureHpa, ClimateVariable::PrecipMm];
    let frame = align_frames(&activity, &climate, &vars, StationAgg::Mean)?;
    println!("{} aligned 3-hour buckets, {} dropped\n", frame.len(), frame.dropped);
    print!("{}", emit_plot_data(&frame)?);
    println!();
    for (a, b, r) in correlation_table(&frame) {
        match r {
            Some(r) => println!("r({a}, {b}) = {r:+.3}"),
            None => println!("r({a}, {b}) undefined"),
        }
    }
    Ok(())
}
