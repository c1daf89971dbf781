//! Filtered sets, known-account flags and positive shares for the fixture
//! messages.

use std::path::PathBuf;

use crisis_pulse::classify::{
    filter_pipeline, flag_known_accounts, AccountList, BaselineClassifier, FilterCategory, FilterItem,
};
use crisis_pulse::text::{read_messages, Preprocessor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline");
    let msgs = read_messages(dir.join("messages.jsonl"))?;
    let pre = Preprocessor::default();
    let docs: Vec<_> = msgs.iter().map(|m| pre.document(m)).collect();
    let items: Vec<FilterItem> =
        msgs.iter().zip(&docs).map(|(m, d)| FilterItem { id: &m.id, text: &m.text, doc: d }).collect();

    let outcome = filter_pipeline(&items, &BaselineClassifier::default())?;
    for c in FilterCategory::ALL {
        println!("{:<22} {:>4} messages", c.name(), outcome.get(c).len());
    }
    for c in [FilterCategory::Disaster, FilterCategory::DisasterMedical, FilterCategory::DisasterHumanitarian] {
        let share = outcome.positive_share(c);
        println!("positive within {:<22} {}/{} = {share}", c.name(), share.positive, share.total);
    }

    let accounts = AccountList::load(dir.join("accounts.txt"))?;
    let known = flag_known_accounts(&msgs, &accounts);
    let disaster = outcome.get(FilterCategory::Disaster);
    let missed = known.message_ids.iter().filter(|id| !disaster.contains(id)).count();
    println!("\n{} messages from {} listed accounts, {missed} not caught by the classifier", known.len(), accounts.len());
    Ok(())
}
