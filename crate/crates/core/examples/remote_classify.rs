//! Classification through a remote `/classify` service, falling back to the
//! lexicon baseline when the service cannot be reached.
//!
//! cargo run --example remote_classify -- http://localhost:8000

use std::time::Duration;

use crisis_pulse::classify::remote::WithFallback;
use crisis_pulse::classify::{remote_classify, BaselineClassifier, FilterItem, Indicator, RemoteClassifier};
use crisis_pulse::pipeline::REMOTE_ENV;
use crisis_pulse::text::{Preprocessor, TokenizedDoc};

fn main() {
    let url = std::env::var(REMOTE_ENV)
        .ok()
        .or_else(|| std::env::args().nth(1))
        .unwrap_or_else(|| "http://127.0.0.1:8000".into());
    let texts = ["flood warning issued for the river valley", "great coffee this morning"];

    match remote_classify(texts[0], &[Indicator::Sentiment, Indicator::Binary(crisis_pulse::classify::Category::Disaster)], &url, Duration::from_secs(5)) {
        Ok(r) => {
            for (ind, s) in r {
                println!("{ind}: {} {:.3?}", s.dominant(), s.to_map());
            }
        }
        Err(e) => println!("{url}: {e}"),
    }

    let pre = Preprocessor::default();
    let docs: Vec<TokenizedDoc> = texts.iter().map(|t| TokenizedDoc { message_id: t.to_string(), tokens: pre.tokens(t), token_ids: vec![] }).collect();
    let items: Vec<FilterItem> = texts.iter().zip(&docs).map(|(t, d)| FilterItem { id: &d.message_id, text: t, doc: d }).collect();
    let c = WithFallback { remote: RemoteClassifier::new(url), local: BaselineClassifier::default() };
    match c.classify(&items) {
        Ok((verdicts, source)) => {
            println!("\nverdicts from {source:?}");
            for (t, v) in texts.iter().zip(verdicts) {
                println!("  {t}: {v:?}");
            }
        }
        Err(e) => println!("classification failed: {e}"),
    }
}
