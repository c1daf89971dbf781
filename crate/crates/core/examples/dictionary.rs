//! Dictionary, bag-of-words and TF-IDF vectors, term frequencies and key
//! bigrams over the fixture messages.

use std::path::PathBuf;

use crisis_pulse::corpus::{build_dictionary, key_bigrams, term_frequencies, tfidf_corpus, to_bow, DictionaryParams};
use crisis_pulse::text::{read_messages, Preprocessor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline/messages.jsonl")
    });
    let msgs = read_messages(&path)?;
    let pre = Preprocessor::default();
    let docs: Vec<_> = msgs.iter().map(|m| pre.document(m)).collect();

    let params = DictionaryParams { min_docs: 3, max_frac: 0.5, keep_n: 1000 };
    let dict = build_dictionary(&docs, params)?;
    println!("{} messages, {} dictionary tokens", msgs.len(), dict.len());

    let bows: Vec<_> = docs.iter().map(|d| to_bow(d, &dict)).collect();
    let tfidf = tfidf_corpus(&bows, &dict);
    let first = bows.iter().position(|b| !b.is_empty()).unwrap_or(0);
    let show = |v: &crisis_pulse::corpus::BowVector| -> String {
        v.entries.iter().map(|(id, w)| format!("{}:{w:.3}", dict.token(*id).unwrap())).collect::<Vec<_>>().join(" ")
    };
    println!("\n\"{}\"", msgs[first].text);
    println!("  bow    {}", show(&bows[first]));
    println!("  tf-idf {}", show(&tfidf[first]));

    println!("\ntop terms");
    for (t, c) in term_frequencies(&docs, 10) {
        println!("  {t:<12} {c}");
    }
    println!("\nkey bigrams");
    for (b, c) in key_bigrams(&docs, 3, 10) {
        println!("  {b:<24} {c}");
    }
    Ok(())
}
