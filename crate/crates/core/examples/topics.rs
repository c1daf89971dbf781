//! LDA over the fixture messages: training, top terms, perplexity and
//! fold-in inference for an unseen message.

use std::path::PathBuf;

use crisis_pulse::corpus::{build_dictionary, to_bow, BowVector, DictionaryParams};
use crisis_pulse::lda::{train_lda_traced, LdaParams};
use crisis_pulse::text::{read_messages, Preprocessor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline/messages.jsonl");
    let pre = Preprocessor::default();
    let docs: Vec<_> = read_messages(path)?.iter().map(|m| pre.document(m)).collect();
    let dict = build_dictionary(&docs, DictionaryParams { min_docs: 3, max_frac: 0.5, keep_n: 1000 })?;
    let corpus: Vec<BowVector> = docs.iter().map(|d| to_bow(d, &dict)).filter(|b| !b.is_empty()).collect();

    let params = LdaParams { topics: 4, alpha: 0.1, beta: 0.01, iterations: 300, seed: 7 };
    let (model, trace) = train_lda_traced(&corpus, dict.len(), params)?;
    println!("perplexity after 1, 10, 100, 300 sweeps: {:.1} {:.1} {:.1} {:.1}", trace[0], trace[9], trace[99], trace[299]);

    for k in 0..model.topics() {
        let terms: Vec<String> = model
            .top_terms(k, 8)?
            .into_iter()
            .map(|(id, p)| format!("{} ({p:.3})", dict.token(id).unwrap()))
            .collect();
        println!("topic {k}: {}", terms.join(", "));
    }

    let unseen = pre.tokens("River levels rising, flood warning for the valley");
    let bow = BowVector::from_pairs(unseen.iter().filter_map(|t| dict.id(t)).map(|id| (id, 1.0)));
    let a = model.infer_topic(&bow, 50, 1)?;
    println!("\nunseen message -> topic {} (p = {:.2}), theta {:.2?}", a.topic_id, a.probability, a.theta);
    Ok(())
}
