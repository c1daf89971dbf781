//! Lexicon scores for sentiment, relevance, the behavioral indicators and
//! disaster phases.

use crisis_pulse::classify::{
    behavioral_profile, classify_binary, classify_sentiment, phase_categorize, Category, Indicator, LexiconSet,
};
use crisis_pulse::classify::baseline::DEFAULT_BINARY_THRESHOLD;
use crisis_pulse::text::{preprocess_document, RawMessage, Stopwords};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lex = LexiconSet::bundled();
    let texts = [
        "Thank you to the brave rescue teams, everyone is safe now",
        "Ambulance crews treating injured people after the river burst its banks",
        "Sandbags handed out, prepare your emergency plan before the storm",
        "lovely sunny afternoon in the park",
    ];
    for (i, text) in texts.iter().enumerate() {
        let msg = RawMessage {
            id: i.to_string(),
            timestamp: chrono::Utc::now(),
            author: "example".into(),
            text: text.to_string(),
            is_retweet: false,
        };
        let doc = preprocess_document(&msg, &Stopwords::english());
        println!("{text}");
        let s = classify_sentiment(&doc, lex.get(Indicator::Sentiment)?)?;
        println!("  sentiment    {:<14} {:.2?}", s.dominant(), s.to_map());
        for c in Category::ALL {
            let (relevant, score) = classify_binary(&doc, c, lex.get(Indicator::Binary(c))?, DEFAULT_BINARY_THRESHOLD)?;
            println!("  {:<12} relevant={relevant} score={score:.2}", c.name());
        }
        for (ind, scores) in behavioral_profile(&doc, &lex)? {
            println!("  {:<12} {}", ind.to_string(), scores.dominant());
        }
        println!("  phase        {}\n", phase_categorize(&doc, lex.get(Indicator::Phase)?)?.dominant());
    }
    Ok(())
}
