//! Cleaning, tokenizing and stemming a few raw messages.
//!
//! cargo run --example preprocess -- "RT @metoffice: Flood warnings &amp; road closures http://t.co/x #StormBella :("

use crisis_pulse::text::{normalize, stem, tokenize, Preprocessor, Stopwords, DEFAULT_MIN_LEN};

fn main() {
    let mut texts: Vec<String> = std::env::args().skip(1).collect();
    if texts.is_empty() {
        texts = vec![
            "RT @EnvAgency: Severe flood warnings in place for the River Severn &amp; the Wye http://t.co/abc #floods".into(),
            "<b>Heatwave</b> alert!!! Stay hydrated :) 🌞 https://example.org/heat".into(),
            "Volunteers needed at the shelter tonight, bring blankets #StormBella".into(),
        ];
    }
    let stopwords = Stopwords::english();
    let pre = Preprocessor::default();
    for t in &texts {
        let clean = normalize(t);
        let tokens = tokenize(&clean, &stopwords, DEFAULT_MIN_LEN);
        let stems: Vec<String> = tokens.iter().map(|w| stem(w)).collect();
        assert_eq!(stems, pre.tokens(t));
        println!("raw:    {t}");
        println!("clean:  {clean}");
        println!("tokens: {}", tokens.join(" "));
        println!("stems:  {}\n", stems.join(" "));
    }
}
