//! Tokenize, filter and stem text the way both indexes see it.
//!
//! cargo run --example analyze_text -- "getDrawingCache() on the rootView"

use qeck::text::{analyze, stem, tokenize, AnalyzerConfig};

fn main() {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "How do I take a screenshot? Call rootView.getDrawingCache() and save the Bitmap".into());
    let config = AnalyzerConfig::default();

    let tokens = tokenize(&text, &config);
    println!("tokens:  {}", tokens.join(" "));
    let stems: Vec<String> = tokens.iter().map(|t| stem(t)).collect();
    println!("stemmed: {}", stems.join(" "));
    println!("terms:   {}", analyze(&text, &config).0.join(" "));
    println!("analyzer fingerprint {}", config.fingerprint());
}
