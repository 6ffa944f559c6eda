//! Baseline BM25 versus the expanded query on the bundled planted corpus.
//!
//! cargo run --example qeck_search -- "take screenshot"

use std::path::Path;

use qeck::code::{code_index, read_snippets_jsonl};
use qeck::engine::{QeckConfig, QeckEngine};
use qeck::qa::{pair_posts_file, qa_index};
use qeck::text::AnalyzerConfig;

fn main() -> qeck::Result<()> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "take screenshot".into());
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/planted");
    let analyzer = AnalyzerConfig::default();

    let (pairs, _, _) = pair_posts_file(data.join("posts.xml"), "android", [])?;
    let (qa, _) = qa_index(&pairs, &analyzer)?;
    let (code, _) = code_index(&read_snippets_jsonl(data.join("snippets.jsonl"))?, &analyzer)?;
    let engine = QeckEngine::new(qa, code, analyzer)?;
    let config = QeckConfig::default();

    println!("query: {query}\n\nbaseline:");
    for hit in engine.baseline(&query, config.k)? {
        println!("  {:>2}. {:.4}  {}", hit.rank, hit.score, hit.doc_id);
    }

    let out = engine.search(&query, &config)?;
    println!("\nfeedback pairs:");
    for p in &out.feedback.entries {
        println!(
            "  {:>4}  L={:.4} S={:>6.1} final={:.4}",
            p.pair_id, p.lucene_score, p.so_score, p.final_score
        );
    }
    println!("\nexpansion terms:");
    for t in &out.expanded.expansion {
        println!("  {:<12} {:.4}", t.term, t.weight);
    }
    println!("\nexpanded query:");
    for hit in &out.hits {
        println!("  {:>2}. {:.4}  {}", hit.rank, hit.score, hit.doc_id);
    }
    Ok(())
}
