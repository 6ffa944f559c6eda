//! Pair questions with their accepted answers from a posts.xml dump.
//!
//! cargo run --example ingest_posts -- [posts.xml] [tag]

use std::path::PathBuf;

use qeck::qa::{pair_posts_file, qa_index};
use qeck::text::AnalyzerConfig;

fn main() -> qeck::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/planted/posts.xml"));
    let tag = args.next().unwrap_or_else(|| "android".into());

    let (pairs, pairing, parsing) = pair_posts_file(&path, &tag, [])?;
    println!("{parsing:?}");
    println!("{pairing:?}");
    for p in pairs.iter().take(5) {
        println!("  {:>5}  q={:<4} a={:<4} {}", p.pair_id, p.question_votes, p.answer_votes, p.title);
    }
    if pairs.len() > 5 {
        println!("  ... {} more", pairs.len() - 5);
    }

    let (index, report) = qa_index(&pairs, &AnalyzerConfig::default())?;
    println!("indexed {} pairs, vocabulary {}", report.indexed, index.vocabulary_size());
    Ok(())
}
