//! Mean Precision@10 and NDCG@10 as the number of expansion terms (or
//! feedback pairs) varies.
//!
//! cargo run --example parameter_sweep -- [n|m]

use std::path::Path;

use qeck::code::{code_index, read_snippets_jsonl};
use qeck::engine::{read_queries, QeckConfig, QeckEngine};
use qeck::eval::read_judgments_csv;
use qeck::qa::{pair_posts_file, qa_index};
use qeck::sweep::{default_values, format_sweep_table, sweep, SweepParam};
use qeck::text::AnalyzerConfig;

fn main() -> qeck::Result<()> {
    let param: SweepParam = std::env::args().nth(1).as_deref().unwrap_or("n").parse()?;
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/planted");
    let analyzer = AnalyzerConfig::default();
    let (pairs, _, _) = pair_posts_file(data.join("posts.xml"), "android", [])?;
    let (qa, _) = qa_index(&pairs, &analyzer)?;
    let (code, _) = code_index(&read_snippets_jsonl(data.join("snippets.jsonl"))?, &analyzer)?;
    let engine = QeckEngine::new(qa, code, analyzer)?;

    let queries = read_queries(data.join("queries.tsv"))?;
    let judgments = read_judgments_csv(data.join("judgments.csv"))?;
    let report = sweep(&engine, &queries, &judgments, &QeckConfig::default(), param, &default_values())?;
    print!("{}", format_sweep_table(&report));
    Ok(())
}
