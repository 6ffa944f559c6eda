//! Compare the expanded and the baseline runs on the planted queries.

use std::path::Path;

use qeck::code::{code_index, read_snippets_jsonl};
use qeck::engine::{read_queries, QeckConfig, QeckEngine};
use qeck::eval::{evaluate_runs, format_table, read_judgments_csv};
use qeck::qa::{pair_posts_file, qa_index};
use qeck::text::AnalyzerConfig;

fn main() -> qeck::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/planted");
    let analyzer = AnalyzerConfig::default();
    let (pairs, _, _) = pair_posts_file(data.join("posts.xml"), "android", [])?;
    let (qa, _) = qa_index(&pairs, &analyzer)?;
    let (code, _) = code_index(&read_snippets_jsonl(data.join("snippets.jsonl"))?, &analyzer)?;
    let engine = QeckEngine::new(qa, code, analyzer)?;

    let queries = read_queries(data.join("queries.tsv"))?;
    let judgments = read_judgments_csv(data.join("judgments.csv"))?;
    let config = QeckConfig::default();
    let runs = vec![
        ("qeck".to_string(), engine.ranked_ids(&queries, &config, false)?),
        ("baseline".to_string(), engine.ranked_ids(&queries, &config, true)?),
    ];
    let report = evaluate_runs(&runs, &judgments, config.k)?;

    for run in &report.runs {
        println!("{}:", run.name);
        for q in &run.per_query {
            println!("  {}  P@{} {:.2}  NDCG@{} {:.4}", q.query_id, q.k, q.precision_at_k, q.k, q.ndcg_at_k);
        }
    }
    println!();
    print!("{}", format_table(&report));
    Ok(())
}
