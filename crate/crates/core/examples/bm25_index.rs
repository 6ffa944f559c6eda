//! Build a small BM25 index, save it, load it back and query it.

use qeck::index::{DocumentRecord, InvertedIndex};
use qeck::text::{analyze, AnalyzerConfig};

fn main() -> qeck::Result<()> {
    let config = AnalyzerConfig::default();
    let docs = [
        ("d1", "Read a file line by line with a BufferedReader"),
        ("d2", "Write bytes to a file using FileOutputStream"),
        ("d3", "Parse JSON from a string with a JSONObject"),
        ("d4", "Read JSON from a file and parse it"),
    ];

    let dir = std::env::temp_dir().join(format!("qeck-bm25-example-{}", std::process::id()));
    let mut index = InvertedIndex::create(&dir, config.fingerprint());
    for (id, text) in docs {
        index.add_document(DocumentRecord::new(id, analyze(text, &config)).with_field("text", text))?;
    }
    index.commit()?;
    println!("{} documents, mean length {:.2}", index.doc_count(), index.avg_doc_length());

    let loaded = InvertedIndex::open(&dir)?;
    for query in ["read file", "parse json", "network socket"] {
        println!("\n{query}:");
        for hit in loaded.bm25_search(&analyze(query, &config), 10)? {
            let text = &loaded.document(&hit.doc_id).unwrap().fields["text"];
            println!("  {}. {:.4}  {}  {}", hit.rank, hit.score, hit.doc_id, text);
        }
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
