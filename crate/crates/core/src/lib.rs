//! Code search with query expansion mined from Stack Overflow Q&A pairs.
//!
//! A free-form query is first run against an index of question/accepted-answer
//! pairs. The best pairs (ranked by a fusion of BM25 similarity and crowd
//! votes) serve as pseudo relevance feedback: their most informative terms
//! are appended to the query, which is then run against an index of
//! method-level Java code snippets.
//!
//! * [`text`]: tokenization, stop words, Porter stemming
//! * [`index`]: BM25 inverted index with on-disk persistence
//! * [`qa`]: `posts.xml` parsing, Q&A pairing, Q&A index building
//! * [`code`]: Java method segmentation and code index building
//! * [`engine`]: the two-pass expansion pipeline
//! * [`eval`]: Precision@K, NDCG@K, summary statistics, Wilcoxon test
//! * [`sweep`]: parameter sweeps over the expansion settings
//! * [`cli`]: the `qeck` command-line tool

pub mod cli;
pub mod code;
pub mod engine;
pub mod error;
pub mod eval;
pub mod index;
pub mod qa;
pub mod sweep;
pub mod text;

pub use error::{Error, Result};
