//! Q&A pair collection: joins questions with their accepted answers and
//! indexes the result.

pub mod html;
pub mod posts;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{store, DocumentRecord, IndexStats, InvertedIndex};
use crate::text::{analyze, AnalyzerConfig};

pub use html::strip_html;
pub use posts::{parse_posts, ParseCounters, PostReader, PostType, RawPost};

pub const QUESTION_WEIGHT: f64 = 0.7;
pub const ANSWER_WEIGHT: f64 = 0.3;

/// Stored field names in the Q&A index.
pub mod fields {
    pub const PAIR_ID: &str = "pair_id";
    pub const QUESTION_VOTES: &str = "question_votes";
    pub const ANSWER_VOTES: &str = "answer_votes";
    pub const TITLE: &str = "title";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAPair {
    pub pair_id: String,
    pub question_id: i64,
    pub answer_id: i64,
    pub title: String,
    pub question_text: String,
    pub answer_text: String,
    pub tags: Vec<String>,
    pub question_votes: i64,
    pub answer_votes: i64,
}

/// Crowd quality of a pair: 0.7 * question votes + 0.3 * answer votes.
pub fn so_score(pair: &QAPair) -> f64 {
    weighted_votes(pair.question_votes, pair.answer_votes, QUESTION_WEIGHT, ANSWER_WEIGHT)
}

pub fn weighted_votes(question_votes: i64, answer_votes: i64, qw: f64, aw: f64) -> f64 {
    qw * question_votes as f64 + aw * answer_votes as f64
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounters {
    pub questions: usize,
    pub answers: usize,
    pub questions_without_tag: usize,
    pub questions_without_accepted: usize,
    pub accepted_answer_missing: usize,
    pub parent_mismatch: usize,
    pub excluded: usize,
    pub pairs: usize,
}

struct PendingQuestion {
    title: String,
    body: String,
    tags: Vec<String>,
    votes: i64,
    accepted: i64,
}

/// Two-pass join of questions to their accepted answers.
///
/// Feed every post to [`observe_question`](Self::observe_question), then
/// every post again to [`observe_answer`](Self::observe_answer), then call
/// [`finish`](Self::finish). Dumps do not guarantee that a question precedes
/// its answers, so the accepted-answer targets are collected first.
pub struct Pairer {
    tag: String,
    exclude: BTreeSet<i64>,
    questions: BTreeMap<i64, PendingQuestion>,
    targets: HashMap<i64, i64>,
    answers: HashMap<i64, (String, i64)>,
    mismatched: BTreeSet<i64>,
    counters: PairCounters,
}

impl Pairer {
    pub fn new(tag_filter: &str) -> Self {
        Pairer {
            tag: tag_filter.to_lowercase(),
            exclude: BTreeSet::new(),
            questions: BTreeMap::new(),
            targets: HashMap::new(),
            answers: HashMap::new(),
            mismatched: BTreeSet::new(),
            counters: PairCounters::default(),
        }
    }

    /// Post ids (question or answer) whose pairs must not be emitted.
    pub fn exclude(mut self, ids: impl IntoIterator<Item = i64>) -> Self {
        self.exclude.extend(ids);
        self
    }

    pub fn observe_question(&mut self, post: &RawPost) {
        if post.post_type != PostType::Question {
            return;
        }
        self.counters.questions += 1;
        if !post.tags.contains(&self.tag) {
            self.counters.questions_without_tag += 1;
            return;
        }
        let Some(accepted) = post.accepted_answer_id else {
            self.counters.questions_without_accepted += 1;
            return;
        };
        if self.exclude.contains(&post.id) || self.exclude.contains(&accepted) {
            self.counters.excluded += 1;
            return;
        }
        self.targets.insert(accepted, post.id);
        self.questions.insert(
            post.id,
            PendingQuestion {
                title: post.title.clone().unwrap_or_default(),
                body: strip_html(&post.body),
                tags: post.tags.clone(),
                votes: post.score,
                accepted,
            },
        );
    }

    pub fn observe_answer(&mut self, post: &RawPost) {
        if post.post_type != PostType::Answer {
            return;
        }
        self.counters.answers += 1;
        let Some(&question) = self.targets.get(&post.id) else {
            return;
        };
        if post.parent_id != Some(question) {
            self.mismatched.insert(post.id);
            return;
        }
        self.answers
            .insert(post.id, (strip_html(&post.body), post.score));
    }

    /// Pairs in ascending question id order.
    pub fn finish(mut self) -> (Vec<QAPair>, PairCounters) {
        let mut pairs = Vec::new();
        for (qid, q) in std::mem::take(&mut self.questions) {
            let Some((answer_text, answer_votes)) = self.answers.remove(&q.accepted) else {
                if self.mismatched.contains(&q.accepted) {
                    self.counters.parent_mismatch += 1;
                } else {
                    self.counters.accepted_answer_missing += 1;
                }
                continue;
            };
            let question_text = if q.body.is_empty() {
                q.title.clone()
            } else {
                format!("{} {}", q.title, q.body)
            };
            pairs.push(QAPair {
                pair_id: qid.to_string(),
                question_id: qid,
                answer_id: q.accepted,
                title: q.title,
                question_text,
                answer_text,
                tags: q.tags,
                question_votes: q.votes,
                answer_votes,
            });
        }
        self.counters.pairs = pairs.len();
        (pairs, self.counters)
    }
}

/// Pairs an in-memory sequence of posts.
pub fn pair_posts(posts: &[RawPost], tag_filter: &str) -> (Vec<QAPair>, PairCounters) {
    let mut pairer = Pairer::new(tag_filter);
    posts.iter().for_each(|p| pairer.observe_question(p));
    posts.iter().for_each(|p| pairer.observe_answer(p));
    pairer.finish()
}

/// Pairs a `posts.xml` file by streaming it twice.
pub fn pair_posts_file(
    path: impl AsRef<Path>,
    tag_filter: &str,
    exclude: impl IntoIterator<Item = i64>,
) -> Result<(Vec<QAPair>, PairCounters, ParseCounters)> {
    let path = path.as_ref();
    let mut pairer = Pairer::new(tag_filter).exclude(exclude);
    let mut first = PostReader::open(path)?;
    for post in first.by_ref() {
        pairer.observe_question(&post?);
    }
    let parse_counters = first.counters().clone();
    for post in PostReader::open(path)? {
        pairer.observe_answer(&post?);
    }
    let (pairs, counters) = pairer.finish();
    Ok((pairs, counters, parse_counters))
}

/// Reads an exclusion list: one post id per line, `#` comments ignored.
pub fn read_id_list(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let name = path.as_ref().display().to_string();
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut ids = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        ids.push(t.parse().map_err(|e| Error::at_line(&name, i + 1, e))?);
    }
    Ok(ids)
}

/// Reads pre-paired Q&A pairs, one JSON object per line.
pub fn read_pairs_jsonl(path: impl AsRef<Path>) -> Result<Vec<QAPair>> {
    let name = path.as_ref().display().to_string();
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        pairs.push(serde_json::from_str(&line).map_err(|e| Error::at_line(&name, i + 1, e))?);
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaBuildReport {
    pub stats: IndexStats,
    pub indexed: usize,
    pub skipped_empty: usize,
    pub skipped_duplicate: usize,
}

pub fn qa_document(pair: &QAPair, analyzer: &AnalyzerConfig) -> DocumentRecord {
    let text = format!("{} {} {}", pair.title, pair.question_text, pair.answer_text);
    DocumentRecord::new(pair.pair_id.clone(), analyze(&text, analyzer))
        .with_field(fields::PAIR_ID, &pair.pair_id)
        .with_field(fields::QUESTION_VOTES, pair.question_votes)
        .with_field(fields::ANSWER_VOTES, pair.answer_votes)
        .with_field(fields::TITLE, &pair.title)
}

/// Builds and commits an in-memory Q&A index.
pub fn qa_index(
    pairs: &[QAPair],
    analyzer: &AnalyzerConfig,
) -> Result<(InvertedIndex, QaBuildReport)> {
    fill_qa_index(InvertedIndex::new(analyzer.fingerprint()), pairs, analyzer)
}

/// Builds the Q&A index and writes it to `out`.
pub fn build_qa_index(
    pairs: &[QAPair],
    analyzer: &AnalyzerConfig,
    out: impl AsRef<Path>,
) -> Result<QaBuildReport> {
    let out = out.as_ref();
    let (_, report) = fill_qa_index(InvertedIndex::create(out, analyzer.fingerprint()), pairs, analyzer)?;
    store::write_metadata(out, "analyzer", serde_json::to_value(analyzer)?)?;
    store::write_metadata(out, "kind", "qa".into())?;
    Ok(report)
}

fn fill_qa_index(
    mut index: InvertedIndex,
    pairs: &[QAPair],
    analyzer: &AnalyzerConfig,
) -> Result<(InvertedIndex, QaBuildReport)> {
    analyzer.validate()?;
    let mut skipped_empty = 0;
    let mut skipped_duplicate = 0;
    for pair in pairs {
        let doc = qa_document(pair, analyzer);
        if doc.terms.is_empty() {
            skipped_empty += 1;
            continue;
        }
        match index.add_document(doc) {
            Ok(()) => {}
            Err(Error::DuplicateDocument(id)) => {
                warn!("duplicate pair id {id}; keeping the first");
                skipped_duplicate += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if index.doc_count() == 0 {
        warn!("Q&A index is empty");
    }
    index.commit()?;
    let report = QaBuildReport {
        stats: index.stats(),
        indexed: index.doc_count(),
        skipped_empty,
        skipped_duplicate,
    };
    Ok((index, report))
}
