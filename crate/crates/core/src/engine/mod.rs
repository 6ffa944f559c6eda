//! The two-pass expansion pipeline.
//!
//! 1. [`first_pass`]: BM25 over the Q&A index, re-ranked by fusing the
//!    normalized BM25 score with the pair's vote score; the top `m` pairs
//!    form the feedback set.
//! 2. [`select_expansion_terms`]: the `n` heaviest terms of the feedback
//!    documents (sqrt tf times idf, summed over documents), excluding query
//!    terms and terms that occur in too many Q&A pairs.
//! 3. [`expand`] and [`second_pass`]: the expanded query is run against the
//!    code index with plain BM25.

mod fusion;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{store, InvertedIndex, SearchHit};
use crate::qa::{fields, weighted_votes, ANSWER_WEIGHT, QUESTION_WEIGHT};
use crate::text::{analyze, AnalyzerConfig, TermBag};

pub use fusion::{fuse_candidates, min_max_normalize, Candidate, ScoredQAPair};

/// Which document set the expansion idf is computed over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfBasis {
    /// N and df over the whole Q&A collection.
    #[default]
    Collection,
    /// N = number of feedback documents, df counted within them.
    Feedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QeckConfig {
    /// Feedback documents.
    pub m: usize,
    /// Expansion terms; 0 disables expansion.
    pub n: usize,
    /// Code results.
    pub k: usize,
    /// BM25 candidates fused in the first pass.
    pub first_pass_pool: usize,
    /// Terms in more than this fraction of Q&A pairs are never used.
    pub df_cutoff: f64,
    pub question_weight: f64,
    pub answer_weight: f64,
    pub idf_basis: IdfBasis,
}

impl Default for QeckConfig {
    fn default() -> Self {
        QeckConfig {
            m: 5,
            n: 9,
            k: 10,
            first_pass_pool: 50,
            df_cutoff: 0.25,
            question_weight: QUESTION_WEIGHT,
            answer_weight: ANSWER_WEIGHT,
            idf_basis: IdfBasis::Collection,
        }
    }
}

impl QeckConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("k", self.k)] {
            if v < 1 {
                return Err(Error::param(format!("{name} must be at least 1")));
            }
        }
        if self.first_pass_pool < self.m {
            return Err(Error::param(format!(
                "first_pass_pool ({}) must be at least m ({})",
                self.first_pass_pool, self.m
            )));
        }
        if !(self.df_cutoff > 0.0 && self.df_cutoff <= 1.0) {
            return Err(Error::param(format!(
                "df_cutoff must be in (0, 1], got {}",
                self.df_cutoff
            )));
        }
        let (qw, aw) = (self.question_weight, self.answer_weight);
        if !qw.is_finite() || !aw.is_finite() || (qw + aw - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!(
                "question_weight + answer_weight must equal 1, got {qw} + {aw}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub raw: String,
    pub terms: TermBag,
}

impl Query {
    pub fn new(raw: &str, analyzer: &AnalyzerConfig) -> Self {
        Query {
            raw: raw.to_string(),
            terms: analyze(raw, analyzer),
        }
    }
}

/// The top-m fused Q&A pairs, best first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeedbackSet {
    pub entries: Vec<ScoredQAPair>,
}

impl FeedbackSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pair_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.pair_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub term: String,
    pub weight: f64,
    /// Occurrences summed over the feedback documents.
    pub feedback_tf: u32,
    /// Q&A pairs containing the term.
    pub collection_df: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedQuery {
    pub base: Query,
    pub expansion: Vec<ExpansionTerm>,
    pub combined_terms: TermBag,
}

fn vote_field(index: &InvertedIndex, doc_id: &str, field: &str) -> Result<i64> {
    let doc = index
        .document(doc_id)
        .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
    let raw = doc.fields.get(field).ok_or_else(|| {
        Error::CorruptIndex(format!("Q&A document `{doc_id}` has no `{field}` field"))
    })?;
    raw.parse().map_err(|_| {
        Error::CorruptIndex(format!("Q&A document `{doc_id}` has non-integer {field} `{raw}`"))
    })
}

/// BM25 candidates from the Q&A index, before fusion.
pub fn first_pass_candidates(
    qa_index: &InvertedIndex,
    query: &Query,
    config: &QeckConfig,
) -> Result<Vec<Candidate>> {
    let hits = qa_index.bm25_search(&query.terms, config.first_pass_pool.max(1))?;
    hits.into_iter()
        .map(|h| {
            let qv = vote_field(qa_index, &h.doc_id, fields::QUESTION_VOTES)?;
            let av = vote_field(qa_index, &h.doc_id, fields::ANSWER_VOTES)?;
            Ok(Candidate {
                so_score: weighted_votes(qv, av, config.question_weight, config.answer_weight),
                lucene_score: h.score,
                pair_id: h.doc_id,
            })
        })
        .collect()
}

pub fn first_pass(qa_index: &InvertedIndex, query: &Query, config: &QeckConfig) -> Result<FeedbackSet> {
    let candidates = first_pass_candidates(qa_index, query, config)?;
    Ok(FeedbackSet {
        entries: fuse_candidates(&candidates, config.m)?,
    })
}

/// Picks up to `config.n` expansion terms from the feedback documents.
///
/// weight(t) = sum over feedback docs d of sqrt(tf(t, d)) * (ln(N / (df(t) + 1)) + 1).
/// Terms of the query and terms with collection df / collection size above
/// `config.df_cutoff` are skipped. Ties are broken by term ascending.
pub fn select_expansion_terms(
    feedback: &FeedbackSet,
    query: &Query,
    qa_index: &InvertedIndex,
    config: &QeckConfig,
) -> Result<Vec<ExpansionTerm>> {
    if feedback.is_empty() || config.n == 0 {
        return Ok(Vec::new());
    }
    let collection_n = qa_index.doc_count();
    let exclude = query.terms.distinct();

    let mut per_doc: Vec<BTreeMap<&str, u32>> = Vec::with_capacity(feedback.len());
    for id in feedback.pair_ids() {
        let doc = qa_index
            .document(id)
            .ok_or_else(|| Error::UnknownDocument(id.to_string()))?;
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in &doc.terms {
            *tf.entry(t.as_str()).or_insert(0) += 1;
        }
        per_doc.push(tf);
    }

    let candidates: BTreeSet<&str> = per_doc
        .iter()
        .flat_map(|d| d.keys().copied())
        .filter(|t| !exclude.contains(t))
        .collect();

    let mut terms = Vec::new();
    for term in candidates {
        let collection_df = qa_index.document_frequency(term)?;
        if collection_df as f64 > config.df_cutoff * collection_n as f64 {
            continue;
        }
        let (n, df) = match config.idf_basis {
            IdfBasis::Collection => (collection_n, collection_df),
            IdfBasis::Feedback => (
                per_doc.len(),
                per_doc.iter().filter(|d| d.contains_key(term)).count(),
            ),
        };
        let idf = (n as f64 / (df as f64 + 1.0)).ln() + 1.0;
        let mut weight = 0.0;
        let mut feedback_tf = 0;
        for d in &per_doc {
            if let Some(&tf) = d.get(term) {
                weight += (tf as f64).sqrt() * idf;
                feedback_tf += tf;
            }
        }
        if weight > 0.0 {
            terms.push(ExpansionTerm {
                term: term.to_string(),
                weight,
                feedback_tf,
                collection_df,
            });
        }
    }
    terms.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
    terms.truncate(config.n);
    Ok(terms)
}

/// Appends each expansion term once to the query terms.
pub fn expand(query: &Query, terms: &[ExpansionTerm]) -> ExpandedQuery {
    let mut combined = query.terms.0.clone();
    combined.extend(terms.iter().map(|t| t.term.clone()));
    ExpandedQuery {
        base: query.clone(),
        expansion: terms.to_vec(),
        combined_terms: TermBag(combined),
    }
}

pub fn second_pass(
    code_index: &InvertedIndex,
    expanded: &ExpandedQuery,
    config: &QeckConfig,
) -> Result<Vec<SearchHit>> {
    code_index.bm25_search(&expanded.combined_terms, config.k.max(1))
}

/// Everything computed for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeckOutput {
    pub expanded: ExpandedQuery,
    pub feedback: FeedbackSet,
    pub hits: Vec<SearchHit>,
}

/// Runs the full pipeline; the analyzer must be the one both indexes were built with.
pub fn qeck_search(
    qa_index: &InvertedIndex,
    code_index: &InvertedIndex,
    raw_query: &str,
    analyzer: &AnalyzerConfig,
    config: &QeckConfig,
) -> Result<QeckOutput> {
    config.validate()?;
    check_fingerprint(qa_index, analyzer)?;
    check_fingerprint(code_index, analyzer)?;
    let query = Query::new(raw_query, analyzer);
    let feedback = first_pass(qa_index, &query, config)?;
    let terms = select_expansion_terms(&feedback, &query, qa_index, config)?;
    let expanded = expand(&query, &terms);
    let hits = second_pass(code_index, &expanded, config)?;
    Ok(QeckOutput {
        expanded,
        feedback,
        hits,
    })
}

/// Plain BM25 of the unexpanded query against the code index.
pub fn baseline_search(
    code_index: &InvertedIndex,
    raw_query: &str,
    analyzer: &AnalyzerConfig,
    k: usize,
) -> Result<Vec<SearchHit>> {
    check_fingerprint(code_index, analyzer)?;
    code_index.bm25_search(&analyze(raw_query, analyzer), k)
}

fn check_fingerprint(index: &InvertedIndex, analyzer: &AnalyzerConfig) -> Result<()> {
    let expected = analyzer.fingerprint();
    if index.analyzer_fingerprint() != expected {
        return Err(Error::AnalyzerMismatch {
            expected,
            found: index.analyzer_fingerprint().to_string(),
        });
    }
    Ok(())
}

/// Reads the analyzer settings recorded in an index directory by the builders.
pub fn stored_analyzer(dir: impl AsRef<Path>) -> Result<AnalyzerConfig> {
    let dir = dir.as_ref();
    let manifest = store::read_manifest(dir)?;
    let value = manifest.metadata.get("analyzer").ok_or_else(|| {
        Error::CorruptIndex(format!("{} records no analyzer settings", dir.display()))
    })?;
    Ok(serde_json::from_value(value.clone())?)
}

/// A Q&A index and a code index opened together.
pub struct QeckEngine {
    qa: InvertedIndex,
    code: InvertedIndex,
    analyzer: AnalyzerConfig,
}

impl QeckEngine {
    /// Checks that both indexes were built with `analyzer`.
    pub fn new(qa: InvertedIndex, code: InvertedIndex, analyzer: AnalyzerConfig) -> Result<Self> {
        check_fingerprint(&qa, &analyzer)?;
        check_fingerprint(&code, &analyzer)?;
        Ok(QeckEngine { qa, code, analyzer })
    }

    /// Opens both index directories, taking the analyzer from the Q&A index.
    pub fn open(qa_dir: impl AsRef<Path>, code_dir: impl AsRef<Path>) -> Result<Self> {
        let analyzer = stored_analyzer(qa_dir.as_ref())?;
        Self::new(
            InvertedIndex::open(qa_dir)?,
            InvertedIndex::open(code_dir)?,
            analyzer,
        )
    }

    pub fn analyzer(&self) -> &AnalyzerConfig {
        &self.analyzer
    }

    pub fn qa_index(&self) -> &InvertedIndex {
        &self.qa
    }

    pub fn code_index(&self) -> &InvertedIndex {
        &self.code
    }

    pub fn search(&self, raw_query: &str, config: &QeckConfig) -> Result<QeckOutput> {
        qeck_search(&self.qa, &self.code, raw_query, &self.analyzer, config)
    }

    pub fn baseline(&self, raw_query: &str, k: usize) -> Result<Vec<SearchHit>> {
        baseline_search(&self.code, raw_query, &self.analyzer, k)
    }

    /// Runs every query, keyed by query id.
    pub fn run_queries(
        &self,
        queries: &[QuerySpec],
        config: &QeckConfig,
    ) -> Result<BTreeMap<String, QeckOutput>> {
        queries
            .iter()
            .map(|q| Ok((q.id.clone(), self.search(&q.text, config)?)))
            .collect()
    }

    /// Ranked snippet ids per query, from the full pipeline or (when
    /// `baseline`) from plain BM25.
    pub fn ranked_ids(
        &self,
        queries: &[QuerySpec],
        config: &QeckConfig,
        baseline: bool,
    ) -> Result<BTreeMap<String, Vec<String>>> {
        queries
            .iter()
            .map(|q| {
                let hits = if baseline {
                    self.baseline(&q.text, config.k)?
                } else {
                    self.search(&q.text, config)?.hits
                };
                Ok((q.id.clone(), hits.into_iter().map(|h| h.doc_id).collect()))
            })
            .collect()
    }
}

/// One line of a query file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub id: String,
    pub text: String,
}

/// Reads `id<TAB>text` lines; blank lines and `#` comments are skipped.
pub fn read_queries(path: impl AsRef<Path>) -> Result<Vec<QuerySpec>> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let mut out: Vec<QuerySpec> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, q) = line
            .split_once('\t')
            .ok_or_else(|| Error::at_line(&name, i + 1, "expected `id<TAB>query`"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::at_line(&name, i + 1, "empty query id"));
        }
        if out.iter().any(|s| s.id == id) {
            return Err(Error::at_line(&name, i + 1, format!("duplicate query id `{id}`")));
        }
        out.push(QuerySpec {
            id: id.to_string(),
            text: q.trim().to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::DocumentRecord;

    fn bag(s: &str) -> TermBag {
        TermBag(s.split_whitespace().map(String::from).collect())
    }

    fn qa(docs: &[(&str, &str, i64, i64)]) -> InvertedIndex {
        let mut idx = InvertedIndex::new("fp");
        for (id, text, qv, av) in docs {
            idx.add_document(
                DocumentRecord::new(*id, bag(text))
                    .with_field(fields::QUESTION_VOTES, qv)
                    .with_field(fields::ANSWER_VOTES, av),
            )
            .unwrap();
        }
        idx.commit().unwrap();
        idx
    }

    fn query(terms: &str) -> Query {
        Query {
            raw: terms.into(),
            terms: bag(terms),
        }
    }

    #[test]
    fn config_validation() {
        assert!(QeckConfig::default().validate().is_ok());
        let bad = |f: fn(&mut QeckConfig)| {
            let mut c = QeckConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.m = 0));
        assert!(!bad(|c| c.n = 0));
        assert!(bad(|c| c.k = 0));
        assert!(bad(|c| c.first_pass_pool = 4));
        assert!(bad(|c| c.df_cutoff = 0.0));
        assert!(bad(|c| c.df_cutoff = 1.5));
        assert!(bad(|c| c.question_weight = 0.8));
    }

    #[test]
    fn empty_retrieval_gives_empty_feedback() {
        let idx = qa(&[("1", "alpha beta", 1, 1)]);
        let fb = first_pass(&idx, &query("gamma"), &QeckConfig::default()).unwrap();
        assert!(fb.is_empty());
        assert!(select_expansion_terms(&fb, &query("gamma"), &idx, &QeckConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn expand_examples() {
        let q = query("a b");
        assert_eq!(expand(&q, &[]).combined_terms, q.terms);
        let t = ExpansionTerm {
            term: "c".into(),
            weight: 1.0,
            feedback_tf: 1,
            collection_df: 1,
        };
        assert_eq!(expand(&q, &[t]).combined_terms, bag("a b c"));
    }

    #[test]
    fn missing_vote_fields_are_reported() {
        let mut idx = InvertedIndex::new("fp");
        idx.add_document(DocumentRecord::new("x", bag("alpha"))).unwrap();
        idx.commit().unwrap();
        let err = first_pass(&idx, &query("alpha"), &QeckConfig::default()).unwrap_err();
        assert!(matches!(err, Error::CorruptIndex(_)));
    }

    #[test]
    fn fingerprint_mismatch() {
        let idx = qa(&[("1", "alpha", 0, 0)]);
        let err = qeck_search(&idx, &idx, "alpha", &AnalyzerConfig::default(), &QeckConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::AnalyzerMismatch { .. }));
    }

    #[test]
    fn config_from_toml() {
        let c: QeckConfig = toml::from_str("m = 3\nidf_basis = \"feedback\"").unwrap();
        assert_eq!(c.m, 3);
        assert_eq!(c.n, 9);
        assert_eq!(c.idf_basis, IdfBasis::Feedback);
        assert!(toml::from_str::<QeckConfig>("bogus = 1").is_err());
    }
}
