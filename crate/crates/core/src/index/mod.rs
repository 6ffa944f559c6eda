//! Inverted index over analyzed documents with BM25 ranking.
//!
//! An index is built with [`InvertedIndex::add_document`] and frozen by
//! [`InvertedIndex::commit`]. Once committed it is immutable and can be
//! searched (and shared across threads) freely. Indexes created with
//! [`InvertedIndex::create`] are persisted on commit; see [`store`] for the
//! on-disk layout.

pub mod store;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TermBag;

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub fields: BTreeMap<String, String>,
    pub terms: TermBag,
}

impl DocumentRecord {
    pub fn new(doc_id: impl Into<String>, terms: TermBag) -> Self {
        DocumentRecord {
            doc_id: doc_id.into(),
            fields: BTreeMap::new(),
            terms,
        }
    }

    pub fn with_field(mut self, name: impl Into<String>, value: impl ToString) -> Self {
        self.fields.insert(name.into(), value.to_string());
        self
    }

    pub fn length(&self) -> usize {
        self.terms.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Position of the document in doc-id order.
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub doc_count: usize,
    pub avg_doc_length: f64,
    pub analyzer_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: String,
    pub score: f64,
    pub rank: usize,
}

/// Ordering key of a positive score: the score rounded to 32 significant
/// bits, so scores equal in exact arithmetic but apart by rounding noise tie.
pub(crate) fn rank_key(score: f64) -> u64 {
    const DROP: u32 = 20;
    let bits = score.to_bits();
    (bits + (1 << (DROP - 1))) >> DROP
}

#[derive(Debug)]
pub struct InvertedIndex {
    fingerprint: String,
    /// Sorted by doc_id once committed.
    docs: Vec<DocumentRecord>,
    ids: HashMap<String, u32>,
    postings: BTreeMap<String, Vec<Posting>>,
    total_length: u64,
    committed: bool,
    target: Option<PathBuf>,
}

impl InvertedIndex {
    /// In-memory index in build mode.
    pub fn new(analyzer_fingerprint: impl Into<String>) -> Self {
        InvertedIndex {
            fingerprint: analyzer_fingerprint.into(),
            docs: Vec::new(),
            ids: HashMap::new(),
            postings: BTreeMap::new(),
            total_length: 0,
            committed: false,
            target: None,
        }
    }

    /// Index in build mode that is written to `dir` when committed.
    pub fn create(dir: impl Into<PathBuf>, analyzer_fingerprint: impl Into<String>) -> Self {
        let mut idx = Self::new(analyzer_fingerprint);
        idx.target = Some(dir.into());
        idx
    }

    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        store::load(dir.as_ref())
    }

    pub fn add_document(&mut self, record: DocumentRecord) -> Result<()> {
        if self.committed {
            return Err(Error::AlreadyCommitted);
        }
        if self.ids.contains_key(&record.doc_id) {
            return Err(Error::DuplicateDocument(record.doc_id));
        }
        self.ids.insert(record.doc_id.clone(), self.docs.len() as u32);
        self.total_length += record.length() as u64;
        self.docs.push(record);
        Ok(())
    }

    /// Freezes the index and, if it was created with a target directory,
    /// writes it there atomically. Committing twice is a no-op.
    pub fn commit(&mut self) -> Result<()> {
        if self.committed {
            return Ok(());
        }
        self.finalize();
        if let Some(dir) = self.target.clone() {
            if let Err(e) = store::save(self, &dir) {
                self.committed = false;
                return Err(e);
            }
        }
        Ok(())
    }

    fn finalize(&mut self) {
        self.docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        self.ids = self
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i as u32))
            .collect();
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (i, d) in self.docs.iter().enumerate() {
            let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
            for t in &d.terms {
                *counts.entry(t.as_str()).or_default() += 1;
            }
            for (t, tf) in counts {
                postings.entry(t.to_string()).or_default().push(Posting {
                    doc: i as u32,
                    tf,
                });
            }
        }
        self.postings = postings;
        self.committed = true;
    }

    /// Writes a committed index to `dir`, replacing whatever is there.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        self.require_committed()?;
        store::save(self, dir.as_ref())
    }

    pub fn is_committed(&self) -> bool {
        self.committed
    }

    pub fn analyzer_fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        if self.docs.is_empty() {
            0.0
        } else {
            self.total_length as f64 / self.docs.len() as f64
        }
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            doc_count: self.doc_count(),
            avg_doc_length: self.avg_doc_length(),
            analyzer_fingerprint: self.fingerprint.clone(),
        }
    }

    fn require_committed(&self) -> Result<()> {
        if self.committed {
            Ok(())
        } else {
            Err(Error::NotCommitted)
        }
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.ids.get(doc_id).map(|&i| &self.docs[i as usize])
    }

    /// Documents in doc-id order (insertion order before commit).
    pub fn documents(&self) -> &[DocumentRecord] {
        &self.docs
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of terms in the dictionary.
    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub(crate) fn raw_parts(&self) -> (&BTreeMap<String, Vec<Posting>>, &[DocumentRecord]) {
        (&self.postings, &self.docs)
    }

    pub(crate) fn from_parts(
        fingerprint: String,
        docs: Vec<DocumentRecord>,
        postings: BTreeMap<String, Vec<Posting>>,
    ) -> Self {
        let ids = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i as u32))
            .collect();
        let total_length = docs.iter().map(|d| d.length() as u64).sum();
        InvertedIndex {
            fingerprint,
            docs,
            ids,
            postings,
            total_length,
            committed: true,
            target: None,
        }
    }

    pub fn document_frequency(&self, term: &str) -> Result<usize> {
        self.require_committed()?;
        Ok(self.postings(term).len())
    }

    pub fn term_frequency(&self, term: &str, doc_id: &str) -> Result<u32> {
        self.require_committed()?;
        let doc = *self
            .ids
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
        let list = self.postings(term);
        Ok(list
            .binary_search_by_key(&doc, |p| p.doc)
            .map(|i| list[i].tf)
            .unwrap_or(0))
    }

    /// Lucene-style BM25 idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
    pub fn idf(&self, df: usize) -> f64 {
        let n = self.docs.len() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Ranks documents against `query` with BM25 (k1 = 1.2, b = 0.75).
    ///
    /// Every occurrence of a term in the query contributes one clause, so a
    /// repeated query term counts twice. Documents scoring zero are omitted.
    /// Scores that agree to 32 significant bits count as tied; ties are
    /// broken by ascending doc id.
    pub fn bm25_search(&self, query: &TermBag, top_r: usize) -> Result<Vec<SearchHit>> {
        self.require_committed()?;
        if top_r < 1 {
            return Err(Error::param("top_r must be at least 1"));
        }
        if self.docs.is_empty() {
            return Ok(Vec::new());
        }
        let avg = self.avg_doc_length();
        let mut scores: HashMap<u32, f64> = HashMap::new();
        for term in query {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = self.idf(list.len());
            for p in list {
                let len = self.docs[p.doc as usize].length() as f64;
                let tf = p.tf as f64;
                let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * len / avg);
                *scores.entry(p.doc).or_insert(0.0) += idf * tf * (BM25_K1 + 1.0) / (tf + norm);
            }
        }
        let mut ranked: Vec<(u32, f64)> = scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
        // doc numbers follow doc-id order, so ordering by them breaks ties by doc id
        ranked.sort_by(|a, b| rank_key(b.1).cmp(&rank_key(a.1)).then(a.0.cmp(&b.0)));
        ranked.truncate(top_r);
        Ok(ranked
            .into_iter()
            .enumerate()
            .map(|(i, (doc, score))| SearchHit {
                doc_id: self.docs[doc as usize].doc_id.clone(),
                score,
                rank: i + 1,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(s: &str) -> TermBag {
        TermBag(s.split_whitespace().map(String::from).collect())
    }

    fn committed(docs: &[(&str, &str)]) -> InvertedIndex {
        let mut idx = InvertedIndex::new("fp");
        for (id, text) in docs {
            idx.add_document(DocumentRecord::new(*id, bag(text))).unwrap();
        }
        idx.commit().unwrap();
        idx
    }

    #[test]
    fn add_and_commit() {
        let idx = committed(&[("d1", "a b")]);
        assert_eq!(idx.doc_count(), 1);
        let mut idx = InvertedIndex::new("fp");
        idx.add_document(DocumentRecord::new("x", bag("a"))).unwrap();
        let err = idx.add_document(DocumentRecord::new("x", bag("b"))).unwrap_err();
        assert!(err.to_string().contains("`x`"));
    }

    #[test]
    fn average_length() {
        let idx = committed(&[("a", "x y"), ("b", "x y z w"), ("c", "p q"), ("d", "p q r s")]);
        assert_eq!(idx.avg_doc_length(), 3.0);
    }

    #[test]
    fn empty_index_returns_nothing() {
        let idx = committed(&[]);
        assert!(idx.bm25_search(&bag("anything"), 10).unwrap().is_empty());
    }

    #[test]
    fn double_commit_is_idempotent() {
        let mut idx = committed(&[("a", "x")]);
        idx.commit().unwrap();
        assert_eq!(idx.doc_count(), 1);
        assert!(matches!(
            idx.add_document(DocumentRecord::new("b", bag("y"))),
            Err(Error::AlreadyCommitted)
        ));
    }

    #[test]
    fn requires_commit() {
        let idx = InvertedIndex::new("fp");
        assert!(matches!(idx.bm25_search(&bag("x"), 1), Err(Error::NotCommitted)));
        assert!(matches!(idx.document_frequency("x"), Err(Error::NotCommitted)));
    }

    #[test]
    fn frequencies() {
        let idx = committed(&[("a", "t t t t u"), ("b", "t"), ("c", "t"), ("d", "t")]);
        assert_eq!(idx.document_frequency("t").unwrap(), 4);
        assert_eq!(idx.document_frequency("zz").unwrap(), 0);
        assert_eq!(idx.term_frequency("t", "a").unwrap(), 4);
        assert_eq!(idx.term_frequency("u", "b").unwrap(), 0);
        assert!(matches!(
            idx.term_frequency("t", "nope"),
            Err(Error::UnknownDocument(_))
        ));
    }

    #[test]
    fn zero_score_documents_omitted() {
        let idx = committed(&[("d1", "screenshot android"), ("d2", "databas queri")]);
        let hits = idx.bm25_search(&bag("screenshot"), 10).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, "d1");
        assert_eq!(hits[0].rank, 1);
        assert!(idx.bm25_search(&bag("x"), 0).is_err());
    }

    #[test]
    fn ties_break_by_doc_id() {
        let idx = committed(&[("b", "x y"), ("a", "x y"), ("c", "z")]);
        let hits = idx.bm25_search(&bag("x"), 10).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(hits[0].score, hits[1].score);
    }
}
