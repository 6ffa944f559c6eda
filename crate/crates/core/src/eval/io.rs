use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

use super::UNJUDGED;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub query_id: String,
    pub snippet_id: String,
    pub relevance: u8,
}

/// Judgments indexed by query, then snippet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Judgments {
    by_query: BTreeMap<String, BTreeMap<String, u8>>,
}

impl Judgments {
    /// Fails on grades outside 1..=4 and on conflicting duplicates.
    pub fn new(list: impl IntoIterator<Item = Judgment>) -> Result<Self> {
        let mut j = Judgments::default();
        for item in list {
            j.insert(item)?;
        }
        Ok(j)
    }

    fn insert(&mut self, item: Judgment) -> Result<()> {
        if !(1..=4).contains(&item.relevance) {
            return Err(Error::param(format!(
                "relevance of ({}, {}) must be 1-4, got {}",
                item.query_id, item.snippet_id, item.relevance
            )));
        }
        let slot = self.by_query.entry(item.query_id.clone()).or_default();
        match slot.insert(item.snippet_id.clone(), item.relevance) {
            Some(prev) if prev != item.relevance => Err(Error::param(format!(
                "conflicting judgments for ({}, {}): {prev} and {}",
                item.query_id, item.snippet_id, item.relevance
            ))),
            _ => Ok(()),
        }
    }

    pub fn has_query(&self, query_id: &str) -> bool {
        self.by_query.contains_key(query_id)
    }

    /// The judged grade, or 1 when the snippet was not judged.
    pub fn relevance(&self, query_id: &str, snippet_id: &str) -> u8 {
        self.by_query
            .get(query_id)
            .and_then(|m| m.get(snippet_id))
            .copied()
            .unwrap_or(UNJUDGED)
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.by_query.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_query.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_query.is_empty()
    }
}

/// Reads `query_id,snippet_id,relevance` rows; a header row is optional.
pub fn read_judgments_csv(path: impl AsRef<Path>) -> Result<Judgments> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(fs::File::open(path)?);
    let mut judgments = Judgments::default();
    for (i, record) in reader.records().enumerate() {
        let line = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line() as usize);
        let record = record.map_err(|e| {
            let at = e.position().map_or(0, |p| p.line() as usize);
            Error::at_line(&name, at, e)
        })?;
        let at = line(&record);
        if record.len() != 3 {
            return Err(Error::at_line(
                &name,
                at,
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let grade = record[2].parse::<u8>();
        if i == 0 && grade.is_err() && record[2].eq_ignore_ascii_case("relevance") {
            continue;
        }
        let relevance = grade.map_err(|_| {
            Error::at_line(&name, at, format!("relevance `{}` is not an integer", &record[2]))
        })?;
        judgments
            .insert(Judgment {
                query_id: record[0].to_string(),
                snippet_id: record[1].to_string(),
                relevance,
            })
            .map_err(|e| Error::at_line(&name, at, e))?;
    }
    Ok(judgments)
}

/// Ranked snippet ids per query.
pub type Run = BTreeMap<String, Vec<String>>;

/// Interprets a run document. Accepted shapes:
/// `{qid: [id, ...]}`, `{qid: {"hits": [{"doc_id": id}, ...]}}`, and either
/// of those nested under a top-level `"queries"` key (the search output).
pub fn run_from_json(value: &Value) -> Result<Run> {
    let Value::Object(map) = value else {
        return Err(Error::param("run must be a JSON object"));
    };
    if let Some(inner) = map.get("queries") {
        return run_from_json(inner);
    }
    let mut run = Run::new();
    for (qid, entry) in map {
        let hits = match entry {
            Value::Array(items) => items,
            Value::Object(o) => match o.get("hits") {
                Some(Value::Array(items)) => items,
                _ => return Err(Error::param(format!("query `{qid}` has no `hits` list"))),
            },
            _ => return Err(Error::param(format!("query `{qid}` is neither a list nor an object"))),
        };
        let ids = hits
            .iter()
            .map(|h| match h {
                Value::String(s) => Ok(s.clone()),
                Value::Object(o) => match o.get("doc_id") {
                    Some(Value::String(s)) => Ok(s.clone()),
                    _ => Err(Error::param(format!("a hit of query `{qid}` has no doc_id"))),
                },
                _ => Err(Error::param(format!("query `{qid}` has a malformed hit"))),
            })
            .collect::<Result<Vec<_>>>()?;
        run.insert(qid.clone(), ids);
    }
    Ok(run)
}

pub fn read_run(path: impl AsRef<Path>) -> Result<Run> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        Error::at_line(path.display().to_string(), e.line(), e)
    })?;
    run_from_json(&value).map_err(|e| Error::param(format!("{}: {e}", path.display())))
}
