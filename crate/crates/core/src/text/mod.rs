//! Text analysis: identifier-aware tokenization, stop-word removal and
//! Porter stemming.
//!
//! The same [`AnalyzerConfig`] must be used to index a collection and to
//! analyze the queries run against it; indexes record the config's
//! [`fingerprint`](AnalyzerConfig::fingerprint) so mismatches are caught.

mod porter;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use porter::stem;

const SMART_STOPWORDS: &str = include_str!("smart_stopwords.txt");

/// Built-in English stop-word list (SMART).
pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(SMART_STOPWORDS)
}

/// Parses a stop-word file: one word per line, `#` comments ignored.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    pub stopwords: BTreeSet<String>,
    pub remove_stopwords: bool,
    pub min_token_length: usize,
    pub keep_digits: bool,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            stopwords: default_stopwords(),
            remove_stopwords: true,
            min_token_length: 2,
            keep_digits: false,
        }
    }
}

impl AnalyzerConfig {
    /// Default settings with the stop-word list replaced by the contents of `path`.
    pub fn with_stopword_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg = AnalyzerConfig {
            stopwords: parse_stopwords(&text),
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_token_length < 1 {
            return Err(Error::param("min_token_length must be at least 1"));
        }
        if self.remove_stopwords && self.stopwords.is_empty() {
            return Err(Error::param(
                "stop-word removal is enabled but the stop-word list is empty",
            ));
        }
        Ok(())
    }

    /// Stable hex digest identifying this configuration.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"qeck-analyzer-v1\n");
        h.update(format!(
            "min_token_length={}\nkeep_digits={}\nremove_stopwords={}\n",
            self.min_token_length, self.keep_digits, self.remove_stopwords
        ));
        for w in &self.stopwords {
            h.update(w.as_bytes());
            h.update(b"\n");
        }
        let digest = h.finalize();
        digest[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// An ordered multiset of analyzed terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermBag(pub Vec<String>);

impl TermBag {
    pub fn new(terms: Vec<String>) -> Self {
        TermBag(terms)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.iter().any(|t| t == term)
    }

    /// Distinct terms in ascending order.
    pub fn distinct(&self) -> BTreeSet<&str> {
        self.0.iter().map(String::as_str).collect()
    }
}

impl<'a> IntoIterator for &'a TermBag {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Lower,
    Upper,
    Digit,
    Sep,
}

fn classify(c: char, keep_digits: bool) -> Class {
    if c.is_ascii_lowercase() {
        Class::Lower
    } else if c.is_ascii_uppercase() {
        Class::Upper
    } else if c.is_ascii_digit() && keep_digits {
        Class::Digit
    } else {
        Class::Sep
    }
}

/// Splits raw text into lowercase tokens.
///
/// Tokens are maximal runs of ASCII letters (plus digits when
/// `keep_digits`), further split at camel-case boundaries: before an
/// uppercase letter that follows a lowercase letter or digit, and before the
/// last capital of an uppercase run that is followed by a lowercase letter
/// (`XMLParser` -> `xml`, `parser`). Tokens shorter than `min_token_length`
/// are dropped.
pub fn tokenize(text: &str, config: &AnalyzerConfig) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let classes: Vec<Class> = chars
        .iter()
        .map(|&c| classify(c, config.keep_digits))
        .collect();
    let mut tokens = Vec::new();
    let mut current = String::new();

    let flush = |cur: &mut String, out: &mut Vec<String>| {
        if !cur.is_empty() {
            if cur.len() >= config.min_token_length {
                out.push(cur.to_ascii_lowercase());
            }
            cur.clear();
        }
    };

    for i in 0..chars.len() {
        let class = classes[i];
        if class == Class::Sep {
            flush(&mut current, &mut tokens);
            continue;
        }
        if i > 0 && !current.is_empty() && class == Class::Upper {
            let prev = classes[i - 1];
            let next_lower = classes.get(i + 1) == Some(&Class::Lower);
            let boundary = matches!(prev, Class::Lower | Class::Digit)
                || (prev == Class::Upper && next_lower);
            if boundary {
                flush(&mut current, &mut tokens);
            }
        }
        current.push(chars[i]);
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Order-preserving removal of stop words. A no-op when removal is disabled.
pub fn remove_stopwords(tokens: Vec<String>, config: &AnalyzerConfig) -> Vec<String> {
    if !config.remove_stopwords {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| !config.stopwords.contains(t))
        .collect()
}

/// tokenize, then remove stop words, then stem.
pub fn analyze(text: &str, config: &AnalyzerConfig) -> TermBag {
    let tokens = remove_stopwords(tokenize(text, config), config);
    TermBag(tokens.iter().map(|t| stem(t)).collect())
}
