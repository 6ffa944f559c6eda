//! Method-level snippet extraction from Java sources and the code index.

mod java;

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Component, Path};

use log::warn;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::index::{store, DocumentRecord, IndexStats, InvertedIndex};
use crate::text::{analyze, AnalyzerConfig};

/// Stored field names in the code index.
pub mod fields {
    pub const SNIPPET_ID: &str = "snippet_id";
    pub const PROJECT: &str = "project";
    pub const FILE_PATH: &str = "file_path";
    pub const METHOD_NAME: &str = "method_name";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSnippet {
    /// `project/file_path#method_name@start_line`.
    pub snippet_id: String,
    #[serde(default)]
    pub project: String,
    #[serde(default)]
    pub file_path: String,
    pub method_name: String,
    #[serde(default)]
    pub signature: String,
    /// The method body from `{` to the matching `}`, comments included.
    pub body_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leading_comment: Option<String>,
}

impl CodeSnippet {
    /// Text indexed for this snippet.
    pub fn index_text(&self) -> String {
        format!(
            "{} {} {} {}",
            self.method_name,
            self.signature,
            self.leading_comment.as_deref().unwrap_or(""),
            self.body_text
        )
    }

    pub fn document(&self, analyzer: &AnalyzerConfig) -> DocumentRecord {
        DocumentRecord::new(self.snippet_id.clone(), analyze(&self.index_text(), analyzer))
            .with_field(fields::SNIPPET_ID, &self.snippet_id)
            .with_field(fields::PROJECT, &self.project)
            .with_field(fields::FILE_PATH, &self.file_path)
            .with_field(fields::METHOD_NAME, &self.method_name)
    }
}

fn line_of(source: &str, byte: usize) -> usize {
    source.as_bytes()[..byte].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Segments Java source into one snippet per method, in source order.
///
/// Methods of nested and anonymous classes are returned as their own
/// snippets and also stay inside the enclosing method's body. Fails with
/// [`Error::UnbalancedBraces`] when the file's braces do not balance.
pub fn extract_methods(source: &str, file_path: &str, project: &str) -> Result<Vec<CodeSnippet>> {
    let spans = java::find_methods(source)
        .ok_or_else(|| Error::UnbalancedBraces(file_path.to_string()))?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::with_capacity(spans.len());
    for span in spans {
        let line = line_of(source, span.decl_start);
        let mut id = format!("{project}/{file_path}#{}@{line}", span.name);
        let n = seen.entry(id.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            id = format!("{id}~{n}");
        }
        let comment = span
            .leading_comments
            .iter()
            .map(|r| source[r.clone()].trim())
            .collect::<Vec<_>>()
            .join("\n");
        out.push(CodeSnippet {
            snippet_id: id,
            project: project.to_string(),
            file_path: file_path.to_string(),
            method_name: span.name,
            signature: source[span.decl_start..span.body.start].trim().to_string(),
            body_text: source[span.body].to_string(),
            leading_comment: (!comment.is_empty()).then_some(comment),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CodeBuildReport {
    pub stats: IndexStats,
    pub files_seen: usize,
    pub files_unreadable: usize,
    pub files_unbalanced: usize,
    pub snippets: usize,
    pub skipped_empty: usize,
    pub skipped_duplicate: usize,
}

/// Splits a path relative to the tree root into (project, path within project).
/// Files directly under the root belong to the root directory's project.
fn project_and_path(root: &Path, rel: &Path) -> (String, String) {
    let parts: Vec<String> = rel
        .components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            _ => None,
        })
        .collect();
    if parts.len() > 1 {
        (parts[0].clone(), parts[1..].join("/"))
    } else {
        let project = root
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_default();
        (project, parts.join("/"))
    }
}

/// All snippets of every `*.java` file under `root`, in lexicographic path order.
pub fn collect_tree(root: impl AsRef<Path>) -> Result<(Vec<CodeSnippet>, CodeBuildReport)> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a directory", root.display()),
        )));
    }
    let mut report = CodeBuildReport::default();
    let mut snippets = Vec::new();
    let walker = WalkDir::new(root).sort_by_file_name().follow_links(false);
    for entry in walker {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                warn!("skipping unreadable entry: {e}");
                report.files_unreadable += 1;
                continue;
            }
        };
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "java") {
            continue;
        }
        report.files_seen += 1;
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                report.files_unreadable += 1;
                continue;
            }
        };
        let source = String::from_utf8_lossy(&bytes);
        let rel = path.strip_prefix(root).unwrap_or(path);
        let (project, file_path) = project_and_path(root, rel);
        match extract_methods(&source, &file_path, &project) {
            Ok(found) => snippets.extend(found),
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                report.files_unbalanced += 1;
            }
        }
    }
    Ok((snippets, report))
}

/// Extracts every method under `root_dir` and writes the code index to `out`.
pub fn ingest_tree(
    root_dir: impl AsRef<Path>,
    analyzer: &AnalyzerConfig,
    out: impl AsRef<Path>,
) -> Result<CodeBuildReport> {
    let (snippets, report) = collect_tree(root_dir)?;
    build_code_index(&snippets, analyzer, out, report)
}

/// Reads snippets from JSONL, one [`CodeSnippet`] object per line.
pub fn read_snippets_jsonl(path: impl AsRef<Path>) -> Result<Vec<CodeSnippet>> {
    let name = path.as_ref().display().to_string();
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let snippet: CodeSnippet =
            serde_json::from_str(&line).map_err(|e| Error::at_line(&name, i + 1, e))?;
        if snippet.body_text.is_empty() {
            return Err(Error::at_line(&name, i + 1, "body_text is empty"));
        }
        out.push(snippet);
    }
    Ok(out)
}

/// Indexes snippets read from a JSONL file and writes the code index to `out`.
pub fn ingest_jsonl(
    file: impl AsRef<Path>,
    analyzer: &AnalyzerConfig,
    out: impl AsRef<Path>,
) -> Result<CodeBuildReport> {
    let snippets = read_snippets_jsonl(file)?;
    build_code_index(&snippets, analyzer, out, CodeBuildReport::default())
}

/// Builds and commits an in-memory code index.
pub fn code_index(
    snippets: &[CodeSnippet],
    analyzer: &AnalyzerConfig,
) -> Result<(InvertedIndex, CodeBuildReport)> {
    fill(InvertedIndex::new(analyzer.fingerprint()), snippets, analyzer, CodeBuildReport::default())
}

fn build_code_index(
    snippets: &[CodeSnippet],
    analyzer: &AnalyzerConfig,
    out: impl AsRef<Path>,
    report: CodeBuildReport,
) -> Result<CodeBuildReport> {
    let out = out.as_ref();
    let index = InvertedIndex::create(out, analyzer.fingerprint());
    let (_, report) = fill(index, snippets, analyzer, report)?;
    store::write_metadata(out, "analyzer", serde_json::to_value(analyzer)?)?;
    store::write_metadata(out, "kind", "code".into())?;
    Ok(report)
}

fn fill(
    mut index: InvertedIndex,
    snippets: &[CodeSnippet],
    analyzer: &AnalyzerConfig,
    mut report: CodeBuildReport,
) -> Result<(InvertedIndex, CodeBuildReport)> {
    analyzer.validate()?;
    report.snippets = snippets.len();
    for s in snippets {
        let doc = s.document(analyzer);
        if doc.terms.is_empty() {
            report.skipped_empty += 1;
            continue;
        }
        match index.add_document(doc) {
            Ok(()) => {}
            Err(Error::DuplicateDocument(id)) => {
                warn!("duplicate snippet id {id}; keeping the first");
                report.skipped_duplicate += 1;
            }
            Err(e) => return Err(e),
        }
    }
    index.commit()?;
    report.stats = index.stats();
    Ok((index, report))
}
