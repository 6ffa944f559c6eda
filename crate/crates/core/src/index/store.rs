//! On-disk index layout.
//!
//! An index directory holds four files:
//!
//! * `manifest.json`: format version, doc count, average length, analyzer
//!   fingerprint and the file names below.
//! * `terms.dict`: the term dictionary. For each term in ascending order:
//!   `u32` byte length, UTF-8 bytes, `u64` postings offset, `u32` df.
//! * `postings.bin`: `(u32 doc, u32 tf)` pairs, little-endian, grouped by term.
//! * `docs.jsonl`: one stored document per line in doc-id order.
//!
//! Directories are written next to the target and renamed into place, so a
//! failed save leaves the previous index untouched.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DocumentRecord, InvertedIndex, Posting};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.json";
const TERMS: &str = "terms.dict";
const POSTINGS: &str = "postings.bin";
const DOCS: &str = "docs.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub doc_count: usize,
    pub total_length: u64,
    pub avg_doc_length: f64,
    pub analyzer_fingerprint: String,
    pub term_count: usize,
    /// Extra metadata written by the ingestion tools (e.g. the analyzer).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    let probe: serde_json::Value = serde_json::from_str(&text)?;
    let version = probe
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::CorruptIndex("manifest has no format_version".into()))?;
    if version != FORMAT_VERSION as u64 {
        return Err(Error::UnsupportedVersion {
            found: version as u32,
            expected: FORMAT_VERSION,
        });
    }
    Ok(serde_json::from_value(probe)?)
}

/// Adds a metadata entry to an existing index's manifest.
pub fn write_metadata(dir: &Path, key: &str, value: serde_json::Value) -> Result<()> {
    let mut manifest = read_manifest(dir)?;
    manifest.metadata.insert(key.to_string(), value);
    let tmp = dir.join(".manifest.json.tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(&manifest)?)?;
    fs::rename(tmp, dir.join(MANIFEST))?;
    Ok(())
}

fn sibling(dir: &Path, suffix: &str) -> PathBuf {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "index".into());
    dir.with_file_name(format!(".{name}.{suffix}-{}", std::process::id()))
}

pub(super) fn save(index: &InvertedIndex, dir: &Path) -> Result<()> {
    if let Some(parent) = dir.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let staging = sibling(dir, "tmp");
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir(&staging)?;
    if let Err(e) = write_files(index, &staging) {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if dir.exists() {
        let old = sibling(dir, "old");
        if old.exists() {
            fs::remove_dir_all(&old)?;
        }
        fs::rename(dir, &old)?;
        if let Err(e) = fs::rename(&staging, dir) {
            let _ = fs::rename(&old, dir);
            return Err(e.into());
        }
        fs::remove_dir_all(&old)?;
    } else {
        fs::rename(&staging, dir)?;
    }
    Ok(())
}

fn write_files(index: &InvertedIndex, dir: &Path) -> Result<()> {
    let (postings, docs) = index.raw_parts();

    let mut dict = BufWriter::new(File::create(dir.join(TERMS))?);
    let mut post = BufWriter::new(File::create(dir.join(POSTINGS))?);
    let mut offset: u64 = 0;
    for (term, list) in postings {
        dict.write_all(&(term.len() as u32).to_le_bytes())?;
        dict.write_all(term.as_bytes())?;
        dict.write_all(&offset.to_le_bytes())?;
        dict.write_all(&(list.len() as u32).to_le_bytes())?;
        for p in list {
            post.write_all(&p.doc.to_le_bytes())?;
            post.write_all(&p.tf.to_le_bytes())?;
        }
        offset += list.len() as u64;
    }
    dict.flush()?;
    post.flush()?;

    let mut store = BufWriter::new(File::create(dir.join(DOCS))?);
    for d in docs {
        serde_json::to_writer(&mut store, d)?;
        store.write_all(b"\n")?;
    }
    store.flush()?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        doc_count: index.doc_count(),
        total_length: docs.iter().map(|d| d.length() as u64).sum(),
        avg_doc_length: index.avg_doc_length(),
        analyzer_fingerprint: index.analyzer_fingerprint().to_string(),
        term_count: postings.len(),
        metadata: BTreeMap::new(),
    };
    fs::write(dir.join(MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

fn read_u32(buf: &[u8], at: &mut usize) -> Result<u32> {
    let bytes = buf
        .get(*at..*at + 4)
        .ok_or_else(|| Error::CorruptIndex("truncated term dictionary".into()))?;
    *at += 4;
    Ok(u32::from_le_bytes(bytes.try_into().unwrap()))
}

fn read_u64(buf: &[u8], at: &mut usize) -> Result<u64> {
    let bytes = buf
        .get(*at..*at + 8)
        .ok_or_else(|| Error::CorruptIndex("truncated term dictionary".into()))?;
    *at += 8;
    Ok(u64::from_le_bytes(bytes.try_into().unwrap()))
}

pub(super) fn load(dir: &Path) -> Result<InvertedIndex> {
    let manifest = read_manifest(dir)?;

    let mut docs = Vec::with_capacity(manifest.doc_count);
    let reader = BufReader::new(File::open(dir.join(DOCS))?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let doc: DocumentRecord = serde_json::from_str(&line)
            .map_err(|e| Error::at_line(DOCS, i + 1, e))?;
        docs.push(doc);
    }
    if docs.len() != manifest.doc_count {
        return Err(Error::CorruptIndex(format!(
            "manifest lists {} documents, store has {}",
            manifest.doc_count,
            docs.len()
        )));
    }

    let mut post_bytes = Vec::new();
    File::open(dir.join(POSTINGS))?.read_to_end(&mut post_bytes)?;
    if post_bytes.len() % 8 != 0 {
        return Err(Error::CorruptIndex("postings file length is not a multiple of 8".into()));
    }
    let all: Vec<Posting> = post_bytes
        .chunks_exact(8)
        .map(|c| Posting {
            doc: u32::from_le_bytes(c[..4].try_into().unwrap()),
            tf: u32::from_le_bytes(c[4..].try_into().unwrap()),
        })
        .collect();

    let dict = fs::read(dir.join(TERMS))?;
    let mut postings = BTreeMap::new();
    let mut at = 0;
    while at < dict.len() {
        let len = read_u32(&dict, &mut at)? as usize;
        let term_bytes = dict
            .get(at..at + len)
            .ok_or_else(|| Error::CorruptIndex("truncated term".into()))?;
        let term = String::from_utf8(term_bytes.to_vec())
            .map_err(|_| Error::CorruptIndex("term is not UTF-8".into()))?;
        at += len;
        let offset = read_u64(&dict, &mut at)? as usize;
        let df = read_u32(&dict, &mut at)? as usize;
        let list = all
            .get(offset..offset + df)
            .ok_or_else(|| Error::CorruptIndex(format!("postings for `{term}` out of range")))?;
        if list.iter().any(|p| p.doc as usize >= docs.len()) {
            return Err(Error::CorruptIndex(format!("postings for `{term}` point past the store")));
        }
        postings.insert(term, list.to_vec());
    }
    if postings.len() != manifest.term_count {
        return Err(Error::CorruptIndex("term count does not match manifest".into()));
    }

    Ok(InvertedIndex::from_parts(
        manifest.analyzer_fingerprint,
        docs,
        postings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::TermBag;

    fn sample() -> InvertedIndex {
        let mut idx = InvertedIndex::new("abc");
        for (id, t) in [("b", "x y y"), ("a", "y z"), ("c", "w")] {
            let bag = TermBag(t.split(' ').map(String::from).collect());
            idx.add_document(DocumentRecord::new(id, bag).with_field("k", id))
                .unwrap();
        }
        idx.commit().unwrap();
        idx
    }

    #[test]
    fn round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("idx");
        let idx = sample();
        idx.save(&dir).unwrap();
        let back = InvertedIndex::open(&dir).unwrap();
        assert_eq!(back.documents(), idx.documents());
        assert_eq!(back.raw_parts().0, idx.raw_parts().0);
        assert_eq!(back.analyzer_fingerprint(), "abc");
        // overwrite in place
        idx.save(&dir).unwrap();
        assert!(InvertedIndex::open(&dir).is_ok());
    }

    #[test]
    fn rejects_unknown_version() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("idx");
        sample().save(&dir).unwrap();
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("\"format_version\": 1", "\"format_version\": 99")).unwrap();
        assert!(matches!(
            InvertedIndex::open(&dir),
            Err(Error::UnsupportedVersion { found: 99, .. })
        ));
    }

    #[test]
    fn create_persists_on_commit() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("nested/idx");
        let mut idx = InvertedIndex::create(&dir, "fp");
        idx.commit().unwrap();
        let back = InvertedIndex::open(&dir).unwrap();
        assert_eq!(back.doc_count(), 0);
        assert!(back.is_committed());
    }

    #[test]
    fn metadata_survives() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("idx");
        sample().save(&dir).unwrap();
        write_metadata(&dir, "kind", serde_json::json!("qa")).unwrap();
        let m = read_manifest(&dir).unwrap();
        assert_eq!(m.metadata["kind"], "qa");
        assert!(InvertedIndex::open(&dir).is_ok());
    }
}
