//! Streaming reader for Stack Exchange `posts.xml` dumps.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostType {
    Question,
    Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub id: i64,
    pub post_type: PostType,
    pub accepted_answer_id: Option<i64>,
    pub parent_id: Option<i64>,
    pub score: i64,
    pub title: Option<String>,
    /// HTML, already XML-unescaped.
    pub body: String,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseCounters {
    pub rows: usize,
    pub emitted: usize,
    pub other_post_types: usize,
    pub missing_required: usize,
}

/// Iterator over the question and answer rows of a dump.
///
/// Rows with other `PostTypeId`s are skipped; rows without `Id` or
/// `PostTypeId` (or with unparsable values) are skipped and counted. The
/// first XML syntax error is yielded as [`Error::Xml`] and ends iteration.
pub struct PostReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    counters: ParseCounters,
    done: bool,
}

impl PostReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> PostReader<R> {
    pub fn new(input: R) -> Self {
        PostReader {
            reader: Reader::from_reader(input),
            buf: Vec::new(),
            counters: ParseCounters::default(),
            done: false,
        }
    }

    pub fn counters(&self) -> &ParseCounters {
        &self.counters
    }

    fn xml_error(&self, message: impl ToString) -> Error {
        Error::Xml {
            offset: self.reader.error_position(),
            message: message.to_string(),
        }
    }

    /// Attribute errors are detected after the tag was read; report the
    /// position just past the offending tag.
    fn attr_error(&self, message: impl ToString) -> Error {
        Error::Xml {
            offset: self.reader.buffer_position(),
            message: message.to_string(),
        }
    }

    fn row(&mut self, e: &BytesStart<'_>) -> Result<Option<RawPost>> {
        self.counters.rows += 1;
        let mut id = None;
        let mut post_type = None;
        let mut accepted = None;
        let mut parent = None;
        let mut score = 0i64;
        let mut title = None;
        let mut body = String::new();
        let mut tags = Vec::new();
        let mut malformed = false;

        for attr in e.attributes() {
            let attr = attr.map_err(|err| self.attr_error(err))?;
            let value = attr.unescape_value().map_err(|err| self.attr_error(err))?;
            match attr.key.as_ref() {
                b"Id" => {
                    id = value.trim().parse::<i64>().ok();
                    malformed = id.is_none();
                }
                b"PostTypeId" => post_type = value.trim().parse::<u8>().ok(),
                b"AcceptedAnswerId" => accepted = value.trim().parse().ok(),
                b"ParentId" => parent = value.trim().parse().ok(),
                b"Score" => score = value.trim().parse().unwrap_or(0),
                b"Title" => title = Some(value.into_owned()),
                b"Body" => body = value.into_owned(),
                b"Tags" => tags = parse_tags(&value),
                _ => {}
            }
        }

        let (Some(id), Some(kind)) = (id, post_type) else {
            self.counters.missing_required += 1;
            warn!(
                "skipping row {} without a usable Id/PostTypeId{}",
                self.counters.rows,
                if malformed { " (unparsable Id)" } else { "" }
            );
            return Ok(None);
        };
        let post_type = match kind {
            1 => PostType::Question,
            2 => PostType::Answer,
            _ => {
                self.counters.other_post_types += 1;
                return Ok(None);
            }
        };
        self.counters.emitted += 1;
        Ok(Some(RawPost {
            id,
            post_type,
            accepted_answer_id: accepted,
            parent_id: parent,
            score,
            title,
            body,
            tags,
        }))
    }
}

impl<R: BufRead> Iterator for PostReader<R> {
    type Item = Result<RawPost>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev.into_owned(),
                Err(err) => {
                    self.done = true;
                    return Some(Err(self.xml_error(err)));
                }
            };
            match event {
                Event::Eof => self.done = true,
                Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"row" => {
                    match self.row(&e) {
                        Ok(Some(post)) => return Some(Ok(post)),
                        Ok(None) => {}
                        Err(err) => {
                            self.done = true;
                            return Some(Err(err));
                        }
                    }
                }
                _ => {}
            }
        }
        None
    }
}

/// Parses the `Tags` attribute: either `<a><b>` or `|a|b|`.
pub fn parse_tags(raw: &str) -> Vec<String> {
    raw.split(['<', '>', '|'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Reads every post from a byte stream.
pub fn parse_posts<R: BufRead>(input: R) -> Result<(Vec<RawPost>, ParseCounters)> {
    let mut reader = PostReader::new(input);
    let mut posts = Vec::new();
    for post in reader.by_ref() {
        posts.push(post?);
    }
    Ok((posts, reader.counters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(xml: &str) -> Result<(Vec<RawPost>, ParseCounters)> {
        parse_posts(xml.as_bytes())
    }

    #[test]
    fn question_tags_decoded() {
        let xml = r#"<?xml version="1.0" encoding="utf-8"?>
<posts>
  <row Id="9" PostTypeId="1" AcceptedAnswerId="12" Score="224" Title="How to take a screenshot?" Body="&lt;p&gt;Hi&lt;/p&gt;" Tags="&lt;android&gt;&lt;screenshot&gt;" />
</posts>"#;
        let (posts, _) = parse(xml).unwrap();
        assert_eq!(posts.len(), 1);
        let q = &posts[0];
        assert_eq!(q.post_type, PostType::Question);
        assert_eq!(q.tags, ["android", "screenshot"]);
        assert_eq!(q.body, "<p>Hi</p>");
        assert_eq!(q.accepted_answer_id, Some(12));
        assert_eq!(q.score, 224);
    }

    #[test]
    fn empty_dump() {
        assert!(parse("<posts/>").unwrap().0.is_empty());
        assert!(parse("<posts></posts>").unwrap().0.is_empty());
    }

    #[test]
    fn three_rows() {
        let xml = r#"<posts>
<row Id="1" PostTypeId="1" AcceptedAnswerId="2" Score="1" Title="t" Body="b" Tags="&lt;android&gt;"/>
<row Id="2" PostTypeId="2" ParentId="1" Score="3" Body="a"/>
<row Id="3" PostTypeId="2" ParentId="77" Score="-1" Body="orphan"/>
</posts>"#;
        let (posts, c) = parse(xml).unwrap();
        assert_eq!(posts.len(), 3);
        assert_eq!(c.emitted, 3);
        assert_eq!(posts[2].score, -1);
        assert_eq!(posts[1].parent_id, Some(1));
    }

    #[test]
    fn skips_and_counts() {
        let xml = r#"<posts>
<row PostTypeId="1" Body="no id"/>
<row Id="5" Body="no type"/>
<row Id="6" PostTypeId="5" Body="wiki"/>
<row Id="7" PostTypeId="2" ParentId="1" Body="ok"/>
</posts>"#;
        let (posts, c) = parse(xml).unwrap();
        assert_eq!(posts.len(), 1);
        assert_eq!(c.missing_required, 2);
        assert_eq!(c.other_post_types, 1);
        assert_eq!(c.rows, 4);
    }

    #[test]
    fn malformed_reports_offset() {
        let xml = "<posts>\n<row Id=\"1\" PostTypeId=\"1\" Body=\"x\"/>\n<row Id=\"2\" </posts>";
        let err = parse(xml).unwrap_err();
        match err {
            Error::Xml { offset, .. } => assert!(offset > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pipe_tags() {
        assert_eq!(parse_tags("|android|java|"), ["android", "java"]);
        assert!(parse_tags("").is_empty());
    }
}
