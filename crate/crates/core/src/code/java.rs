//! Lexical Java method segmenter.
//!
//! A method is recognised as `name ( ... ) [throws X, Y] {` outside strings,
//! character literals and comments, where `name` is not a control-flow
//! keyword and is not part of a call (`a.name(`, `new Name(`). Its snippet
//! runs from the opening brace to the matching closing brace. This is not a
//! parser: it only needs to find method text, and it degrades gracefully on
//! anything it does not understand.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Ident,
    Literal,
    Punct(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub kind: Kind,
    pub span: Range<usize>,
}

pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Range<usize>>,
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80
}

/// Finds the end of a quoted literal starting at `start` (which holds the
/// quote). Stops after the closing quote or before a newline.
fn skip_quoted(src: &[u8], start: usize, quote: u8) -> usize {
    let mut i = start + 1;
    while i < src.len() {
        match src[i] {
            b'\\' => i += 2,
            b'\n' => return i,
            b if b == quote => return i + 1,
            _ => i += 1,
        }
    }
    src.len()
}

pub(crate) fn lex(source: &str) -> Lexed {
    let src = source.as_bytes();
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let b = src[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if src[i..].starts_with(b"//") {
            let end = src[i..]
                .iter()
                .position(|&c| c == b'\n')
                .map_or(src.len(), |p| i + p);
            comments.push(i..end);
            i = end;
        } else if src[i..].starts_with(b"/*") {
            let end = find(src, i + 2, b"*/").map_or(src.len(), |p| p + 2);
            comments.push(i..end);
            i = end;
        } else if src[i..].starts_with(b"\"\"\"") {
            let mut j = i + 3;
            let end = loop {
                match find(src, j, b"\"\"\"") {
                    Some(p) if p > 0 && src[p - 1] == b'\\' => j = p + 1,
                    Some(p) => break p + 3,
                    None => break src.len(),
                }
            };
            tokens.push(Token { kind: Kind::Literal, span: i..end });
            i = end;
        } else if b == b'"' || b == b'\'' {
            let end = skip_quoted(src, i, b).min(src.len());
            tokens.push(Token { kind: Kind::Literal, span: i..end });
            i = end;
        } else if is_ident_byte(b) {
            let start = i;
            while i < src.len() && is_ident_byte(src[i]) {
                i += 1;
            }
            tokens.push(Token { kind: Kind::Ident, span: start..i });
        } else {
            tokens.push(Token { kind: Kind::Punct(b), span: i..i + 1 });
            i += 1;
        }
    }
    Lexed { tokens, comments }
}

fn find(hay: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    if from >= hay.len() {
        return None;
    }
    hay[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

/// For each `{` token, the index of its matching `}`. `None` when the braces
/// do not balance.
pub(crate) fn match_braces(tokens: &[Token]) -> Option<Vec<Option<usize>>> {
    let mut matches = vec![None; tokens.len()];
    let mut stack = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        match t.kind {
            Kind::Punct(b'{') => stack.push(i),
            Kind::Punct(b'}') => {
                let open = stack.pop()?;
                matches[open] = Some(i);
            }
            _ => {}
        }
    }
    stack.is_empty().then_some(matches)
}

const NOT_A_METHOD: &[&str] = &[
    "if", "for", "while", "switch", "catch", "synchronized", "try", "return", "new", "throw",
    "else", "do", "super", "this", "assert", "case", "yield", "finally",
];

/// Words that cannot directly precede a method name in a declaration.
const NOT_A_DECLARATOR: &[&str] = &[
    "return", "new", "throw", "else", "case", "yield", "assert", "instanceof",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MethodSpan {
    pub name: String,
    /// First byte of the declaration (modifiers, annotations, type).
    pub decl_start: usize,
    /// Byte range from the opening to the closing brace, inclusive.
    pub body: Range<usize>,
    pub leading_comments: Vec<Range<usize>>,
}

pub(crate) fn find_methods(source: &str) -> Option<Vec<MethodSpan>> {
    let Lexed { tokens, comments } = lex(source);
    let braces = match_braces(&tokens)?;
    let text = |t: &Token| &source[t.span.clone()];
    let is_punct = |i: usize, c: u8| tokens.get(i).is_some_and(|t| t.kind == Kind::Punct(c));

    let mut methods = Vec::new();
    for i in 0..tokens.len() {
        if tokens[i].kind != Kind::Ident || !is_punct(i + 1, b'(') {
            continue;
        }
        let name = text(&tokens[i]);
        if NOT_A_METHOD.contains(&name) || name.as_bytes()[0].is_ascii_digit() {
            continue;
        }
        if i > 0 {
            let prev = &tokens[i - 1];
            let ok = match prev.kind {
                Kind::Ident => !NOT_A_DECLARATOR.contains(&text(prev)),
                Kind::Punct(c) => matches!(c, b'>' | b']' | b'{' | b'}' | b';'),
                Kind::Literal => false,
            };
            if !ok {
                continue;
            }
        }
        let Some(close) = matching_paren(&tokens, i + 1) else {
            continue;
        };
        let Some(open) = body_start(source, &tokens, close + 1) else {
            continue;
        };
        let Some(end) = braces[open] else {
            continue;
        };

        let decl_tok = (0..i)
            .rev()
            .find(|&j| matches!(tokens[j].kind, Kind::Punct(b';' | b'{' | b'}')))
            .map_or(0, |j| j + 1);
        let gap_start = if decl_tok == 0 { 0 } else { tokens[decl_tok - 1].span.end };
        let decl_start = tokens[decl_tok].span.start;
        let leading_comments = comments
            .iter()
            .filter(|c| c.start >= gap_start && c.end <= decl_start)
            .cloned()
            .collect();

        methods.push(MethodSpan {
            name: name.to_string(),
            decl_start,
            body: tokens[open].span.start..tokens[end].span.end,
            leading_comments,
        });
    }
    Some(methods)
}

/// Index of the `)` closing the `(` at `open`, provided the list holds no
/// statement or block punctuation.
fn matching_paren(tokens: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (j, t) in tokens.iter().enumerate().skip(open) {
        match t.kind {
            Kind::Punct(b'(') => depth += 1,
            Kind::Punct(b')') => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            Kind::Punct(b'{' | b'}' | b';') => return None,
            _ => {}
        }
    }
    None
}

/// After a parameter list, skips an optional `throws` clause and returns the
/// index of the body's `{`.
fn body_start(source: &str, tokens: &[Token], mut j: usize) -> Option<usize> {
    let t = tokens.get(j)?;
    if t.kind == Kind::Ident && &source[t.span.clone()] == "throws" {
        j += 1;
        loop {
            let t = tokens.get(j)?;
            match t.kind {
                Kind::Ident => j += 1,
                Kind::Punct(b'.' | b',' | b'<' | b'>' | b'?') => j += 1,
                _ => break,
            }
        }
    }
    (tokens.get(j)?.kind == Kind::Punct(b'{')).then_some(j)
}
