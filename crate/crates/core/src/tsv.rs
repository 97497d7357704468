//! The `word\tcount\n` format used for intermediate and output objects.
//!
//! Records are sorted by byte-wise ascending word with no duplicates, every
//! line (including the last) ends in `\n`, and an empty object holds zero
//! records. Counts are canonical decimal: no sign, no leading zeros, `>= 1`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KeyCount {
    pub word: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: not valid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("line {line}: missing tab delimiter")]
    MissingTab { line: usize },
    #[error("line {line}: empty word")]
    EmptyWord { line: usize },
    #[error("line {line}: count is not a canonical positive decimal")]
    InvalidCount { line: usize },
    #[error("line {line}: word is not strictly greater than the previous word")]
    Unsorted { line: usize },
    #[error("last line is not newline-terminated")]
    MissingFinalNewline,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntryError {
    #[error("word must be non-empty")]
    EmptyWord,
    #[error("word must not contain tab or newline")]
    ForbiddenByte,
    #[error("count must be at least 1")]
    ZeroCount,
}

impl KeyCount {
    pub fn new(word: impl Into<String>, count: u64) -> Result<Self, EntryError> {
        let word = word.into();
        check_entry(&word, count)?;
        Ok(Self { word, count })
    }
}

fn check_entry(word: &str, count: u64) -> Result<(), EntryError> {
    if word.is_empty() {
        return Err(EntryError::EmptyWord);
    }
    if word.bytes().any(|b| b == b'\t' || b == b'\n') {
        return Err(EntryError::ForbiddenByte);
    }
    if count == 0 {
        return Err(EntryError::ZeroCount);
    }
    Ok(())
}

/// Serializes `(word, count)` pairs, which must already be sorted and valid.
pub fn encode_pairs<'a, I>(pairs: I) -> Vec<u8>
where
    I: IntoIterator<Item = (&'a str, u64)>,
{
    let mut out = String::new();
    for (word, count) in pairs {
        debug_assert!(check_entry(word, count).is_ok());
        out.push_str(word);
        out.push('\t');
        let _ = write!(out, "{count}");
        out.push('\n');
    }
    out.into_bytes()
}

pub fn encode(entries: &[KeyCount]) -> Vec<u8> {
    encode_pairs(entries.iter().map(|e| (e.word.as_str(), e.count)))
}

/// Parses an object written by [`encode`]; also verifies the sort order.
pub fn decode(bytes: &[u8]) -> Result<Vec<KeyCount>, ParseError> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let Some(body) = bytes.strip_suffix(b"\n") else {
        return Err(ParseError::MissingFinalNewline);
    };
    let mut out: Vec<KeyCount> = Vec::new();
    for (i, raw) in body.split(|&b| b == b'\n').enumerate() {
        let line = i + 1;
        let text = core::str::from_utf8(raw).map_err(|_| ParseError::InvalidUtf8 { line })?;
        let (word, count) = text
            .split_once('\t')
            .ok_or(ParseError::MissingTab { line })?;
        if word.is_empty() {
            return Err(ParseError::EmptyWord { line });
        }
        let count = parse_count(count).ok_or(ParseError::InvalidCount { line })?;
        if let Some(prev) = out.last() {
            if prev.word.as_str() >= word {
                return Err(ParseError::Unsorted { line });
            }
        }
        out.push(KeyCount {
            word: String::from(word),
            count,
        });
    }
    Ok(out)
}

fn parse_count(s: &str) -> Option<u64> {
    let bytes = s.as_bytes();
    if bytes.is_empty() || bytes[0] == b'0' || !bytes.iter().all(u8::is_ascii_digit) {
        return None;
    }
    s.parse().ok()
}
