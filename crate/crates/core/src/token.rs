//! Word extraction: maximal alphanumeric runs, lowercased.
//!
//! Input is treated as UTF-8; invalid byte sequences act as separators.
//! Lowercasing is per-character simple case mapping, which is byte-exact for
//! ASCII. Digits are word characters.

use alloc::string::String;
use alloc::vec::Vec;

/// Something that splits a byte stream into words.
pub trait Tokenizer {
    /// Calls `sink` once per token, in input order.
    fn for_each_token(&self, text: &[u8], sink: &mut dyn FnMut(&str));
}

/// The word-count tokenizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlnumLowercase;

impl Tokenizer for AlnumLowercase {
    fn for_each_token(&self, text: &[u8], sink: &mut dyn FnMut(&str)) {
        let mut word = String::new();
        for chunk in text.utf8_chunks() {
            for ch in chunk.valid().chars() {
                if ch.is_ascii() {
                    if ch.is_ascii_alphanumeric() {
                        word.push(ch.to_ascii_lowercase());
                        continue;
                    }
                } else if ch.is_alphanumeric() {
                    // simple mapping: 'İ' becomes 'i', not "i\u{307}"
                    word.push(ch.to_lowercase().next().unwrap_or(ch));
                    continue;
                }
                flush(&mut word, sink);
            }
            if !chunk.invalid().is_empty() {
                flush(&mut word, sink);
            }
        }
        flush(&mut word, sink);
    }
}

#[inline]
fn flush(word: &mut String, sink: &mut dyn FnMut(&str)) {
    if !word.is_empty() {
        sink(word);
        word.clear();
    }
}

/// Collects every token of `text`.
pub fn tokenize(text: &[u8]) -> Vec<String> {
    let mut out = Vec::new();
    AlnumLowercase.for_each_token(text, &mut |w| out.push(String::from(w)));
    out
}
