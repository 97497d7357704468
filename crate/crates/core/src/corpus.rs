//! Deterministic Zipf corpus: the stand-in for the experiment's input files.
//!
//! File `i` draws from a SplitMix64 stream seeded with `splitmix64(seed ^ i)`.
//! Each word is `w` plus the zero-padded 0-based vocabulary index chosen by
//! inverse-CDF Zipf sampling; words are separated by single spaces, a newline
//! ends every `line_width` words and every non-empty file ends with a newline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::keys::{input_key, manifest_key, validate_job_id};
use crate::rng::{splitmix64, SplitMix64};
use crate::store::{ObjectKey, ObjectStore, StoreError};
use crate::zipf::{ZipfError, ZipfTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub num_files: usize,
    pub words_per_file: usize,
    pub vocab_size: usize,
    pub zipf_s: f64,
    pub seed: u64,
    pub line_width: usize,
    /// File `i` holds `round(words_per_file * skew^i)` words (at least one).
    pub skew: f64,
}

pub const DESK_SCALE_WORDS_PER_FILE: usize = 50_000;
pub const FULL_SCALE_WORDS_PER_FILE: usize = 1_000_000;

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            num_files: 50,
            words_per_file: DESK_SCALE_WORDS_PER_FILE,
            vocab_size: 10_000,
            zipf_s: 1.0,
            seed: 0,
            line_width: 16,
            skew: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("skew must be a finite positive factor, got {0}")]
    InvalidSkew(f64),
    #[error(transparent)]
    Zipf(#[from] ZipfError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Keys of the generated files plus the exact number of tokens they hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedCorpus {
    pub manifest: Vec<ObjectKey>,
    pub total_tokens: u64,
}

pub fn file_seed(seed: u64, file_index: usize) -> u64 {
    splitmix64(seed ^ file_index as u64).1
}

fn digits(mut n: usize) -> usize {
    let mut d = 1;
    while n >= 10 {
        n /= 10;
        d += 1;
    }
    d
}

#[derive(Debug, Clone)]
pub struct CorpusGenerator {
    spec: CorpusSpec,
    table: ZipfTable,
    width: usize,
}

impl CorpusGenerator {
    pub fn new(spec: CorpusSpec) -> Result<Self, CorpusError> {
        for (name, v) in [
            ("num_files", spec.num_files),
            ("words_per_file", spec.words_per_file),
            ("vocab_size", spec.vocab_size),
            ("line_width", spec.line_width),
        ] {
            if v == 0 {
                return Err(CorpusError::NonPositive(name));
            }
        }
        if !spec.skew.is_finite() || spec.skew <= 0.0 {
            return Err(CorpusError::InvalidSkew(spec.skew));
        }
        let table = ZipfTable::new(spec.vocab_size, spec.zipf_s)?;
        let width = digits(spec.vocab_size - 1);
        Ok(Self { spec, table, width })
    }

    pub fn spec(&self) -> &CorpusSpec {
        &self.spec
    }

    pub fn words_in_file(&self, file_index: usize) -> usize {
        if self.spec.skew == 1.0 {
            return self.spec.words_per_file;
        }
        let scaled = self.spec.words_per_file as f64 * libm::pow(self.spec.skew, file_index as f64);
        (libm::round(scaled) as usize).max(1)
    }

    pub fn total_tokens(&self) -> u64 {
        (0..self.spec.num_files)
            .map(|i| self.words_in_file(i) as u64)
            .sum()
    }

    /// Vocabulary label for a 0-based index, e.g. `w0042`.
    pub fn word(&self, index: usize) -> String {
        let mut s = String::with_capacity(self.width + 1);
        let _ = write!(s, "w{index:0width$}", width = self.width);
        s
    }

    pub fn generate_file(&self, file_index: usize) -> Vec<u8> {
        let n = self.words_in_file(file_index);
        let mut rng = SplitMix64::new(file_seed(self.spec.seed, file_index));
        let mut out = String::with_capacity(n * (self.width + 2));
        for k in 0..n {
            let idx = self.table.sample(rng.next_u64());
            let _ = write!(out, "w{idx:0width$}", width = self.width);
            let last_in_line = (k + 1) % self.spec.line_width == 0;
            out.push(if last_in_line || k + 1 == n {
                '\n'
            } else {
                ' '
            });
        }
        out.into_bytes()
    }
}

/// Writes every file plus `<job_id>/manifest.txt` (one key per line) into the store.
pub fn generate_corpus(
    spec: &CorpusSpec,
    store: &dyn ObjectStore,
    job_id: &str,
) -> Result<GeneratedCorpus, CorpusError> {
    validate_job_id(job_id)?;
    let generator = CorpusGenerator::new(spec.clone())?;
    let mut manifest = Vec::with_capacity(spec.num_files);
    for i in 0..spec.num_files {
        let key = input_key(job_id, i);
        store.put(&key, generator.generate_file(i))?;
        manifest.push(key);
    }
    store.put(&manifest_key(job_id), encode_manifest(&manifest))?;
    Ok(GeneratedCorpus {
        manifest,
        total_tokens: generator.total_tokens(),
    })
}

pub fn encode_manifest(keys: &[ObjectKey]) -> Vec<u8> {
    let mut out = String::new();
    for k in keys {
        out.push_str(k.key());
        out.push('\n');
    }
    out.into_bytes()
}

/// Parses a manifest written by [`encode_manifest`]; keys live in `bucket`.
pub fn decode_manifest(bucket: &str, bytes: &[u8]) -> Result<Vec<ObjectKey>, StoreError> {
    let text = core::str::from_utf8(bytes)
        .map_err(|_| StoreError::InvalidKey(String::from("manifest is not UTF-8")))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| ObjectKey::new(bucket, l))
        .collect()
}
