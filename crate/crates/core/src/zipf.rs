//! Inverse-CDF Zipf sampling over a finite vocabulary.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZipfError {
    #[error("vocabulary size must be positive")]
    EmptyVocabulary,
    #[error("zipf exponent must be a finite value >= 0, got {0}")]
    InvalidExponent(f64),
}

/// Cumulative distribution of Zipf(s, V): weight of rank k (1-based) is `1 / k^s`.
#[derive(Debug, Clone)]
pub struct ZipfTable {
    cumulative: Vec<f64>,
}

impl ZipfTable {
    pub fn new(vocab_size: usize, exponent: f64) -> Result<Self, ZipfError> {
        if vocab_size == 0 {
            return Err(ZipfError::EmptyVocabulary);
        }
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(ZipfError::InvalidExponent(exponent));
        }
        let mut cumulative = Vec::with_capacity(vocab_size);
        let mut total = 0.0;
        for rank in 1..=vocab_size {
            total += libm::pow(rank as f64, -exponent);
            cumulative.push(total);
        }
        for c in &mut cumulative {
            *c /= total;
        }
        // normalization can leave the last bin a hair under 1.0
        cumulative[vocab_size - 1] = 1.0;
        Ok(Self { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Maps a uniform 64-bit draw to a 0-based vocabulary index.
    ///
    /// `u = draw / 2^64`; the result is the first bin whose cumulative weight is `>= u`.
    #[inline]
    pub fn sample(&self, draw: u64) -> usize {
        let u = draw as f64 * (1.0 / 18_446_744_073_709_551_616.0);
        self.cumulative
            .partition_point(|&c| c < u)
            .min(self.cumulative.len() - 1)
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}
