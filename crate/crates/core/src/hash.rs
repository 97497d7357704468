//! FNV-1a routing of words to reducers.

/// 64-bit FNV offset basis.
pub const FNV_OFFSET_BASIS: u64 = 14_695_981_039_346_656_037;
/// 64-bit FNV prime.
pub const FNV_PRIME: u64 = 1_099_511_628_211;

/// FNV-1a, 64-bit, over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET_BASIS, |hash, &b| {
        (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Reducer index for `word` among `num_reducers` partitions.
///
/// The value depends only on the UTF-8 bytes of the word, so it is stable
/// across runs, hosts and implementation languages.
///
/// **PANIC:** if `num_reducers` is zero.
pub fn partition_of(word: &str, num_reducers: usize) -> usize {
    assert!(num_reducers > 0, "num_reducers must be at least 1");
    (fnv1a64(word.as_bytes()) % num_reducers as u64) as usize
}
