//! Phase workload split and the small statistics used by the harness.
//!
//! Workload percentage of a phase is its share of `avg_map_ms + avg_reduce_ms`.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum WorkloadError {
    #[error("both phase averages are zero")]
    DegenerateJob,
    #[error("phase averages must be finite and non-negative, got ({0}, {1})")]
    InvalidInput(f64, f64),
}

/// Rounds half away from zero to two decimal places.
pub fn round2(x: f64) -> f64 {
    libm::round(x * 100.0) / 100.0
}

/// `(100·a/(a+b), 100·b/(a+b))`, each rounded to two decimals.
pub fn compute_workload_pct(
    avg_map_ms: f64,
    avg_reduce_ms: f64,
) -> Result<(f64, f64), WorkloadError> {
    let valid = |x: f64| x.is_finite() && x >= 0.0;
    if !valid(avg_map_ms) || !valid(avg_reduce_ms) {
        return Err(WorkloadError::InvalidInput(avg_map_ms, avg_reduce_ms));
    }
    let total = avg_map_ms + avg_reduce_ms;
    if total == 0.0 {
        return Err(WorkloadError::DegenerateJob);
    }
    Ok((
        round2(100.0 * avg_map_ms / total),
        round2(100.0 * avg_reduce_ms / total),
    ))
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Middle value; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}
