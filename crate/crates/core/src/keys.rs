//! Canonical object layout of a job inside the `jobs` bucket.
//!
//! ```text
//! <job_id>/manifest.txt
//! <job_id>/in/f<NNNNN>.txt
//! <job_id>/int/m<m>/p<r>.tsv
//! <job_id>/out/part-<r>.tsv
//! <job_id>/out/result.tsv
//! <job_id>/logs/invocations.jsonl
//! <job_id>/logs/job-metrics.json
//! ```

use alloc::format;
use alloc::string::String;

use crate::store::{ObjectKey, StoreError};

pub const JOBS_BUCKET: &str = "jobs";

/// A job id is a single key segment.
pub fn validate_job_id(job_id: &str) -> Result<(), StoreError> {
    if job_id.contains('/') {
        return Err(StoreError::InvalidKey(format!(
            "job id {job_id:?} must not contain '/'"
        )));
    }
    crate::store::validate_key(job_id)
}

fn key(path: String) -> ObjectKey {
    // callers only pass validated job ids, so the composed path is always valid
    ObjectKey::new(JOBS_BUCKET, path).expect("canonical key from a validated job id")
}

pub fn job_prefix(job_id: &str) -> String {
    format!("{job_id}/")
}

pub fn manifest_key(job_id: &str) -> ObjectKey {
    key(format!("{job_id}/manifest.txt"))
}

pub fn input_key(job_id: &str, file_index: usize) -> ObjectKey {
    key(format!("{job_id}/in/f{file_index:05}.txt"))
}

pub fn intermediate_key(job_id: &str, mapper: usize, reducer: usize) -> ObjectKey {
    key(format!("{job_id}/int/m{mapper}/p{reducer}.tsv"))
}

pub fn intermediate_prefix(job_id: &str) -> String {
    format!("{job_id}/int/")
}

pub fn part_key(job_id: &str, reducer: usize) -> ObjectKey {
    key(format!("{job_id}/out/part-{reducer}.tsv"))
}

pub fn result_key(job_id: &str) -> ObjectKey {
    key(format!("{job_id}/out/result.tsv"))
}

pub fn invocation_log_key(job_id: &str) -> ObjectKey {
    key(format!("{job_id}/logs/invocations.jsonl"))
}

pub fn job_metrics_key(job_id: &str) -> ObjectKey {
    key(format!("{job_id}/logs/job-metrics.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        assert_eq!(input_key("j1", 7).key(), "j1/in/f00007.txt");
        assert_eq!(intermediate_key("j1", 3, 0).key(), "j1/int/m3/p0.tsv");
        assert_eq!(part_key("j1", 2).key(), "j1/out/part-2.tsv");
        assert_eq!(result_key("j1").key(), "j1/out/result.tsv");
        assert_eq!(invocation_log_key("j1").key(), "j1/logs/invocations.jsonl");
        assert_eq!(job_metrics_key("j1").key(), "j1/logs/job-metrics.json");
        assert_eq!(manifest_key("j1").bucket(), JOBS_BUCKET);
    }

    #[test]
    fn job_id_is_one_segment() {
        assert!(validate_job_id("bench-n5-k0").is_ok());
        assert!(validate_job_id("a/b").is_err());
        assert!(validate_job_id("").is_err());
        assert!(validate_job_id("..").is_err());
    }
}
