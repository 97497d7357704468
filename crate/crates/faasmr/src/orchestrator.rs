//! The client side of a job: plan, run the map phase, wait for every mapper,
//! run the reduce phase, merge the parts and collect metrics.

use std::time::Instant;

use faasmr_core::keys::{
    intermediate_prefix, invocation_log_key, job_metrics_key, part_key, result_key,
    validate_job_id, JOBS_BUCKET,
};
use faasmr_core::plan::{plan_map_tasks, plan_reduce_tasks, PlanError};
use faasmr_core::tsv::{self, KeyCount, ParseError};
use faasmr_core::workload::{compute_workload_pct, mean, WorkloadError};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::runtime::{invocation_log, InvocationRecord, LogLine, Runtime, RuntimeError, Status};
use crate::store::{ObjectKey, StoreError};
use crate::wordcount::{MAP_FUNCTION, REDUCE_FUNCTION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JobConfig {
    pub job_id: String,
    pub num_mappers: usize,
    pub num_reducers: usize,
    pub concurrency_cap: usize,
    pub manifest: Vec<ObjectKey>,
    pub cleanup_intermediates: bool,
}

impl JobConfig {
    /// Fully parallel, intermediates kept.
    pub fn new(
        job_id: impl Into<String>,
        manifest: Vec<ObjectKey>,
        num_mappers: usize,
        num_reducers: usize,
    ) -> Self {
        Self {
            job_id: job_id.into(),
            num_mappers,
            num_reducers,
            concurrency_cap: num_mappers.max(num_reducers).max(1),
            manifest,
            cleanup_intermediates: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobMetrics {
    pub config: JobConfig,
    pub map_records: Vec<InvocationRecord>,
    pub reduce_records: Vec<InvocationRecord>,
    pub avg_map_ms: f64,
    pub avg_reduce_ms: f64,
    pub avg_map_mem_mb: f64,
    pub avg_reduce_mem_mb: f64,
    pub map_pct: f64,
    pub reduce_pct: f64,
    pub wall_clock_ms: f64,
    /// SHA-256 of `out/result.tsv`, hex.
    pub result_sha256: String,
}

/// Schema of `logs/job-metrics.json`.
#[derive(Serialize)]
struct MetricsDoc<'a> {
    config: &'a JobConfig,
    avg_map_ms: f64,
    avg_reduce_ms: f64,
    avg_map_mem_mb: f64,
    avg_reduce_mem_mb: f64,
    map_pct: f64,
    reduce_pct: f64,
    wall_clock_ms: f64,
    result_sha256: &'a str,
    workload_pct_definition: &'static str,
    map_records: Vec<LogLine>,
    reduce_records: Vec<LogLine>,
}

impl JobMetrics {
    pub fn to_json(&self) -> String {
        let doc = MetricsDoc {
            config: &self.config,
            avg_map_ms: self.avg_map_ms,
            avg_reduce_ms: self.avg_reduce_ms,
            avg_map_mem_mb: self.avg_map_mem_mb,
            avg_reduce_mem_mb: self.avg_reduce_mem_mb,
            map_pct: self.map_pct,
            reduce_pct: self.reduce_pct,
            wall_clock_ms: self.wall_clock_ms,
            result_sha256: &self.result_sha256,
            workload_pct_definition: faasmr_core::report::WORKLOAD_PCT_NOTE,
            map_records: self.map_records.iter().map(LogLine::from).collect(),
            reduce_records: self.reduce_records.iter().map(LogLine::from).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("metrics always serialize")
    }

    pub fn records(&self) -> impl Iterator<Item = &InvocationRecord> {
        self.map_records.iter().chain(&self.reduce_records)
    }
}

/// A phase ended with at least one unsuccessful invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFailure {
    /// `(task index, status)` of every failed invocation.
    pub failed: Vec<(usize, Status)>,
    pub map_records: Vec<InvocationRecord>,
    pub reduce_records: Vec<InvocationRecord>,
}

impl std::fmt::Display for PhaseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let list: Vec<String> = self
            .failed
            .iter()
            .map(|(i, s)| match s {
                Status::Failed(msg) => format!("#{i} Failed ({msg})"),
                other => format!("#{i} {}", other.label()),
            })
            .collect();
        write!(f, "{}", list.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JobError {
    #[error("invalid job config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("map phase failed: {0}")]
    MapPhaseFailed(PhaseFailure),
    #[error("reduce phase failed: {0}")]
    ReducePhaseFailed(PhaseFailure),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{key}: {source}")]
    CorruptPart { key: ObjectKey, source: ParseError },
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

fn failures(records: &[InvocationRecord]) -> Vec<(usize, Status)> {
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.status.is_success())
        .map(|(i, r)| (i, r.status.clone()))
        .collect()
}

fn phase_average(records: &[InvocationRecord], field: impl Fn(&InvocationRecord) -> f64) -> f64 {
    let values: Vec<f64> = records.iter().map(field).collect();
    mean(&values).unwrap_or(0.0)
}

/// Runs one complete job. Reducers start only after every mapper succeeded.
///
/// The invocation log is written to `<job>/logs/invocations.jsonl` even when a
/// phase fails, so a failed map phase leaves a log with no reducer lines.
pub fn run_job(config: &JobConfig, runtime: &Runtime) -> Result<JobMetrics, JobError> {
    validate_job_id(&config.job_id).map_err(|e| JobError::InvalidConfig(e.to_string()))?;
    if config.concurrency_cap == 0 {
        return Err(JobError::InvalidConfig(
            "concurrency_cap must be at least 1".into(),
        ));
    }
    let store = runtime.store().clone();
    let job = config.job_id.as_str();
    let started = Instant::now();

    let map_tasks = plan_map_tasks(
        &config.manifest,
        config.num_mappers,
        config.num_reducers,
        job,
    )?;
    let map_requests: Vec<(String, Vec<u8>)> = map_tasks
        .iter()
        .map(|p| {
            (
                MAP_FUNCTION.to_string(),
                serde_json::to_vec(p).expect("params serialize"),
            )
        })
        .collect();
    let map_records = runtime.invoke_batch(&map_requests, config.concurrency_cap)?;
    let failed = failures(&map_records);
    if !failed.is_empty() {
        store.put(
            &invocation_log_key(job),
            invocation_log(&map_records).into_bytes(),
        )?;
        return Err(JobError::MapPhaseFailed(PhaseFailure {
            failed,
            map_records,
            reduce_records: Vec::new(),
        }));
    }

    let reduce_requests: Vec<(String, Vec<u8>)> =
        plan_reduce_tasks(job, config.num_mappers, config.num_reducers)
            .iter()
            .map(|p| {
                (
                    REDUCE_FUNCTION.to_string(),
                    serde_json::to_vec(p).expect("params serialize"),
                )
            })
            .collect();
    let reduce_records = runtime.invoke_batch(&reduce_requests, config.concurrency_cap)?;
    let all: Vec<InvocationRecord> = map_records.iter().chain(&reduce_records).cloned().collect();
    store.put(&invocation_log_key(job), invocation_log(&all).into_bytes())?;
    let failed = failures(&reduce_records);
    if !failed.is_empty() {
        return Err(JobError::ReducePhaseFailed(PhaseFailure {
            failed,
            map_records,
            reduce_records,
        }));
    }

    let result = merge_parts(store.as_ref(), job, config.num_reducers)?;
    let result_sha256 = hex::encode(Sha256::digest(&result));
    store.put(&result_key(job), result)?;
    if config.cleanup_intermediates {
        store.delete_prefix(JOBS_BUCKET, &intermediate_prefix(job))?;
    }
    let wall_clock_ms = started.elapsed().as_secs_f64() * 1000.0;

    let avg_map_ms = phase_average(&map_records, |r| r.exec_time_ms);
    let avg_reduce_ms = phase_average(&reduce_records, |r| r.exec_time_ms);
    let (map_pct, reduce_pct) = compute_workload_pct(avg_map_ms, avg_reduce_ms)?;
    let metrics = JobMetrics {
        config: config.clone(),
        avg_map_mem_mb: phase_average(&map_records, |r| r.peak_modeled_mem_mb),
        avg_reduce_mem_mb: phase_average(&reduce_records, |r| r.peak_modeled_mem_mb),
        map_records,
        reduce_records,
        avg_map_ms,
        avg_reduce_ms,
        map_pct,
        reduce_pct,
        wall_clock_ms,
        result_sha256,
    };
    store.put(&job_metrics_key(job), metrics.to_json().into_bytes())?;
    Ok(metrics)
}

/// Concatenates every reducer part and re-sorts globally by word.
pub fn merge_parts(
    store: &dyn crate::store::ObjectStore,
    job_id: &str,
    num_reducers: usize,
) -> Result<Vec<u8>, JobError> {
    let mut all: Vec<KeyCount> = Vec::new();
    for r in 0..num_reducers {
        let key = part_key(job_id, r);
        let bytes = store.get(&key)?;
        let entries =
            tsv::decode(&bytes).map_err(|source| JobError::CorruptPart { key, source })?;
        all.extend(entries);
    }
    all.sort_unstable_by(|a, b| a.word.cmp(&b.word));
    Ok(tsv::encode(&all))
}
