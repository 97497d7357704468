//! Function-count sweeps: repeated jobs per sweep point, median aggregation,
//! CSV output and the trend verdict.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use faasmr_core::corpus::{generate_corpus, CorpusError, CorpusSpec};
use faasmr_core::keys::{job_prefix, JOBS_BUCKET};
use faasmr_core::report::{
    evaluate_trend, format_csv, parse_csv, render_table, render_verdict, BenchRow, CsvError,
    TrendVerdict,
};
use faasmr_core::workload::{compute_workload_pct, median, round2, WorkloadError};
use log::info;

use crate::orchestrator::{run_job, JobConfig, JobError, JobMetrics};
use crate::runtime::{Runtime, RuntimeError, RuntimeOptions};
use crate::store::{SharedStore, StoreError, StoreKind};
use crate::wordcount::{register_wordcount, WordCountFunctions};

pub const BENCH_CSV: &str = "bench.csv";
pub const CROSS_CSV: &str = "bench-cross.csv";
pub const REPORT_TXT: &str = "report.txt";

pub const CROSS_CSV_HEADER: &str =
    "mappers,reducers,avg_map_ms,avg_reduce_ms,avg_map_mem_mb,avg_reduce_mem_mb,map_pct,reduce_pct,wall_clock_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Prefix of every job id in the sweep.
    pub sweep_id: String,
    pub func_counts: Vec<u32>,
    pub corpus: CorpusSpec,
    pub repeats: usize,
    /// `None` runs every phase fully parallel.
    pub concurrency_cap: Option<usize>,
    /// `true`: mappers = reducers = n. `false`: every (mappers, reducers) pair.
    pub tie_mr: bool,
    pub store: StoreKind,
    pub runtime: RuntimeOptions,
    pub functions: WordCountFunctions,
    /// One discarded job per sweep point before the timed repeats.
    pub warmup: bool,
    /// Keep every job's objects instead of deleting them after measurement.
    pub retain_objects: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sweep_id: "bench".to_string(),
            func_counts: vec![1, 2, 5, 10],
            corpus: CorpusSpec::default(),
            repeats: 3,
            concurrency_cap: None,
            tie_mr: true,
            store: StoreKind::Mem,
            runtime: RuntimeOptions::default(),
            functions: WordCountFunctions::default(),
            warmup: true,
            retain_objects: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |why: &str| Err(SweepError::InvalidConfig(why.to_string()));
        if self.func_counts.is_empty() || self.func_counts[0] == 0 {
            return bad("func_counts must be non-empty and positive");
        }
        if self.func_counts.windows(2).any(|w| w[0] >= w[1]) {
            return bad("func_counts must be strictly increasing");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.concurrency_cap == Some(0) {
            return bad("concurrency cap must be at least 1");
        }
        faasmr_core::keys::validate_job_id(&self.sweep_id)
            .map_err(|e| SweepError::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    fn points(&self) -> Vec<(u32, u32)> {
        if self.tie_mr {
            self.func_counts.iter().map(|&n| (n, n)).collect()
        } else {
            self.func_counts
                .iter()
                .flat_map(|&m| self.func_counts.iter().map(move |&r| (m, r)))
                .collect()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("job {job_id} (mappers={mappers}, reducers={reducers}) failed: {source}")]
    JobFailed {
        job_id: String,
        mappers: u32,
        reducers: u32,
        source: JobError,
    },
    #[error("repeats of mappers={mappers}, reducers={reducers} produced different results")]
    NonDeterministic { mappers: u32, reducers: u32 },
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

/// Everything measured at one sweep point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub mappers: u32,
    pub reducers: u32,
    /// Aggregated row; `func_num` is the mapper count.
    pub row: BenchRow,
    pub jobs: Vec<JobMetrics>,
    pub result_sha256: String,
    pub total_tokens: u64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// One row per `mappers == reducers` point, by function count.
    pub rows: Vec<BenchRow>,
    pub points: Vec<PointResult>,
    pub verdict: TrendVerdict,
    pub cross: bool,
}

fn aggregate(func_num: u32, jobs: &[JobMetrics]) -> Result<BenchRow, WorkloadError> {
    let med = |f: fn(&JobMetrics) -> f64| {
        let values: Vec<f64> = jobs.iter().map(f).collect();
        median(&values).unwrap_or(0.0)
    };
    let avg_map_ms = med(|j| j.avg_map_ms);
    let avg_reduce_ms = med(|j| j.avg_reduce_ms);
    let (map_pct, reduce_pct) = compute_workload_pct(avg_map_ms, avg_reduce_ms)?;
    Ok(BenchRow {
        func_num,
        avg_map_ms,
        avg_reduce_ms,
        avg_map_mem_mb: med(|j| j.avg_map_mem_mb),
        avg_reduce_mem_mb: med(|j| j.avg_reduce_mem_mb),
        map_pct,
        reduce_pct,
        wall_clock_ms: med(|j| j.wall_clock_ms),
    })
}

/// Runs the sweep against a fresh store of the configured kind.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport, SweepError> {
    let store = config.store.open()?;
    run_sweep_in(config, store)
}

/// Runs the sweep against `store`. Sweep points run strictly one after another.
pub fn run_sweep_in(config: &SweepConfig, store: SharedStore) -> Result<SweepReport, SweepError> {
    config.validate()?;
    let runtime = Runtime::new(store.clone(), config.runtime);
    register_wordcount(&runtime, &config.functions)?;

    let mut points = Vec::new();
    for (m, r) in config.points() {
        let point_id = format!("{}-m{m}-r{r}", config.sweep_id);
        let corpus_id = format!("{point_id}-corpus");
        let corpus = generate_corpus(&config.corpus, store.as_ref(), &corpus_id)?;
        let cap = config.concurrency_cap.unwrap_or(m.max(r) as usize);
        let job = |job_id: String| -> Result<JobMetrics, SweepError> {
            let mut jc = JobConfig::new(
                job_id.clone(),
                corpus.manifest.clone(),
                m as usize,
                r as usize,
            );
            jc.concurrency_cap = cap;
            let metrics = run_job(&jc, &runtime).map_err(|source| SweepError::JobFailed {
                job_id: job_id.clone(),
                mappers: m,
                reducers: r,
                source,
            })?;
            if !config.retain_objects {
                store.delete_prefix(JOBS_BUCKET, &job_prefix(&job_id))?;
            }
            Ok(metrics)
        };

        if config.warmup {
            job(format!("{point_id}-warmup"))?;
        }
        let mut jobs = Vec::with_capacity(config.repeats);
        for k in 0..config.repeats {
            let metrics = job(format!("{point_id}-k{k}"))?;
            info!(
                "mappers={m} reducers={r} repeat={k}: map {:.2} ms, reduce {:.2} ms, wall {:.2} ms",
                metrics.avg_map_ms, metrics.avg_reduce_ms, metrics.wall_clock_ms
            );
            jobs.push(metrics);
        }
        if !config.retain_objects {
            store.delete_prefix(JOBS_BUCKET, &job_prefix(&corpus_id))?;
        }

        let result_sha256 = jobs[0].result_sha256.clone();
        if jobs.iter().any(|j| j.result_sha256 != result_sha256) {
            return Err(SweepError::NonDeterministic {
                mappers: m,
                reducers: r,
            });
        }
        let row = aggregate(m, &jobs)?;
        points.push(PointResult {
            mappers: m,
            reducers: r,
            row,
            jobs,
            result_sha256,
            total_tokens: corpus.total_tokens,
        });
    }

    let rows: Vec<BenchRow> = points
        .iter()
        .filter(|p| p.mappers == p.reducers)
        .map(|p| p.row.clone())
        .collect();
    let verdict = evaluate_trend(&rows);
    Ok(SweepReport {
        rows,
        points,
        verdict,
        cross: !config.tie_mr,
    })
}

pub fn emit_csv(rows: &[BenchRow], path: &Path) -> io::Result<()> {
    if rows.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "no rows to write",
        ));
    }
    fs::write(path, format_csv(rows))
}

/// CSV of every (mappers, reducers) point of a cross sweep.
pub fn format_cross_csv(points: &[PointResult]) -> String {
    let mut out = String::from(CROSS_CSV_HEADER);
    out.push('\n');
    for p in points {
        let r = &p.row;
        let _ = write!(out, "{},{}", p.mappers, p.reducers);
        for v in [
            r.avg_map_ms,
            r.avg_reduce_ms,
            r.avg_map_mem_mb,
            r.avg_reduce_mem_mb,
            r.map_pct,
            r.reduce_pct,
            r.wall_clock_ms,
        ] {
            let _ = write!(out, ",{:.2}", round2(v));
        }
        out.push('\n');
    }
    out
}

/// Table plus verdict, as printed by `report`.
pub fn render_report(rows: &[BenchRow]) -> String {
    let verdict = evaluate_trend(rows);
    format!("{}\n{}", render_table(rows), render_verdict(rows, &verdict))
}

/// Writes `bench.csv`, `report.txt` and, for cross sweeps, `bench-cross.csv` into `dir`.
pub fn write_outputs(report: &SweepReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    if !report.rows.is_empty() {
        emit_csv(&report.rows, &dir.join(BENCH_CSV))?;
        fs::write(dir.join(REPORT_TXT), render_report(&report.rows))?;
    }
    if report.cross {
        fs::write(dir.join(CROSS_CSV), format_cross_csv(&report.points))?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: CsvError },
}

/// Loads `bench.csv` from `dir`.
pub fn load_rows(dir: &Path) -> Result<Vec<BenchRow>, ReportError> {
    let path = dir.join(BENCH_CSV);
    let shown = path.display().to_string();
    let text = fs::read_to_string(&path).map_err(|source| ReportError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_csv(&text).map_err(|source| ReportError::Csv {
        path: shown,
        source,
    })
}
