//! A local function-compute emulator.
//!
//! Functions are registered once and invoked by name. Each invocation runs on
//! its own thread with a fresh [`Meter`], a deadline and a cancellation flag.
//! Tasks check the deadline cooperatively at [`TaskContext::checkpoint`]; the
//! caller additionally stops waiting once `timeout_ms` has elapsed and records
//! the invocation as timed out, leaving the detached thread to wind down.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::{Arc, Mutex, RwLock};
use std::thread;
use std::time::{Duration, Instant};

use faasmr_core::meter::{Meter, MeterError, BYTES_PER_MB};
use faasmr_core::task::{Interrupted, TaskContext, TaskError};
use serde::{Deserialize, Serialize};

use crate::store::{ObjectStore, SharedStore};

pub const DEFAULT_CPU_SHARE: f64 = 0.35;
pub const DEFAULT_MEMORY_LIMIT_MB: u64 = 512;
pub const DEFAULT_TIMEOUT_MS: u64 = 600_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Mapper,
    Reducer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    pub kind: FunctionKind,
    /// Fraction of one vCPU, `0 < share <= 1`.
    pub cpu_share: f64,
    pub memory_limit_mb: u64,
    pub timeout_ms: u64,
}

impl FunctionSpec {
    /// A spec with the default resource configuration (0.35 vCPU, 512 MB).
    pub fn new(name: impl Into<String>, kind: FunctionKind) -> Self {
        Self {
            name: name.into(),
            kind,
            cpu_share: DEFAULT_CPU_SHARE,
            memory_limit_mb: DEFAULT_MEMORY_LIMIT_MB,
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }

    pub fn with_timeout_ms(mut self, timeout_ms: u64) -> Self {
        self.timeout_ms = timeout_ms;
        self
    }

    pub fn with_memory_limit_mb(mut self, memory_limit_mb: u64) -> Self {
        self.memory_limit_mb = memory_limit_mb;
        self
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        let invalid = |why: &str| Err(RuntimeError::InvalidSpec(format!("{}: {why}", self.name)));
        if self.name.is_empty() {
            return invalid("name must not be empty");
        }
        if !(self.cpu_share > 0.0 && self.cpu_share <= 1.0) {
            return invalid("cpu_share must be in (0, 1]");
        }
        if self.memory_limit_mb == 0 {
            return invalid("memory_limit_mb must be positive");
        }
        if self.timeout_ms == 0 {
            return invalid("timeout_ms must be positive");
        }
        Ok(())
    }

    fn memory_limit_bytes(&self) -> u64 {
        self.memory_limit_mb.saturating_mul(1 << 20)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("function {0:?} is already registered")]
    DuplicateName(String),
    #[error("invalid function spec {0}")]
    InvalidSpec(String),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("concurrency cap must be at least 1")]
    InvalidConcurrencyCap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Succeeded,
    Timeout,
    MemoryExceeded,
    Failed(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Succeeded => "Succeeded",
            Status::Timeout => "Timeout",
            Status::MemoryExceeded => "MemoryExceeded",
            Status::Failed(_) => "Failed",
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Status::Succeeded)
    }
}

/// The metered outcome of one invocation. Timestamps are milliseconds since
/// the runtime was created.
#[derive(Debug, Clone, PartialEq)]
pub struct InvocationRecord {
    pub invocation_id: String,
    pub function_name: String,
    pub kind: Option<FunctionKind>,
    pub params: Vec<u8>,
    /// The handler's completion payload; empty unless it succeeded.
    pub output: Vec<u8>,
    pub started_at: f64,
    pub ended_at: f64,
    pub exec_time_ms: f64,
    pub peak_modeled_mem_mb: f64,
    pub status: Status,
}

/// One line of `logs/invocations.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub invocation_id: String,
    pub function_name: String,
    pub kind: Option<FunctionKind>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub exec_time_ms: f64,
    pub peak_modeled_mem_mb: f64,
    pub started_at: f64,
    pub ended_at: f64,
}

impl From<&InvocationRecord> for LogLine {
    fn from(r: &InvocationRecord) -> Self {
        LogLine {
            invocation_id: r.invocation_id.clone(),
            function_name: r.function_name.clone(),
            kind: r.kind,
            status: r.status.label().to_string(),
            error: match &r.status {
                Status::Failed(msg) => Some(msg.clone()),
                _ => None,
            },
            exec_time_ms: r.exec_time_ms,
            peak_modeled_mem_mb: r.peak_modeled_mem_mb,
            started_at: r.started_at,
            ended_at: r.ended_at,
        }
    }
}

/// Serializes records as JSON lines, in the given order.
pub fn invocation_log(records: &[InvocationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(
            &serde_json::to_string(&LogLine::from(r)).expect("log lines always serialize"),
        );
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HandlerError {
    #[error("interrupted")]
    Interrupted,
    #[error(transparent)]
    Memory(MeterError),
    #[error("{0}")]
    Failed(String),
}

impl From<Interrupted> for HandlerError {
    fn from(_: Interrupted) -> Self {
        HandlerError::Interrupted
    }
}

impl From<TaskError> for HandlerError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Interrupted(_) => HandlerError::Interrupted,
            TaskError::Memory(m) => HandlerError::Memory(m),
            other => HandlerError::Failed(other.to_string()),
        }
    }
}

/// Per-invocation state handed to a handler.
pub struct InvocationContext {
    invocation_id: String,
    meter: Meter,
    peak: Arc<AtomicU64>,
    cancel: Arc<AtomicBool>,
    deadline: Instant,
    cpu_share: Option<f64>,
    busy_since: Instant,
}

impl InvocationContext {
    pub fn invocation_id(&self) -> &str {
        &self.invocation_id
    }

    pub fn meter(&self) -> &Meter {
        &self.meter
    }

    pub fn deadline(&self) -> Instant {
        self.deadline
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancel.load(Ordering::Relaxed) || Instant::now() >= self.deadline
    }

    /// With throttling on, sleeps so that the time since the last checkpoint
    /// amounts to `cpu_share` of the elapsed wall clock.
    fn throttle(&mut self) {
        if let Some(share) = self.cpu_share {
            let busy = self.busy_since.elapsed();
            let idle = busy.mul_f64(1.0 / share - 1.0);
            let remaining = self.deadline.saturating_duration_since(Instant::now());
            thread::sleep(idle.min(remaining));
        }
        self.busy_since = Instant::now();
    }
}

impl TaskContext for InvocationContext {
    fn alloc(&mut self, bytes: u64) -> Result<(), MeterError> {
        let r = self.meter.alloc(bytes);
        self.peak.store(self.meter.peak_bytes(), Ordering::Relaxed);
        r
    }

    fn free(&mut self, bytes: u64) -> Result<(), MeterError> {
        self.meter.free(bytes)
    }

    fn checkpoint(&mut self) -> Result<(), Interrupted> {
        self.throttle();
        if self.is_cancelled() {
            Err(Interrupted)
        } else {
            Ok(())
        }
    }
}

pub type HandlerFn = dyn Fn(&[u8], &dyn ObjectStore, &mut InvocationContext) -> Result<Vec<u8>, HandlerError>
    + Send
    + Sync;

struct Registered {
    spec: FunctionSpec,
    handler: Arc<HandlerFn>,
    warm: AtomicBool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuntimeOptions {
    /// Latency added to the first invocation of each function.
    pub cold_start_ms: u64,
    /// Sleep in proportion to busy time so each function gets only its `cpu_share`.
    pub cpu_throttle: bool,
}

struct Finished {
    result: Result<Vec<u8>, HandlerError>,
    peak_bytes: u64,
    ended: Instant,
}

pub struct Runtime {
    store: SharedStore,
    options: RuntimeOptions,
    functions: RwLock<HashMap<String, Arc<Registered>>>,
    epoch: Instant,
    next_id: AtomicU64,
}

impl Runtime {
    pub fn new(store: SharedStore, options: RuntimeOptions) -> Self {
        Self {
            store,
            options,
            functions: RwLock::new(HashMap::new()),
            epoch: Instant::now(),
            next_id: AtomicU64::new(0),
        }
    }

    pub fn store(&self) -> &SharedStore {
        &self.store
    }

    pub fn options(&self) -> RuntimeOptions {
        self.options
    }

    pub fn register<F>(&self, spec: FunctionSpec, handler: F) -> Result<(), RuntimeError>
    where
        F: Fn(&[u8], &dyn ObjectStore, &mut InvocationContext) -> Result<Vec<u8>, HandlerError>
            + Send
            + Sync
            + 'static,
    {
        spec.validate()?;
        let mut functions = self.functions.write().expect("registry lock poisoned");
        if functions.contains_key(&spec.name) {
            return Err(RuntimeError::DuplicateName(spec.name));
        }
        functions.insert(
            spec.name.clone(),
            Arc::new(Registered {
                spec,
                handler: Arc::new(handler),
                warm: AtomicBool::new(false),
            }),
        );
        Ok(())
    }

    pub fn spec(&self, name: &str) -> Option<FunctionSpec> {
        self.lookup(name).map(|r| r.spec.clone())
    }

    fn lookup(&self, name: &str) -> Option<Arc<Registered>> {
        self.functions
            .read()
            .expect("registry lock poisoned")
            .get(name)
            .cloned()
    }

    fn millis_since_epoch(&self, t: Instant) -> f64 {
        t.saturating_duration_since(self.epoch).as_secs_f64() * 1000.0
    }

    pub fn invoke(
        &self,
        function_name: &str,
        params: Vec<u8>,
    ) -> Result<InvocationRecord, RuntimeError> {
        let function = self
            .lookup(function_name)
            .ok_or_else(|| RuntimeError::UnknownFunction(function_name.to_string()))?;
        Ok(self.execute(&function, params))
    }

    /// Runs every request with at most `concurrency_cap` in flight and returns
    /// the records in request order once all have finished. Unknown function
    /// names produce a `Failed` record rather than an error.
    pub fn invoke_batch(
        &self,
        requests: &[(String, Vec<u8>)],
        concurrency_cap: usize,
    ) -> Result<Vec<InvocationRecord>, RuntimeError> {
        if concurrency_cap == 0 {
            return Err(RuntimeError::InvalidConcurrencyCap);
        }
        let slots: Vec<Mutex<Option<InvocationRecord>>> =
            requests.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        thread::scope(|scope| {
            for _ in 0..concurrency_cap.min(requests.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some((name, params)) = requests.get(i) else {
                        break;
                    };
                    let record = match self.lookup(name) {
                        Some(f) => self.execute(&f, params.clone()),
                        None => self.unknown_record(name, params.clone()),
                    };
                    *slots[i].lock().expect("slot lock poisoned") = Some(record);
                });
            }
        });
        Ok(slots
            .into_iter()
            .map(|s| {
                s.into_inner()
                    .expect("slot lock poisoned")
                    .expect("every request ran")
            })
            .collect())
    }

    fn next_invocation_id(&self) -> String {
        format!("inv-{:06}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    fn unknown_record(&self, name: &str, params: Vec<u8>) -> InvocationRecord {
        let now = self.millis_since_epoch(Instant::now());
        InvocationRecord {
            invocation_id: self.next_invocation_id(),
            function_name: name.to_string(),
            kind: None,
            params,
            output: Vec::new(),
            started_at: now,
            ended_at: now,
            exec_time_ms: 0.0,
            peak_modeled_mem_mb: 0.0,
            status: Status::Failed(RuntimeError::UnknownFunction(name.to_string()).to_string()),
        }
    }

    fn execute(&self, function: &Arc<Registered>, params: Vec<u8>) -> InvocationRecord {
        let spec = &function.spec;
        let invocation_id = self.next_invocation_id();
        let timeout = Duration::from_millis(spec.timeout_ms);
        let cold = !function.warm.swap(true, Ordering::AcqRel);
        let cold_start = Duration::from_millis(if cold { self.options.cold_start_ms } else { 0 });

        let peak = Arc::new(AtomicU64::new(0));
        let cancel = Arc::new(AtomicBool::new(false));
        let (tx, rx) = mpsc::channel::<Finished>();

        let started = Instant::now();
        let mut ctx = InvocationContext {
            invocation_id: invocation_id.clone(),
            meter: Meter::with_limit(spec.memory_limit_bytes()),
            peak: Arc::clone(&peak),
            cancel: Arc::clone(&cancel),
            deadline: started + timeout,
            cpu_share: self.options.cpu_throttle.then_some(spec.cpu_share),
            busy_since: started,
        };
        let handler = Arc::clone(&function.handler);
        let store = Arc::clone(&self.store);
        let thread_params = params.clone();
        let spawned = thread::Builder::new()
            .name(invocation_id.clone())
            .spawn(move || {
                if !cold_start.is_zero() {
                    thread::sleep(cold_start);
                    ctx.busy_since = Instant::now();
                }
                let result = handler(&thread_params, store.as_ref(), &mut ctx);
                ctx.throttle();
                let _ = tx.send(Finished {
                    result,
                    peak_bytes: ctx.meter.peak_bytes(),
                    ended: Instant::now(),
                });
            });

        let (status, output, peak_bytes, ended) = match spawned {
            Err(e) => (
                Status::Failed(format!("could not start invocation: {e}")),
                Vec::new(),
                0,
                Instant::now(),
            ),
            Ok(_detached) => match rx.recv_timeout(timeout) {
                Ok(done) => {
                    let limit = spec.memory_limit_bytes();
                    let status = if done.peak_bytes > limit {
                        Status::MemoryExceeded
                    } else if done.ended.duration_since(started) >= timeout {
                        Status::Timeout
                    } else {
                        match &done.result {
                            Ok(_) => Status::Succeeded,
                            Err(HandlerError::Interrupted) => Status::Timeout,
                            Err(HandlerError::Memory(m)) => Status::Failed(m.to_string()),
                            Err(HandlerError::Failed(msg)) => Status::Failed(msg.clone()),
                        }
                    };
                    let output = if status.is_success() {
                        done.result.unwrap_or_default()
                    } else {
                        Vec::new()
                    };
                    (status, output, done.peak_bytes, done.ended)
                }
                Err(RecvTimeoutError::Timeout) => {
                    cancel.store(true, Ordering::Relaxed);
                    (
                        Status::Timeout,
                        Vec::new(),
                        peak.load(Ordering::Relaxed),
                        Instant::now(),
                    )
                }
                Err(RecvTimeoutError::Disconnected) => (
                    Status::Failed("handler panicked".to_string()),
                    Vec::new(),
                    peak.load(Ordering::Relaxed),
                    Instant::now(),
                ),
            },
        };

        let started_at = self.millis_since_epoch(started);
        let ended_at = self.millis_since_epoch(ended);
        InvocationRecord {
            invocation_id,
            function_name: spec.name.clone(),
            kind: Some(spec.kind),
            params,
            output,
            started_at,
            ended_at,
            exec_time_ms: if status == Status::Timeout {
                (ended_at - started_at).max(spec.timeout_ms as f64)
            } else {
                ended_at - started_at
            },
            peak_modeled_mem_mb: peak_bytes as f64 / BYTES_PER_MB,
            status,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(status: Status) -> InvocationRecord {
        InvocationRecord {
            invocation_id: "inv-000001".into(),
            function_name: "f".into(),
            kind: Some(FunctionKind::Reducer),
            params: Vec::new(),
            output: Vec::new(),
            started_at: 1.0,
            ended_at: 3.5,
            exec_time_ms: 2.5,
            peak_modeled_mem_mb: 0.5,
            status,
        }
    }

    #[test]
    fn log_line_carries_error_only_on_failure() {
        let ok = serde_json::to_string(&LogLine::from(&record(Status::Succeeded))).unwrap();
        assert_eq!(
            ok,
            r#"{"invocation_id":"inv-000001","function_name":"f","kind":"reducer","status":"Succeeded","exec_time_ms":2.5,"peak_modeled_mem_mb":0.5,"started_at":1.0,"ended_at":3.5}"#
        );
        let failed = LogLine::from(&record(Status::Failed("x".into())));
        assert_eq!(failed.status, "Failed");
        assert_eq!(failed.error.as_deref(), Some("x"));
        assert_eq!(
            invocation_log(&[record(Status::Timeout)])
                .matches('\n')
                .count(),
            1
        );
    }

    #[test]
    fn task_errors_map_to_handler_errors() {
        assert_eq!(
            HandlerError::from(TaskError::Interrupted(Interrupted)),
            HandlerError::Interrupted
        );
        let m = MeterError::UnderflowFree {
            requested: 2,
            current: 1,
        };
        assert_eq!(
            HandlerError::from(TaskError::Memory(m)),
            HandlerError::Memory(m)
        );
    }

    #[test]
    fn spec_validation_bounds() {
        let mut s = FunctionSpec::new("f", FunctionKind::Mapper);
        assert!(s.validate().is_ok());
        s.cpu_share = 1.0;
        assert!(s.validate().is_ok());
        s.cpu_share = f64::NAN;
        assert!(s.validate().is_err());
        assert_eq!(
            FunctionSpec::new("f", FunctionKind::Mapper)
                .with_memory_limit_mb(2)
                .memory_limit_bytes(),
            2 << 20
        );
    }
}
