use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use faasmr::runtime::{
    invocation_log, FunctionKind, FunctionSpec, HandlerError, LogLine, Runtime, RuntimeError,
    RuntimeOptions, Status,
};
use faasmr::store::{MemStore, ObjectKey};
use faasmr_core::TaskContext;

fn runtime() -> Runtime {
    Runtime::new(Arc::new(MemStore::new()), RuntimeOptions::default())
}

fn spec(name: &str) -> FunctionSpec {
    FunctionSpec::new(name, FunctionKind::Mapper)
}

fn sleeper(
    ms: u64,
) -> impl Fn(
    &[u8],
    &dyn faasmr::store::ObjectStore,
    &mut faasmr::runtime::InvocationContext,
) -> Result<Vec<u8>, HandlerError> {
    move |_, _, _| {
        thread::sleep(Duration::from_millis(ms));
        Ok(Vec::new())
    }
}

#[test]
fn noop_succeeds_with_echoed_output() {
    let rt = runtime();
    rt.register(spec("echo"), |p, _, _| Ok(p.to_vec())).unwrap();
    let rec = rt.invoke("echo", b"hi".to_vec()).unwrap();
    assert_eq!(rec.status, Status::Succeeded);
    assert_eq!(rec.output, b"hi");
    assert_eq!(rec.params, b"hi");
    assert_eq!(rec.kind, Some(FunctionKind::Mapper));
    assert!(rec.exec_time_ms >= 0.0);
    assert_eq!(rec.exec_time_ms, rec.ended_at - rec.started_at);
}

#[test]
fn duplicate_name_is_rejected() {
    let rt = runtime();
    rt.register(spec("f"), |_, _, _| Ok(Vec::new())).unwrap();
    assert_eq!(
        rt.register(spec("f"), |_, _, _| Ok(Vec::new())),
        Err(RuntimeError::DuplicateName("f".into()))
    );
}

#[test]
fn invalid_specs_are_rejected() {
    let rt = runtime();
    let mut zero_share = spec("a");
    zero_share.cpu_share = 0.0;
    let mut over_share = spec("b");
    over_share.cpu_share = 1.5;
    for bad in [
        zero_share,
        over_share,
        spec("c").with_memory_limit_mb(0),
        spec("d").with_timeout_ms(0),
        spec(""),
    ] {
        assert!(matches!(
            rt.register(bad, |_, _, _| Ok(Vec::new())),
            Err(RuntimeError::InvalidSpec(_))
        ));
    }
}

#[test]
fn default_spec_mirrors_platform_config() {
    let s = spec("x");
    assert_eq!(s.cpu_share, 0.35);
    assert_eq!(s.memory_limit_mb, 512);
}

#[test]
fn unknown_function_errors_on_invoke_and_fails_in_batch() {
    let rt = runtime();
    assert_eq!(
        rt.invoke("ghost", Vec::new()),
        Err(RuntimeError::UnknownFunction("ghost".into()))
    );
    let recs = rt.invoke_batch(&[("ghost".into(), Vec::new())], 1).unwrap();
    assert!(matches!(recs[0].status, Status::Failed(_)));
}

#[test]
fn cooperative_timeout() {
    let rt = runtime();
    rt.register(spec("spin").with_timeout_ms(100), |_, _, ctx| loop {
        ctx.checkpoint()?;
        thread::sleep(Duration::from_millis(1));
    })
    .unwrap();
    let rec = rt.invoke("spin", Vec::new()).unwrap();
    assert_eq!(rec.status, Status::Timeout);
    assert!(rec.exec_time_ms >= 100.0, "{}", rec.exec_time_ms);
    assert!(rec.output.is_empty());
}

#[test]
fn uncooperative_handler_hits_the_backstop() {
    let rt = runtime();
    rt.register(spec("stuck").with_timeout_ms(50), sleeper(400))
        .unwrap();
    let t = Instant::now();
    let rec = rt.invoke("stuck", Vec::new()).unwrap();
    assert_eq!(rec.status, Status::Timeout);
    assert!(rec.exec_time_ms >= 50.0);
    assert!(
        t.elapsed() < Duration::from_millis(350),
        "caller waited for the stuck handler"
    );
}

#[test]
fn memory_over_limit_is_memory_exceeded() {
    let rt = runtime();
    rt.register(spec("hog").with_memory_limit_mb(1), |_, _, ctx| {
        ctx.alloc(2 << 20).map_err(HandlerError::Memory)?;
        Ok(Vec::new())
    })
    .unwrap();
    let rec = rt.invoke("hog", Vec::new()).unwrap();
    assert_eq!(rec.status, Status::MemoryExceeded);
    assert!(rec.peak_modeled_mem_mb >= 2.0);
}

#[test]
fn peak_memory_is_reported_in_mb() {
    let rt = runtime();
    rt.register(spec("m"), |_, _, ctx| {
        ctx.alloc(3 << 20).map_err(HandlerError::Memory)?;
        ctx.free(3 << 20).map_err(HandlerError::Memory)?;
        ctx.alloc(1 << 20).map_err(HandlerError::Memory)?;
        Ok(Vec::new())
    })
    .unwrap();
    let rec = rt.invoke("m", Vec::new()).unwrap();
    assert_eq!(rec.status, Status::Succeeded);
    assert_eq!(rec.peak_modeled_mem_mb, 3.0);
}

#[test]
fn handler_errors_and_panics_are_failed() {
    let rt = runtime();
    rt.register(spec("err"), |_, _, _| {
        Err(HandlerError::Failed("boom".into()))
    })
    .unwrap();
    rt.register(spec("panic"), |_, _, _| panic!("handler exploded"))
        .unwrap();
    assert_eq!(
        rt.invoke("err", Vec::new()).unwrap().status,
        Status::Failed("boom".into())
    );
    assert!(matches!(
        rt.invoke("panic", Vec::new()).unwrap().status,
        Status::Failed(_)
    ));
}

#[test]
fn empty_batch_returns_nothing() {
    let rt = runtime();
    assert!(rt.invoke_batch(&[], 4).unwrap().is_empty());
    assert_eq!(
        rt.invoke_batch(&[], 0),
        Err(RuntimeError::InvalidConcurrencyCap)
    );
}

#[test]
fn batch_never_exceeds_cap_and_keeps_request_order() {
    let rt = runtime();
    let in_flight = Arc::new(AtomicUsize::new(0));
    let max_seen = Arc::new(AtomicUsize::new(0));
    let (f, m) = (Arc::clone(&in_flight), Arc::clone(&max_seen));
    rt.register(spec("count"), move |p, _, _| {
        let now = f.fetch_add(1, Ordering::SeqCst) + 1;
        m.fetch_max(now, Ordering::SeqCst);
        thread::sleep(Duration::from_millis(5));
        f.fetch_sub(1, Ordering::SeqCst);
        Ok(p.to_vec())
    })
    .unwrap();
    let requests: Vec<(String, Vec<u8>)> =
        (0..20u8).map(|i| ("count".to_string(), vec![i])).collect();
    let recs = rt.invoke_batch(&requests, 3).unwrap();
    assert!(max_seen.load(Ordering::SeqCst) <= 3);
    let outputs: Vec<u8> = recs.iter().map(|r| r.output[0]).collect();
    assert_eq!(outputs, (0..20).collect::<Vec<u8>>());
}

#[test]
fn cap_one_runs_serially() {
    let rt = runtime();
    rt.register(spec("s"), sleeper(5)).unwrap();
    let requests: Vec<(String, Vec<u8>)> = (0..5).map(|_| ("s".to_string(), Vec::new())).collect();
    let mut recs = rt.invoke_batch(&requests, 1).unwrap();
    recs.sort_by(|a, b| a.started_at.total_cmp(&b.started_at));
    for pair in recs.windows(2) {
        assert!(pair[0].ended_at <= pair[1].started_at);
    }
}

#[test]
fn parallel_batch_overlaps() {
    // Sleeping handlers overlap even on a single hardware thread.
    let rt = runtime();
    rt.register(spec("s"), sleeper(50)).unwrap();
    let requests: Vec<(String, Vec<u8>)> = (0..10).map(|_| ("s".to_string(), Vec::new())).collect();
    let t = Instant::now();
    let recs = rt.invoke_batch(&requests, 10).unwrap();
    let span = t.elapsed().as_secs_f64() * 1000.0;
    let total: f64 = recs.iter().map(|r| r.exec_time_ms).sum();
    assert!(span < total, "span {span} ms, sum {total} ms");
}

#[test]
fn cold_start_applies_to_first_invocation_only() {
    let rt = Runtime::new(
        Arc::new(MemStore::new()),
        RuntimeOptions {
            cold_start_ms: 60,
            cpu_throttle: false,
        },
    );
    rt.register(spec("f"), |_, _, _| Ok(Vec::new())).unwrap();
    let first = rt.invoke("f", Vec::new()).unwrap();
    let second = rt.invoke("f", Vec::new()).unwrap();
    assert!(first.exec_time_ms >= 60.0);
    assert!(second.exec_time_ms < 60.0);
}

#[test]
fn cpu_throttle_stretches_busy_time() {
    let busy = |_: &[u8],
                _: &dyn faasmr::store::ObjectStore,
                ctx: &mut faasmr::runtime::InvocationContext| {
        let t = Instant::now();
        while t.elapsed() < Duration::from_millis(20) {}
        ctx.checkpoint()?;
        Ok(Vec::new())
    };
    let rt = Runtime::new(
        Arc::new(MemStore::new()),
        RuntimeOptions {
            cold_start_ms: 0,
            cpu_throttle: true,
        },
    );
    let mut half = spec("half");
    half.cpu_share = 0.5;
    rt.register(half, busy).unwrap();
    let rec = rt.invoke("half", Vec::new()).unwrap();
    assert!(rec.exec_time_ms >= 40.0, "{}", rec.exec_time_ms);
}

#[test]
fn handlers_share_the_store() {
    let rt = runtime();
    rt.register(spec("w"), |_, store, _| {
        store
            .put(&ObjectKey::new("jobs", "j/x").unwrap(), b"v".to_vec())
            .map_err(|e| HandlerError::Failed(e.to_string()))?;
        Ok(Vec::new())
    })
    .unwrap();
    rt.invoke("w", Vec::new()).unwrap();
    assert_eq!(
        rt.store()
            .get(&ObjectKey::new("jobs", "j/x").unwrap())
            .unwrap(),
        b"v"
    );
}

#[test]
fn invocation_log_has_one_json_line_per_record() {
    let rt = runtime();
    rt.register(spec("ok"), |_, _, _| Ok(Vec::new())).unwrap();
    rt.register(spec("err"), |_, _, _| {
        Err(HandlerError::Failed("bad".into()))
    })
    .unwrap();
    let recs = rt
        .invoke_batch(&[("ok".into(), Vec::new()), ("err".into(), Vec::new())], 2)
        .unwrap();
    let log = invocation_log(&recs);
    let lines: Vec<LogLine> = log
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].status, "Succeeded");
    assert_eq!(lines[1].status, "Failed");
    assert_eq!(lines[1].error.as_deref(), Some("bad"));
    assert_ne!(lines[0].invocation_id, lines[1].invocation_id);
    let raw: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    for field in [
        "invocation_id",
        "function_name",
        "kind",
        "status",
        "exec_time_ms",
        "peak_modeled_mem_mb",
        "started_at",
        "ended_at",
    ] {
        assert!(raw.get(field).is_some(), "missing {field}");
    }
}
