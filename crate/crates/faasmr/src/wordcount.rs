//! The word-frequency workload: `wc-map` and `wc-reduce`.
//!
//! Parameters and completion payloads travel as JSON.

use std::thread;
use std::time::Duration;

use faasmr_core::plan::{MapTaskParams, ReduceTaskParams};
use faasmr_core::task::{run_map_task, run_reduce_task, TaskContext};
use faasmr_core::token::AlnumLowercase;

use crate::runtime::{
    FunctionKind, FunctionSpec, HandlerError, InvocationContext, Runtime, RuntimeError,
};
use crate::store::ObjectStore;

pub const MAP_FUNCTION: &str = "wc-map";
pub const REDUCE_FUNCTION: &str = "wc-reduce";

fn decode<T: serde::de::DeserializeOwned>(params: &[u8]) -> Result<T, HandlerError> {
    serde_json::from_slice(params).map_err(|e| HandlerError::Failed(format!("bad parameters: {e}")))
}

fn encode<T: serde::Serialize>(payload: &T) -> Result<Vec<u8>, HandlerError> {
    serde_json::to_vec(payload).map_err(|e| HandlerError::Failed(e.to_string()))
}

pub fn wc_map_handler(
    params: &[u8],
    store: &dyn ObjectStore,
    ctx: &mut InvocationContext,
) -> Result<Vec<u8>, HandlerError> {
    let params: MapTaskParams = decode(params)?;
    let outcome = run_map_task(&params, &AlnumLowercase, store, ctx)?;
    encode(&outcome)
}

pub fn wc_reduce_handler(
    params: &[u8],
    store: &dyn ObjectStore,
    ctx: &mut InvocationContext,
) -> Result<Vec<u8>, HandlerError> {
    let params: ReduceTaskParams = decode(params)?;
    let outcome = run_reduce_task(&params, store, ctx)?;
    encode(&outcome)
}

/// Injected failures for exercising the job failure path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FaultPlan {
    /// This mapper never finishes on its own and runs into its timeout.
    pub stall_mapper: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordCountFunctions {
    pub map: FunctionSpec,
    pub reduce: FunctionSpec,
    pub faults: FaultPlan,
}

impl Default for WordCountFunctions {
    fn default() -> Self {
        Self {
            map: FunctionSpec::new(MAP_FUNCTION, FunctionKind::Mapper),
            reduce: FunctionSpec::new(REDUCE_FUNCTION, FunctionKind::Reducer),
            faults: FaultPlan::default(),
        }
    }
}

impl WordCountFunctions {
    pub fn with_timeout_ms(mut self, timeout_ms: u64) -> Self {
        self.map.timeout_ms = timeout_ms;
        self.reduce.timeout_ms = timeout_ms;
        self
    }
}

/// Registers `wc-map` and `wc-reduce`.
pub fn register_wordcount(
    runtime: &Runtime,
    functions: &WordCountFunctions,
) -> Result<(), RuntimeError> {
    let stall = functions.faults.stall_mapper;
    runtime.register(functions.map.clone(), move |params, store, ctx| {
        if let Some(victim) = stall {
            let p: MapTaskParams = decode(params)?;
            if p.index == victim {
                loop {
                    ctx.checkpoint()?;
                    thread::sleep(Duration::from_millis(2));
                }
            }
        }
        wc_map_handler(params, store, ctx)
    })?;
    runtime.register(functions.reduce.clone(), wc_reduce_handler)
}
