//! Allocation-only building blocks for a serverless MapReduce word counter.
//!
//! Everything here is pure computation over `alloc` types: object keys and the
//! storage trait, the modeled memory meter, FNV partitioning, the seeded corpus
//! generator, tokenization, the TSV count format, task planning, the map and
//! reduce task bodies, and the report arithmetic. Storage backends, the
//! function runtime and the command line live in the `faasmr` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod hash;
pub mod keys;
pub mod meter;
pub mod plan;
pub mod report;
pub mod rng;
pub mod store;
pub mod task;
pub mod token;
pub mod tsv;
pub mod workload;
pub mod zipf;

pub use hash::{fnv1a64, partition_of};
pub use meter::{Meter, MeterError};
pub use plan::{plan_map_tasks, MapTaskParams, PlanError, ReduceTaskParams};
pub use store::{ObjectKey, ObjectStore, StoreError};
pub use task::{run_map_task, run_reduce_task, MapOutcome, ReduceOutcome, TaskContext, TaskError};
pub use tsv::KeyCount;
