//! Serverless MapReduce word counting on a local function runtime.
//!
//! A client ([`orchestrator`]) drives mapper and reducer functions registered
//! in an emulated function-compute platform ([`runtime`]). All input,
//! intermediate and output data moves through an object store ([`store`]);
//! functions never exchange data directly. [`bench`] sweeps the number of
//! functions and reports time, modeled memory and workload share.

pub mod bench;
pub mod orchestrator;
pub mod runtime;
pub mod store;
pub mod wordcount;

pub use faasmr_core as core;
