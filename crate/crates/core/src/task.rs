//! Map and reduce task bodies.
//!
//! Mappers and reducers never talk to each other: a mapper writes one
//! intermediate object per reducer and a reducer reads one intermediate
//! object per mapper, all through the [`ObjectStore`].
//!
//! Memory model, declared through [`TaskContext::alloc`]:
//! - every object fetched from or written to the store counts its byte length
//!   for as long as the task holds it;
//! - every distinct word in a count table costs `word.len() + ENTRY_OVERHEAD_BYTES`.
//!
//! A mapper fetches its whole input split before counting, then releases each
//! buffer once it has been tokenized. A reducer streams one intermediate
//! object at a time into its merge table.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::hash::partition_of;
use crate::keys::{intermediate_key, part_key};
use crate::meter::{Meter, MeterError};
use crate::plan::{MapTaskParams, PlanError, ReduceTaskParams};
use crate::store::{ObjectKey, ObjectStore, StoreError};
use crate::token::Tokenizer;
use crate::tsv::{self, ParseError};

/// Modeled bookkeeping cost of one count-table entry beyond its word bytes.
pub const ENTRY_OVERHEAD_BYTES: u64 = 16;

/// The task was asked to stop (deadline passed or invocation cancelled).
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("task interrupted")]
pub struct Interrupted;

/// What a running task needs from its host besides the store.
pub trait TaskContext {
    fn alloc(&mut self, bytes: u64) -> Result<(), MeterError>;
    fn free(&mut self, bytes: u64) -> Result<(), MeterError>;
    /// Called at file boundaries; returns `Err` when the task must stop.
    fn checkpoint(&mut self) -> Result<(), Interrupted>;
}

impl TaskContext for Meter {
    fn alloc(&mut self, bytes: u64) -> Result<(), MeterError> {
        Meter::alloc(self, bytes)
    }

    fn free(&mut self, bytes: u64) -> Result<(), MeterError> {
        Meter::free(self, bytes)
    }

    fn checkpoint(&mut self) -> Result<(), Interrupted> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaskError {
    #[error(transparent)]
    Params(#[from] PlanError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("intermediate object {0} is missing")]
    MissingPartition(ObjectKey),
    #[error("{key}: {source}")]
    Parse { key: ObjectKey, source: ParseError },
    #[error("{key}: word {word:?} does not belong to partition {reducer}")]
    Misrouted {
        key: ObjectKey,
        word: String,
        reducer: usize,
    },
    #[error(transparent)]
    Memory(#[from] MeterError),
    #[error(transparent)]
    Interrupted(#[from] Interrupted),
}

/// Completion payload of a mapper.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapOutcome {
    pub files_processed: u64,
    pub tokens_seen: u64,
}

/// Completion payload of a reducer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceOutcome {
    pub words_out: u64,
    pub total_count: u64,
}

#[inline]
fn entry_cost(word: &str) -> u64 {
    word.len() as u64 + ENTRY_OVERHEAD_BYTES
}

/// Reads the mapper's files, counts tokens and writes one sorted, combined
/// partition per reducer to `<job>/int/m<index>/p<r>.tsv`. Empty partitions
/// are written as empty objects.
pub fn run_map_task(
    params: &MapTaskParams,
    tokenizer: &dyn Tokenizer,
    store: &dyn ObjectStore,
    ctx: &mut dyn TaskContext,
) -> Result<MapOutcome, TaskError> {
    params.validate()?;

    let mut split: Vec<Vec<u8>> = Vec::new();
    for key in params.assigned_files() {
        ctx.checkpoint()?;
        let data = store.get(key)?;
        ctx.alloc(data.len() as u64)?;
        split.push(data);
    }

    let mut outcome = MapOutcome::default();
    let mut table: BTreeMap<String, u64> = BTreeMap::new();
    let mut table_bytes = 0u64;
    for data in split {
        ctx.checkpoint()?;
        let mut grown = 0u64;
        tokenizer.for_each_token(&data, &mut |word| {
            outcome.tokens_seen += 1;
            match table.get_mut(word) {
                Some(count) => *count += 1,
                None => {
                    grown += entry_cost(word);
                    table.insert(String::from(word), 1);
                }
            }
        });
        ctx.alloc(grown)?;
        table_bytes += grown;
        ctx.free(data.len() as u64)?;
        outcome.files_processed += 1;
    }

    let mut partitions: Vec<Vec<(&str, u64)>> =
        (0..params.num_reducers).map(|_| Vec::new()).collect();
    for (word, &count) in &table {
        partitions[partition_of(word, params.num_reducers)].push((word.as_str(), count));
    }
    for (reducer, entries) in partitions.into_iter().enumerate() {
        ctx.checkpoint()?;
        let bytes = tsv::encode_pairs(entries);
        let len = bytes.len() as u64;
        ctx.alloc(len)?;
        store.put(
            &intermediate_key(&params.job_id, params.index, reducer),
            bytes,
        )?;
        ctx.free(len)?;
    }
    ctx.free(table_bytes)?;
    Ok(outcome)
}

/// Merges this reducer's partition from every mapper and writes the summed,
/// sorted counts to `<job>/out/part-<r>.tsv`.
pub fn run_reduce_task(
    params: &ReduceTaskParams,
    store: &dyn ObjectStore,
    ctx: &mut dyn TaskContext,
) -> Result<ReduceOutcome, TaskError> {
    params.validate()?;
    let reducer = params.reducer_index;

    let mut table: BTreeMap<String, u64> = BTreeMap::new();
    let mut table_bytes = 0u64;
    for mapper in 0..params.num_mappers {
        ctx.checkpoint()?;
        let key = intermediate_key(&params.job_id, mapper, reducer);
        let data = match store.get(&key) {
            Ok(d) => d,
            Err(StoreError::NotFound(_)) => return Err(TaskError::MissingPartition(key)),
            Err(e) => return Err(e.into()),
        };
        let len = data.len() as u64;
        ctx.alloc(len)?;
        let entries = tsv::decode(&data).map_err(|source| TaskError::Parse {
            key: key.clone(),
            source,
        })?;
        drop(data);
        let mut grown = 0u64;
        for entry in entries {
            if partition_of(&entry.word, params.num_reducers) != reducer {
                return Err(TaskError::Misrouted {
                    key,
                    word: entry.word,
                    reducer,
                });
            }
            match table.get_mut(entry.word.as_str()) {
                Some(count) => *count += entry.count,
                None => {
                    grown += entry_cost(&entry.word);
                    table.insert(entry.word, entry.count);
                }
            }
        }
        ctx.alloc(grown)?;
        table_bytes += grown;
        ctx.free(len)?;
    }

    let outcome = ReduceOutcome {
        words_out: table.len() as u64,
        total_count: table.values().sum(),
    };
    let bytes = tsv::encode_pairs(table.iter().map(|(w, &c)| (w.as_str(), c)));
    let len = bytes.len() as u64;
    ctx.alloc(len)?;
    store.put(&part_key(&params.job_id, reducer), bytes)?;
    ctx.free(len)?;
    ctx.free(table_bytes)?;
    Ok(outcome)
}
