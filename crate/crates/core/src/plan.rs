//! Mapper parameterization and stride-based file assignment.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::keys::validate_job_id;
use crate::store::{ObjectKey, StoreError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("manifest is empty")]
    EmptyManifest,
    #[error("manifest lists {0} more than once")]
    DuplicateKey(ObjectKey),
    #[error("need at least one mapper")]
    ZeroMappers,
    #[error("need at least one reducer")]
    ZeroReducers,
    #[error(transparent)]
    InvalidJobId(#[from] StoreError),
    #[error("inconsistent task parameters: {0}")]
    Inconsistent(&'static str),
}

/// Parameters of one mapper: the whole manifest plus this mapper's ordinal.
///
/// A mapper reads exactly the files `file_ids[k]` with `k % num_mappers == index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapTaskParams {
    pub job_id: String,
    pub file_ids: Vec<ObjectKey>,
    pub num_files: usize,
    pub index: usize,
    pub num_mappers: usize,
    pub num_reducers: usize,
}

impl MapTaskParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        validate_job_id(&self.job_id)?;
        if self.num_mappers == 0 {
            return Err(PlanError::ZeroMappers);
        }
        if self.num_reducers == 0 {
            return Err(PlanError::ZeroReducers);
        }
        if self.index >= self.num_mappers {
            return Err(PlanError::Inconsistent("index must be below num_mappers"));
        }
        if self.num_files != self.file_ids.len() {
            return Err(PlanError::Inconsistent(
                "num_files must equal the manifest length",
            ));
        }
        Ok(())
    }

    /// The input keys this mapper is responsible for, in manifest order.
    pub fn assigned_files(&self) -> impl Iterator<Item = &ObjectKey> + '_ {
        let (index, stride) = (self.index, self.num_mappers);
        self.file_ids
            .iter()
            .enumerate()
            .filter(move |(k, _)| k % stride == index)
            .map(|(_, key)| key)
    }
}

/// Parameters of one reducer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceTaskParams {
    pub job_id: String,
    pub reducer_index: usize,
    pub num_mappers: usize,
    pub num_reducers: usize,
}

impl ReduceTaskParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        validate_job_id(&self.job_id)?;
        if self.num_mappers == 0 {
            return Err(PlanError::ZeroMappers);
        }
        if self.num_reducers == 0 {
            return Err(PlanError::ZeroReducers);
        }
        if self.reducer_index >= self.num_reducers {
            return Err(PlanError::Inconsistent(
                "reducer_index must be below num_reducers",
            ));
        }
        Ok(())
    }
}

/// One [`MapTaskParams`] per mapper. More mappers than files is allowed; the
/// surplus mappers get no files.
pub fn plan_map_tasks(
    manifest: &[ObjectKey],
    num_mappers: usize,
    num_reducers: usize,
    job_id: &str,
) -> Result<Vec<MapTaskParams>, PlanError> {
    validate_job_id(job_id)?;
    if manifest.is_empty() {
        return Err(PlanError::EmptyManifest);
    }
    if num_mappers == 0 {
        return Err(PlanError::ZeroMappers);
    }
    if num_reducers == 0 {
        return Err(PlanError::ZeroReducers);
    }
    let mut seen = BTreeSet::new();
    for key in manifest {
        if !seen.insert(key) {
            return Err(PlanError::DuplicateKey(key.clone()));
        }
    }
    Ok((0..num_mappers)
        .map(|index| MapTaskParams {
            job_id: String::from(job_id),
            file_ids: manifest.to_vec(),
            num_files: manifest.len(),
            index,
            num_mappers,
            num_reducers,
        })
        .collect())
}

/// Reducer parameters for a job with the given shape.
pub fn plan_reduce_tasks(
    job_id: &str,
    num_mappers: usize,
    num_reducers: usize,
) -> Vec<ReduceTaskParams> {
    (0..num_reducers)
        .map(|reducer_index| ReduceTaskParams {
            job_id: String::from(job_id),
            reducer_index,
            num_mappers,
            num_reducers,
        })
        .collect()
}
