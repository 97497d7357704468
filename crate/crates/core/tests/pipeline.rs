use std::collections::BTreeMap;
use std::sync::Mutex;

use faasmr_core::corpus::{generate_corpus, CorpusGenerator, CorpusSpec};
use faasmr_core::keys::{part_key, JOBS_BUCKET};
use faasmr_core::plan::plan_reduce_tasks;
use faasmr_core::token::AlnumLowercase;
use faasmr_core::tsv;
use faasmr_core::{
    plan_map_tasks, run_map_task, run_reduce_task, Meter, ObjectKey, ObjectStore, StoreError,
};
use proptest::prelude::*;

#[derive(Default)]
struct VecStore(Mutex<BTreeMap<ObjectKey, Vec<u8>>>);

impl ObjectStore for VecStore {
    fn put(&self, key: &ObjectKey, data: Vec<u8>) -> Result<(), StoreError> {
        self.0.lock().unwrap().insert(key.clone(), data);
        Ok(())
    }

    fn get(&self, key: &ObjectKey) -> Result<Vec<u8>, StoreError> {
        self.0
            .lock()
            .unwrap()
            .get(key)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(key.clone()))
    }

    fn list(&self, bucket: &str, prefix: &str) -> Result<Vec<ObjectKey>, StoreError> {
        Ok(self
            .0
            .lock()
            .unwrap()
            .keys()
            .filter(|k| k.bucket() == bucket && k.key().starts_with(prefix))
            .cloned()
            .collect())
    }

    fn delete_prefix(&self, bucket: &str, prefix: &str) -> Result<usize, StoreError> {
        let keys = self.list(bucket, prefix)?;
        let mut map = self.0.lock().unwrap();
        for k in &keys {
            map.remove(k);
        }
        Ok(keys.len())
    }
}

/// Runs every map task, then every reduce task, serially on one thread.
fn run_serial(
    store: &VecStore,
    manifest: &[ObjectKey],
    m: usize,
    r: usize,
) -> BTreeMap<String, u64> {
    for params in plan_map_tasks(manifest, m, r, "job").unwrap() {
        run_map_task(&params, &AlnumLowercase, store, &mut Meter::new()).unwrap();
    }
    for params in plan_reduce_tasks("job", m, r) {
        run_reduce_task(&params, store, &mut Meter::new()).unwrap();
    }
    let mut merged = BTreeMap::new();
    for p in 0..r {
        for e in tsv::decode(&store.get(&part_key("job", p)).unwrap()).unwrap() {
            assert!(
                merged.insert(e.word, e.count).is_none(),
                "word in two parts"
            );
        }
    }
    merged
}

fn count_whitespace_words(store: &VecStore, manifest: &[ObjectKey]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for k in manifest {
        for w in String::from_utf8(store.get(k).unwrap())
            .unwrap()
            .split_whitespace()
        {
            *counts.entry(w.to_string()).or_default() += 1;
        }
    }
    counts
}

#[test]
fn generated_corpus_counts_through_the_pipeline() {
    let store = VecStore::default();
    let spec = CorpusSpec {
        num_files: 6,
        words_per_file: 3_000,
        vocab_size: 800,
        seed: 11,
        ..CorpusSpec::default()
    };
    let corpus = generate_corpus(&spec, &store, "job").unwrap();
    assert_eq!(corpus.total_tokens, 18_000);
    let expected = count_whitespace_words(&store, &corpus.manifest);
    for (m, r) in [(1, 1), (4, 3), (6, 6), (9, 2)] {
        assert_eq!(
            run_serial(&store, &corpus.manifest, m, r),
            expected,
            "M={m} R={r}"
        );
    }
    assert_eq!(
        store.list(JOBS_BUCKET, "job/in/").unwrap().len(),
        6,
        "inputs are untouched"
    );
}

#[test]
fn mapper_peak_memory_falls_with_more_mappers() {
    let store = VecStore::default();
    let spec = CorpusSpec {
        num_files: 10,
        words_per_file: 2_000,
        ..CorpusSpec::default()
    };
    let manifest = generate_corpus(&spec, &store, "job").unwrap().manifest;
    let mut peaks = Vec::new();
    for m in [1, 2, 5, 10] {
        let plans = plan_map_tasks(&manifest, m, 2, "job").unwrap();
        let mut meter = Meter::new();
        run_map_task(&plans[0], &AlnumLowercase, &store, &mut meter).unwrap();
        assert_eq!(meter.current_bytes(), 0, "every allocation is released");
        peaks.push(meter.peak_bytes());
    }
    assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{peaks:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn any_shape_conserves_tokens(files in 1usize..8, words in 1usize..400, m in 1usize..6, r in 1usize..6, seed: u64) {
        let store = VecStore::default();
        let spec = CorpusSpec { num_files: files, words_per_file: words, vocab_size: 50, seed, ..CorpusSpec::default() };
        let corpus = generate_corpus(&spec, &store, "job").unwrap();
        let total: u64 = run_serial(&store, &corpus.manifest, m, r).values().sum();
        prop_assert_eq!(total, corpus.total_tokens);
        prop_assert_eq!(total, CorpusGenerator::new(spec).unwrap().total_tokens());
    }
}
