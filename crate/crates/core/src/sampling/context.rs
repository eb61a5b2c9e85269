use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::components::ComponentSet;
use crate::error::{Error, Result};

use super::DecomposerSpec;

/// Last `tail_len` values of every component of one prefix decomposition.
pub type Tail = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TailKey {
    series: u64,
    decomposer: String,
    prefix_len: usize,
    tail_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct WholeKey {
    series: u64,
    len: usize,
    decomposer: String,
}

/// Thread pool plus memoized decompositions, keyed by series hash,
/// decomposer configuration and prefix length.
pub struct Context {
    pool: ThreadPool,
    jobs: usize,
    tails: Mutex<HashMap<TailKey, Arc<Tail>>>,
    wholes: Mutex<HashMap<WholeKey, Arc<ComponentSet>>>,
}

impl std::fmt::Debug for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Context").field("jobs", &self.jobs).finish_non_exhaustive()
    }
}

pub fn hash_values(values: &[f64]) -> u64 {
    let mut h = DefaultHasher::new();
    values.len().hash(&mut h);
    for v in values {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

impl Context {
    pub fn new(jobs: usize) -> Result<Self> {
        let jobs = jobs.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .thread_name(|i| format!("stepcast-{i}"))
            .build()
            .map_err(|e| Error::Validation(format!("cannot build thread pool: {e}")))?;
        Ok(Self {
            pool,
            jobs,
            tails: Mutex::new(HashMap::new()),
            wholes: Mutex::new(HashMap::new()),
        })
    }

    /// One worker per available core.
    pub fn with_available_parallelism() -> Result<Self> {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Decomposition of the whole of `values`, memoized.
    pub fn whole(&self, values: &[f64], decomposer: &DecomposerSpec) -> Result<Arc<ComponentSet>> {
        let key = WholeKey {
            series: hash_values(values),
            len: values.len(),
            decomposer: decomposer.cache_key(),
        };
        if let Some(hit) = self.wholes.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let cs = Arc::new(decomposer.decompose(values)?);
        self.wholes
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| Arc::clone(&cs));
        Ok(cs)
    }

    /// Tails of the decompositions of every prefix `values[..p]` for
    /// `p in prefixes`, in order. Missing prefixes are decomposed
    /// concurrently; each decomposition sees only its own prefix.
    pub fn prefix_tails(
        &self,
        values: &[f64],
        decomposer: &DecomposerSpec,
        prefixes: std::ops::RangeInclusive<usize>,
        tail_len: usize,
    ) -> Result<Vec<Arc<Tail>>> {
        let series = hash_values(values);
        let dkey = decomposer.cache_key();
        let key = |p: usize| TailKey {
            series,
            decomposer: dkey.clone(),
            prefix_len: p,
            tail_len,
        };

        let missing: Vec<usize> = {
            let cache = self.tails.lock().expect("cache lock");
            prefixes.clone().filter(|p| !cache.contains_key(&key(*p))).collect()
        };

        if !missing.is_empty() {
            let computed: Vec<Result<(usize, Tail)>> = self.install(|| {
                missing
                    .par_iter()
                    .map(|&p| {
                        let cs = decomposer
                            .decompose(&values[..p])
                            .map_err(|e| e.context(format!("decomposing prefix of length {p}")))?;
                        Ok((p, tail_of(&cs, tail_len)))
                    })
                    .collect()
            });
            let mut cache = self.tails.lock().expect("cache lock");
            for item in computed {
                let (p, tail) = item?;
                cache.entry(key(p)).or_insert_with(|| Arc::new(tail));
            }
        }

        let cache = self.tails.lock().expect("cache lock");
        Ok(prefixes.map(|p| Arc::clone(&cache[&key(p)])).collect())
    }

    /// Drops memoized decompositions made with `decomposer`.
    pub fn evict(&self, decomposer: &DecomposerSpec) {
        let dkey = decomposer.cache_key();
        self.tails.lock().expect("cache lock").retain(|k, _| k.decomposer != dkey);
        self.wholes.lock().expect("cache lock").retain(|k, _| k.decomposer != dkey);
    }

    /// Drops all memoized decompositions.
    pub fn clear_cache(&self) {
        self.tails.lock().expect("cache lock").clear();
        self.wholes.lock().expect("cache lock").clear();
    }
}

pub(crate) fn tail_of(cs: &ComponentSet, tail_len: usize) -> Tail {
    cs.components
        .iter()
        .map(|c| c[c.len() - tail_len..].to_vec())
        .collect()
}
