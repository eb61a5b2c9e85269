//! Supervised sample extraction from decomposed series.
//!
//! Sample `j` (1-based) predicts the observation at `t_j = W + j`, where `W`
//! is the warm-up length, so every technique emits rows for the same
//! prediction times `W+1..=N`. Each component gets its own matrix whose row
//! holds that component's `m` lagged values.
//!
//! | technique | explanatory values                         | response                     |
//! |-----------|--------------------------------------------|------------------------------|
//! | ODB       | whole-series decomposition                 | whole-series decomposition   |
//! | KN        | `Prefix(calib_end)` then `Prefix(t_j − 1)` | whole-series decomposition   |
//! | SDB       | last `m` values of `Prefix(t_j − 1)`       | whole-series decomposition   |
//! | FSDB      | last `m` values of `Prefix(t_j − 1)`       | last value of `Prefix(t_j)`  |
//!
//! Only FSDB produces samples that depend on nothing after `t_j`.

mod audit;
mod context;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use audit::{audit_causality, AuditReport, ResponseSource, SampleDeviation, Verdict};
pub use context::{hash_values, Context, Tail};

use crate::components::{ComponentSet, Method};
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::ssa::{ssa_decompose, SsaConfig};
use crate::vmd::{vmd_decompose, VmdConfig};

/// Which decomposer feeds the sampler. `PassThrough` returns the input as a
/// single component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DecomposerSpec {
    Ssa(SsaConfig),
    Vmd(VmdConfig),
    #[serde(rename = "passthrough")]
    PassThrough,
}

impl DecomposerSpec {
    pub fn decompose(&self, values: &[f64]) -> Result<ComponentSet> {
        match self {
            DecomposerSpec::Ssa(c) => ssa_decompose(values, c),
            DecomposerSpec::Vmd(c) => vmd_decompose(values, c),
            DecomposerSpec::PassThrough => {
                if values.is_empty() {
                    return Err(Error::Decomposition("cannot decompose an empty series".into()));
                }
                Ok(ComponentSet::plain(vec![values.to_vec()], Method::PassThrough))
            }
        }
    }

    pub fn n_components(&self) -> usize {
        match self {
            DecomposerSpec::Ssa(c) => c.window,
            DecomposerSpec::Vmd(c) => c.modes,
            DecomposerSpec::PassThrough => 1,
        }
    }

    /// Shortest input the decomposer accepts.
    pub fn min_len(&self) -> usize {
        match self {
            DecomposerSpec::Ssa(c) => c.min_len(),
            DecomposerSpec::Vmd(c) => c.min_len(),
            DecomposerSpec::PassThrough => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DecomposerSpec::Ssa(c) => c.validate(),
            DecomposerSpec::Vmd(c) => c.validate(),
            DecomposerSpec::PassThrough => Ok(()),
        }
    }

    pub fn cache_key(&self) -> String {
        serde_json::to_string(self).expect("decomposer spec serializes")
    }

    pub fn label(&self) -> String {
        match self {
            DecomposerSpec::Ssa(c) => format!("SSA(DL={})", c.window),
            DecomposerSpec::Vmd(c) => format!("VMD(K={},alpha={})", c.modes, c.alpha),
            DecomposerSpec::PassThrough => "none".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Odb,
    Kn,
    Sdb,
    Fsdb,
}

impl Technique {
    pub const ALL: [Technique; 4] = [Technique::Odb, Technique::Kn, Technique::Sdb, Technique::Fsdb];

    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Odb => "odb",
            Technique::Kn => "kn",
            Technique::Sdb => "sdb",
            Technique::Fsdb => "fsdb",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "odb" => Ok(Technique::Odb),
            "kn" => Ok(Technique::Kn),
            "sdb" => Ok(Technique::Sdb),
            "fsdb" => Ok(Technique::Fsdb),
            other => Err(Error::Validation(format!("unknown sampling technique `{other}`"))),
        }
    }
}

pub const DEFAULT_LAG: usize = 7;
pub const DEFAULT_WARMUP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub technique: Technique,
    #[serde(default = "default_lag")]
    pub lag: usize,
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    /// KN only: last index (1-based) of the block decomposed in one piece.
    #[serde(default)]
    pub calib_end: Option<usize>,
}

fn default_lag() -> usize {
    DEFAULT_LAG
}

fn default_warmup() -> usize {
    DEFAULT_WARMUP
}

impl SamplerConfig {
    pub fn new(technique: Technique, lag: usize, warmup: usize) -> Self {
        Self {
            technique,
            lag,
            warmup,
            calib_end: None,
        }
    }

    pub fn with_calib_end(mut self, calib_end: usize) -> Self {
        self.calib_end = Some(calib_end);
        self
    }

    pub fn validate(&self, n: usize, decomposer: &DecomposerSpec) -> Result<()> {
        decomposer.validate()?;
        if self.lag < 1 {
            return Err(Error::Validation("lag must be at least 1".into()));
        }
        let needed = self.lag.max(decomposer.min_len());
        if self.warmup < needed {
            return Err(Error::Validation(format!(
                "warm-up {} is too short: lag {} and {} need at least {needed}",
                self.warmup,
                self.lag,
                decomposer.label()
            )));
        }
        if n <= self.warmup {
            return Err(Error::Validation(format!(
                "series of length {n} leaves no samples after warm-up {}",
                self.warmup
            )));
        }
        if self.technique == Technique::Kn {
            let c = self
                .calib_end
                .ok_or_else(|| Error::Validation("KN sampling needs calib_end".into()))?;
            if !(self.warmup < c && c < n) {
                return Err(Error::Validation(format!(
                    "KN calib_end must satisfy warm-up {} < calib_end < N={n}, got {c}",
                    self.warmup
                )));
            }
        }
        Ok(())
    }
}

/// Supervised samples for one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub lag: usize,
    /// Row-major `rows × lag` explanatory values, oldest lag first.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// 1-based prediction time of each row.
    pub times: Vec<usize>,
}

impl SampleMatrix {
    fn with_capacity(lag: usize, rows: usize) -> Self {
        Self {
            lag,
            x: Vec::with_capacity(rows * lag),
            y: Vec::with_capacity(rows),
            times: Vec::with_capacity(rows),
        }
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.x[j * self.lag..(j + 1) * self.lag]
    }

    fn push(&mut self, t: usize, x: &[f64], y: f64) {
        debug_assert_eq!(x.len(), self.lag);
        self.x.extend_from_slice(x);
        self.y.push(y);
        self.times.push(t);
    }

    /// CSV with columns `X1..Xm,y,t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.lag {
            out.push_str(&format!("X{i},"));
        }
        out.push_str("y,t\n");
        for j in 0..self.rows() {
            for v in self.row(j) {
                out.push_str(&v.to_string());
                out.push(',');
            }
            out.push_str(&format!("{},{}\n", self.y[j], self.times[j]));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub technique: Technique,
    pub components: Vec<SampleMatrix>,
}

impl SampleSet {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn times(&self) -> &[usize] {
        self.components.first().map_or(&[], |c| &c.times)
    }

    /// `Σ_k y_j` for every sample.
    pub fn target_sums(&self) -> Vec<f64> {
        let rows = self.times().len();
        (0..rows)
            .map(|j| self.components.iter().map(|c| c.y[j]).sum())
            .collect()
    }
}

/// Extracts samples under `config.technique`. Prefix decompositions run on
/// the context's pool and are memoized there, so SDB and FSDB on the same
/// series and decomposer share work.
pub fn extract(
    series: &TimeSeries,
    decomposer: &DecomposerSpec,
    config: &SamplerConfig,
    ctx: &Context,
) -> Result<SampleSet> {
    let values = series.values();
    let n = values.len();
    config.validate(n, decomposer)?;
    let m = config.lag;
    let w = config.warmup;

    // X row for time t from a full decomposition covering at least 1..t-1.
    let window = |cs: &ComponentSet, k: usize, t: usize| -> Vec<f64> { cs.components[k][t - 1 - m..t - 1].to_vec() };

    let mut out: Vec<SampleMatrix> = Vec::new();
    let mut init = |k_count: usize| {
        out = (0..k_count).map(|_| SampleMatrix::with_capacity(m, n - w)).collect();
    };

    match config.technique {
        Technique::Odb => {
            let full = ctx.whole(values, decomposer)?;
            init(full.n_components());
            for t in w + 1..=n {
                for (k, sm) in out.iter_mut().enumerate() {
                    sm.push(t, &window(&full, k, t), full.components[k][t - 1]);
                }
            }
        }
        Technique::Kn => {
            let c = config.calib_end.expect("validated");
            let full = ctx.whole(values, decomposer)?;
            let block = ctx.whole(&values[..c], decomposer)?;
            let tails = if c < n {
                ctx.prefix_tails(values, decomposer, c..=n - 1, m)?
            } else {
                Vec::new()
            };
            init(full.n_components());
            for t in w + 1..=n {
                for (k, sm) in out.iter_mut().enumerate() {
                    let x = if t <= c {
                        window(&block, k, t)
                    } else {
                        tails[t - 1 - c][k].clone()
                    };
                    sm.push(t, &x, full.components[k][t - 1]);
                }
            }
        }
        Technique::Sdb => {
            let full = ctx.whole(values, decomposer)?;
            let tails = ctx.prefix_tails(values, decomposer, w..=n - 1, m)?;
            init(full.n_components());
            for t in w + 1..=n {
                let tail: &Arc<Tail> = &tails[t - 1 - w];
                for (k, sm) in out.iter_mut().enumerate() {
                    sm.push(t, &tail[k], full.components[k][t - 1]);
                }
            }
        }
        Technique::Fsdb => {
            let tails = ctx.prefix_tails(values, decomposer, w..=n, m)?;
            init(tails[0].len());
            for t in w + 1..=n {
                let explanatory = &tails[t - 1 - w];
                let response = &tails[t - w];
                for (k, sm) in out.iter_mut().enumerate() {
                    sm.push(t, &explanatory[k], *response[k].last().expect("nonempty tail"));
                }
            }
        }
    }

    Ok(SampleSet {
        technique: config.technique,
        components: out,
    })
}

fn extract_fresh(series: &TimeSeries, decomposer: &DecomposerSpec, config: SamplerConfig) -> Result<SampleSet> {
    extract(series, decomposer, &config, &Context::with_available_parallelism()?)
}

pub fn extract_odb(series: &TimeSeries, decomposer: &DecomposerSpec, lag: usize, warmup: usize) -> Result<SampleSet> {
    extract_fresh(series, decomposer, SamplerConfig::new(Technique::Odb, lag, warmup))
}

pub fn extract_kn(
    series: &TimeSeries,
    decomposer: &DecomposerSpec,
    lag: usize,
    warmup: usize,
    calib_end: usize,
) -> Result<SampleSet> {
    extract_fresh(
        series,
        decomposer,
        SamplerConfig::new(Technique::Kn, lag, warmup).with_calib_end(calib_end),
    )
}

pub fn extract_sdb(series: &TimeSeries, decomposer: &DecomposerSpec, lag: usize, warmup: usize) -> Result<SampleSet> {
    extract_fresh(series, decomposer, SamplerConfig::new(Technique::Sdb, lag, warmup))
}

pub fn extract_fsdb(series: &TimeSeries, decomposer: &DecomposerSpec, lag: usize, warmup: usize) -> Result<SampleSet> {
    extract_fresh(series, decomposer, SamplerConfig::new(Technique::Fsdb, lag, warmup))
}
