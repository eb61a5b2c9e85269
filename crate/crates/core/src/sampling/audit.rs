use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::series::TimeSeries;

use super::context::{tail_of, Tail};
use super::{extract, Context, DecomposerSpec, SamplerConfig, Technique};

/// Where a technique takes its responses from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseSource {
    Prefix,
    FullSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Explanatory values and responses both reproduce from truncated data.
    FullyCausal,
    /// Explanatory values reproduce; responses come from the whole series.
    CausalExplanatory,
    NonCausal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDeviation {
    pub t: usize,
    pub x_deviation: f64,
    pub y_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub technique: Technique,
    pub decomposer: String,
    pub lag: usize,
    pub warmup: usize,
    pub n_samples: usize,
    pub max_x_deviation: f64,
    pub max_y_deviation: f64,
    /// Samples whose explanatory values changed on recomputation.
    pub x_contaminated_samples: usize,
    pub response_source: ResponseSource,
    pub x_causal: bool,
    pub y_causal: bool,
    pub verdict: Verdict,
    pub samples: Vec<SampleDeviation>,
}

/// Recomputes every stored sample from truncated data and reports the
/// largest absolute difference per sample.
///
/// Explanatory values of sample `j` are recomputed from a fresh
/// decomposition of `S_1..S_{t_j − 1}`, responses from `S_1..S_{t_j}`. These
/// decompositions bypass the context's cache so the check does not share a
/// code path with extraction. Comparisons are exact: a causal sample
/// reproduces bit for bit.
pub fn audit_causality(
    series: &TimeSeries,
    decomposer: &DecomposerSpec,
    config: &SamplerConfig,
    ctx: &Context,
) -> Result<AuditReport> {
    let samples = extract(series, decomposer, config, ctx)?;
    let values = series.values();
    let n = values.len();
    let w = config.warmup;
    let m = config.lag;

    // Fresh tails for prefixes w..=n.
    let fresh: Vec<Tail> = ctx.install(|| {
        (w..=n)
            .into_par_iter()
            .map(|p| decomposer.decompose(&values[..p]).map(|cs| tail_of(&cs, m)))
            .collect::<Result<Vec<_>>>()
    })?;

    let deviations: Vec<SampleDeviation> = samples
        .times()
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let before = &fresh[t - 1 - w];
            let upto = &fresh[t - w];
            let mut x_dev = 0.0f64;
            let mut y_dev = 0.0f64;
            for (k, sm) in samples.components.iter().enumerate() {
                for (stored, recomputed) in sm.row(j).iter().zip(&before[k]) {
                    x_dev = x_dev.max((stored - recomputed).abs());
                }
                let y_ref = *upto[k].last().expect("nonempty tail");
                y_dev = y_dev.max((sm.y[j] - y_ref).abs());
            }
            SampleDeviation {
                t,
                x_deviation: x_dev,
                y_deviation: y_dev,
            }
        })
        .collect();

    let max_x = deviations.iter().map(|d| d.x_deviation).fold(0.0, f64::max);
    let max_y = deviations.iter().map(|d| d.y_deviation).fold(0.0, f64::max);
    let response_source = match config.technique {
        Technique::Fsdb => ResponseSource::Prefix,
        _ => ResponseSource::FullSeries,
    };
    let x_causal = max_x == 0.0;
    let y_causal = response_source == ResponseSource::Prefix && max_y == 0.0;
    let verdict = match (x_causal, y_causal) {
        (true, true) => Verdict::FullyCausal,
        (true, false) => Verdict::CausalExplanatory,
        _ => Verdict::NonCausal,
    };

    Ok(AuditReport {
        technique: config.technique,
        decomposer: decomposer.label(),
        lag: m,
        warmup: w,
        n_samples: deviations.len(),
        max_x_deviation: max_x,
        max_y_deviation: max_y,
        x_contaminated_samples: deviations.iter().filter(|d| d.x_deviation > 0.0).count(),
        response_source,
        x_causal,
        y_causal,
        verdict,
        samples: deviations,
    })
}
