//! Decomposition–forecasting–aggregation: one regression model per
//! component, trained on the calibration subperiod, with forecasts summed
//! across components and scored against the observed series.

mod compare;
mod grid;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compare::{compare, comparison_csv, CompareOutcome, CompareSpec, COMPARE_MODELS};
pub use grid::{grid_nse_csv, grid_search, GridResult, GridRow, GridSpec};

use crate::components::reconstruction_error;
use crate::error::{Error, Result};
use crate::gbt::{fit, GbtConfig, GbtModel, MatrixView};
use crate::metrics::{score, Scores};
use crate::sampling::{extract, Context, DecomposerSpec, SampleSet, SamplerConfig, Technique};
use crate::series::{
    generate_synthetic, load_csv, split_chronological, Period, SplitRanges, SplitSpec, SyntheticSpec, TimeSeries,
};

/// Where the series comes from. Synthetic sources always carry a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SeriesSource {
    File { path: PathBuf },
    Synthetic {
        preset: String,
        seed: u64,
        #[serde(default)]
        length: Option<usize>,
    },
}

impl SeriesSource {
    pub fn load(&self) -> Result<TimeSeries> {
        match self {
            SeriesSource::File { path } => load_csv(path),
            SeriesSource::Synthetic { preset, seed, length } => {
                let mut spec = SyntheticSpec::preset(preset, *seed)?;
                if let Some(len) = length {
                    spec.length = *len;
                }
                generate_synthetic(&spec)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub series: SeriesSource,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default = "default_decomposer")]
    pub decomposer: DecomposerSpec,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub gbt: GbtConfig,
    /// Decomposers used by the five-model comparison.
    #[serde(default)]
    pub compare: CompareSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn default_decomposer() -> DecomposerSpec {
    DecomposerSpec::Ssa(crate::ssa::SsaConfig::new(3))
}

fn default_sampler() -> SamplerConfig {
    SamplerConfig::new(Technique::Fsdb, crate::sampling::DEFAULT_LAG, crate::sampling::DEFAULT_WARMUP)
}

impl ExperimentConfig {
    pub fn new(series: SeriesSource) -> Self {
        Self {
            series,
            split: SplitSpec::default(),
            decomposer: default_decomposer(),
            sampler: default_sampler(),
            gbt: GbtConfig::default(),
            compare: CompareSpec::default(),
            grid: None,
            out: None,
            jobs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.decomposer.validate()?;
        self.gbt.validate()?;
        self.compare.ssa.validate()?;
        self.compare.vmd.validate()?;
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if self.jobs == Some(0) {
            return Err(Error::Validation("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fits one model per component on the rows whose prediction time falls in
/// the calibration subperiod. Components are fitted concurrently.
pub fn train_hybrid(
    samples: &SampleSet,
    ranges: &SplitRanges,
    gbt: &GbtConfig,
    ctx: &Context,
) -> Result<Vec<GbtModel>> {
    let calib_end = *ranges.calibration.end();
    ctx.install(|| {
        samples
            .components
            .par_iter()
            .enumerate()
            .map(|(k, sm)| {
                let rows = sm.times.iter().take_while(|&&t| t <= calib_end).count();
                if rows == 0 {
                    return Err(Error::Fit(format!(
                        "component {} has no samples in the calibration subperiod",
                        k + 1
                    )));
                }
                let x = MatrixView::new(&sm.x[..rows * sm.lag], sm.lag)?;
                fit(x, &sm.y[..rows], gbt).map_err(|e| e.context(format!("fitting component {}", k + 1)))
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    pub t: usize,
    pub forecast: f64,
}

/// `ŷ_t = Σ_k model_k(X_k row for t)` for every sample with `t` in `period`.
pub fn forecast_aggregate(
    models: &[GbtModel],
    samples: &SampleSet,
    period: &std::ops::RangeInclusive<usize>,
) -> Result<Vec<ForecastPoint>> {
    if models.len() != samples.n_components() {
        return Err(Error::Shape(format!(
            "{} models for {} components",
            models.len(),
            samples.n_components()
        )));
    }
    let times = samples.times();
    for sm in &samples.components {
        if sm.times != times {
            return Err(Error::Shape("component samples are not aligned".into()));
        }
    }
    for (k, (model, sm)) in models.iter().zip(&samples.components).enumerate() {
        if model.n_features != sm.lag {
            return Err(Error::Shape(format!(
                "model {} expects {} features but samples have {} lags",
                k + 1,
                model.n_features,
                sm.lag
            )));
        }
    }
    Ok(times
        .iter()
        .enumerate()
        .filter(|(_, t)| period.contains(t))
        .map(|(j, &t)| ForecastPoint {
            t,
            forecast: models
                .iter()
                .zip(&samples.components)
                .map(|(m, sm)| m.predict_row(sm.row(j)))
                .sum(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodScores {
    pub calibration: Scores,
    pub test: Scores,
    pub validation: Scores,
}

impl PeriodScores {
    pub fn get(&self, p: Period) -> &Scores {
        match p {
            Period::Calibration => &self.calibration,
            Period::Test => &self.test,
            Period::Validation => &self.validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCounts {
    pub calibration: usize,
    pub test: usize,
    pub validation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label: String,
    pub series: String,
    pub n: usize,
    pub decomposer: DecomposerSpec,
    pub sampler: SamplerConfig,
    pub gbt: GbtConfig,
    pub split: SplitSpec,
    pub rows: PeriodCounts,
    pub scores: PeriodScores,
    /// RMSE between the series and the sum of its whole-series components.
    pub reconstruction_error: Option<f64>,
    /// Mean `|Σ_k y_j − S_{t_j}|` over all samples: how far training targets
    /// drift from the observations.
    pub target_bias: f64,
}

/// Everything one experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: MetricsReport,
    pub models: Vec<GbtModel>,
    pub samples: SampleSet,
    pub ranges: SplitRanges,
    /// Forecasts for every sample time, in order.
    pub forecasts: Vec<ForecastPoint>,
}

impl ExperimentOutcome {
    /// `(observed, forecast)` over one period.
    pub fn period_series(&self, series: &TimeSeries, period: Period) -> (Vec<f64>, Vec<f64>) {
        let range = self.ranges.range(period);
        self.forecasts
            .iter()
            .filter(|p| range.contains(&p.t))
            .map(|p| (series.values()[p.t - 1], p.forecast))
            .unzip()
    }
}

/// Runs sample → train → aggregate → score for one configuration on an
/// already loaded series.
pub fn evaluate(
    label: &str,
    series: &TimeSeries,
    split: &SplitSpec,
    decomposer: &DecomposerSpec,
    sampler: &SamplerConfig,
    gbt: &GbtConfig,
    ctx: &Context,
) -> Result<ExperimentOutcome> {
    let ranges = split_chronological(series, split)?;
    if sampler.warmup >= *ranges.calibration.end() {
        return Err(Error::Validation(format!(
            "{label}: warm-up {} leaves no samples in the calibration period (ends at t={})",
            sampler.warmup,
            ranges.calibration.end()
        )));
    }
    let mut sampler = *sampler;
    if sampler.technique == Technique::Kn && sampler.calib_end.is_none() {
        sampler.calib_end = Some(*ranges.test.end());
    }
    let samples = extract(series, decomposer, &sampler, ctx).map_err(|e| e.context(format!("{label}: sampling")))?;
    let models = train_hybrid(&samples, &ranges, gbt, ctx).map_err(|e| e.context(format!("{label}: training")))?;
    let all = 1..=series.len();
    let forecasts = forecast_aggregate(&models, &samples, &all)?;

    let observed = series.values();
    let mut per_period = Vec::with_capacity(3);
    let mut counts = Vec::with_capacity(3);
    for period in Period::ALL {
        let range = ranges.range(period);
        let (obs, fc): (Vec<f64>, Vec<f64>) = forecasts
            .iter()
            .filter(|p| range.contains(&p.t))
            .map(|p| (observed[p.t - 1], p.forecast))
            .unzip();
        if obs.is_empty() {
            return Err(Error::Validation(format!(
                "{label}: no samples fall in the {} period (warm-up {} too long?)",
                period.as_str(),
                sampler.warmup
            )));
        }
        counts.push(obs.len());
        per_period.push(score(&obs, &fc).map_err(|e| e.context(format!("{label}: scoring {}", period.as_str())))?);
    }

    let reconstruction = match decomposer {
        DecomposerSpec::PassThrough => None,
        _ => Some(reconstruction_error(observed, &*ctx.whole(observed, decomposer)?)?),
    };
    let sums = samples.target_sums();
    let target_bias = sums
        .iter()
        .zip(samples.times())
        .map(|(s, &t)| (s - observed[t - 1]).abs())
        .sum::<f64>()
        / sums.len() as f64;

    let report = MetricsReport {
        label: label.to_string(),
        series: series.name().to_string(),
        n: series.len(),
        decomposer: decomposer.clone(),
        sampler,
        gbt: *gbt,
        split: *split,
        rows: PeriodCounts {
            calibration: counts[0],
            test: counts[1],
            validation: counts[2],
        },
        scores: PeriodScores {
            calibration: per_period[0],
            test: per_period[1],
            validation: per_period[2],
        },
        reconstruction_error: reconstruction,
        target_bias,
    };
    Ok(ExperimentOutcome {
        report,
        models,
        samples,
        ranges,
        forecasts,
    })
}

pub fn experiment_label(decomposer: &DecomposerSpec, technique: Technique) -> String {
    match decomposer {
        DecomposerSpec::PassThrough => "naive".to_string(),
        DecomposerSpec::Ssa(_) => format!("SSA-{}", technique.as_str().to_uppercase()),
        DecomposerSpec::Vmd(_) => format!("VMD-{}", technique.as_str().to_uppercase()),
    }
}

pub fn run_experiment_detailed(config: &ExperimentConfig, ctx: &Context) -> Result<(TimeSeries, ExperimentOutcome)> {
    config.validate()?;
    let series = config.series.load()?;
    let label = experiment_label(&config.decomposer, config.sampler.technique);
    let outcome = evaluate(&label, &series, &config.split, &config.decomposer, &config.sampler, &config.gbt, ctx)?;
    Ok((series, outcome))
}

pub fn run_experiment(config: &ExperimentConfig, ctx: &Context) -> Result<MetricsReport> {
    run_experiment_detailed(config, ctx).map(|(_, o)| o.report)
}

/// Single model on raw lags: the hybrid pipeline with a pass-through
/// decomposer.
pub fn naive_baseline(
    series: &TimeSeries,
    split: &SplitSpec,
    lag: usize,
    warmup: usize,
    gbt: &GbtConfig,
    ctx: &Context,
) -> Result<ExperimentOutcome> {
    let sampler = SamplerConfig::new(Technique::Fsdb, lag, warmup);
    evaluate("naive", series, split, &DecomposerSpec::PassThrough, &sampler, gbt, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssa::SsaConfig;

    fn small_series() -> TimeSeries {
        let mut spec = SyntheticSpec::preset("chaohu-like", 5).unwrap();
        spec.length = 300;
        generate_synthetic(&spec).unwrap()
    }

    fn small_gbt() -> GbtConfig {
        GbtConfig {
            n_estimators: 30,
            learning_rate: 0.1,
            ..GbtConfig::default()
        }
    }

    #[test]
    fn report_has_all_cells() {
        let ctx = Context::new(2).unwrap();
        let s = small_series();
        let out = naive_baseline(&s, &SplitSpec::default(), 7, 20, &small_gbt(), &ctx).unwrap();
        let r = &out.report;
        for p in Period::ALL {
            let sc = r.scores.get(p);
            assert!(sc.nse.is_finite() && sc.nse <= 1.0);
            assert!(sc.rmse >= 0.0 && sc.mae >= 0.0);
        }
        assert_eq!(r.rows.calibration + r.rows.test + r.rows.validation, 300 - 20);
        assert_eq!(r.target_bias, 0.0);
        assert!(r.reconstruction_error.is_none());
    }

    #[test]
    fn warmup_past_calibration_is_rejected() {
        let ctx = Context::new(1).unwrap();
        let s = small_series();
        let err = naive_baseline(&s, &SplitSpec::default(), 7, 250, &small_gbt(), &ctx).unwrap_err();
        assert!(err.is_validation(), "{err}");
    }

    #[test]
    fn aggregate_rejects_mismatched_models() {
        let ctx = Context::new(1).unwrap();
        let s = small_series();
        let d = DecomposerSpec::Ssa(SsaConfig::new(3));
        let samples = extract(&s, &d, &SamplerConfig::new(Technique::Fsdb, 7, 20), &ctx).unwrap();
        let ranges = split_chronological(&s, &SplitSpec::default()).unwrap();
        let models = train_hybrid(&samples, &ranges, &small_gbt(), &ctx).unwrap();
        assert_eq!(models.len(), 3);
        assert!(forecast_aggregate(&models[..2], &samples, &ranges.validation).is_err());
    }

    #[test]
    fn config_json_requires_seed_and_rejects_unknown_keys() {
        let ok = r#"{"series":{"synthetic":{"preset":"chaohu-like","seed":3}}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.sampler.technique, Technique::Fsdb);
        assert_eq!(cfg.gbt.n_estimators, 450);
        let no_seed = r#"{"series":{"synthetic":{"preset":"chaohu-like"}}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(no_seed).is_err());
        let extra = r#"{"series":{"synthetic":{"preset":"chaohu-like","seed":3}},"colour":1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(extra).is_err());
    }
}
