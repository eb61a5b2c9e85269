use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sampling::{Context, DecomposerSpec, SamplerConfig, Technique};
use crate::series::{Period, TimeSeries};
use crate::ssa::SsaConfig;
use crate::vmd::VmdConfig;

use super::{evaluate, experiment_label, ExperimentConfig, ExperimentOutcome};

/// Row labels of the comparison table, in order.
pub const COMPARE_MODELS: [&str; 5] = ["naive", "SSA-SDB", "SSA-FSDB", "VMD-SDB", "VMD-FSDB"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub ssa: SsaConfig,
    pub vmd: VmdConfig,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self {
            ssa: SsaConfig::new(3),
            vmd: VmdConfig::new(3, 2000.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub series: TimeSeries,
    /// One outcome per entry of [`COMPARE_MODELS`], same order.
    pub outcomes: Vec<ExperimentOutcome>,
}

/// Runs the naive baseline and SSA/VMD under SDB and FSDB sampling with the
/// config's lag, warm-up, split and model settings.
pub fn compare(config: &ExperimentConfig, ctx: &Context) -> Result<CompareOutcome> {
    config.validate()?;
    let series = config.series.load()?;
    let lag = config.sampler.lag;
    let warmup = config.sampler.warmup;
    let ssa = DecomposerSpec::Ssa(config.compare.ssa);
    let vmd = DecomposerSpec::Vmd(config.compare.vmd);
    let runs = [
        (DecomposerSpec::PassThrough, Technique::Fsdb),
        (ssa.clone(), Technique::Sdb),
        (ssa, Technique::Fsdb),
        (vmd.clone(), Technique::Sdb),
        (vmd, Technique::Fsdb),
    ];
    let mut outcomes = Vec::with_capacity(runs.len());
    for (decomposer, technique) in runs {
        let label = experiment_label(&decomposer, technique);
        let sampler = SamplerConfig::new(technique, lag, warmup);
        outcomes.push(evaluate(&label, &series, &config.split, &decomposer, &sampler, &config.gbt, ctx)?);
    }
    Ok(CompareOutcome { series, outcomes })
}

/// `model,<period>_nse,<period>_rmse,<period>_mae,...` with one row per model.
pub fn comparison_csv(outcome: &CompareOutcome) -> String {
    let mut out = String::from("model");
    for p in Period::ALL {
        for m in ["nse", "rmse", "mae"] {
            out.push_str(&format!(",{}_{m}", p.as_str()));
        }
    }
    out.push('\n');
    for o in &outcome.outcomes {
        out.push_str(&o.report.label);
        for p in Period::ALL {
            let s = o.report.scores.get(p);
            out.push_str(&format!(",{},{},{}", s.nse, s.rmse, s.mae));
        }
        out.push('\n');
    }
    out
}
