use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{Context, DecomposerSpec};
use crate::series::Period;
use crate::ssa::SsaConfig;
use crate::vmd::VmdConfig;

use super::{evaluate, experiment_label, ExperimentConfig, MetricsReport};

/// Decomposer parameter grid. Defaults: SSA window 3..=11; VMD modes
/// 3..=11 (step 1) × alpha 100..=3000 (step 100).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridSpec {
    Ssa {
        #[serde(default = "ssa_lo")]
        dl_min: usize,
        #[serde(default = "ssa_hi")]
        dl_max: usize,
    },
    Vmd {
        #[serde(default = "k_lo")]
        k_min: usize,
        #[serde(default = "k_hi")]
        k_max: usize,
        #[serde(default = "one")]
        k_step: usize,
        #[serde(default = "alpha_lo")]
        alpha_min: f64,
        #[serde(default = "alpha_hi")]
        alpha_max: f64,
        #[serde(default = "alpha_step")]
        alpha_step: f64,
    },
}

fn ssa_lo() -> usize {
    3
}
fn ssa_hi() -> usize {
    11
}
fn k_lo() -> usize {
    3
}
fn k_hi() -> usize {
    11
}
fn one() -> usize {
    1
}
fn alpha_lo() -> f64 {
    100.0
}
fn alpha_hi() -> f64 {
    3000.0
}
fn alpha_step() -> f64 {
    100.0
}

impl GridSpec {
    pub fn default_ssa() -> Self {
        GridSpec::Ssa {
            dl_min: ssa_lo(),
            dl_max: ssa_hi(),
        }
    }

    pub fn default_vmd() -> Self {
        GridSpec::Vmd {
            k_min: k_lo(),
            k_max: k_hi(),
            k_step: one(),
            alpha_min: alpha_lo(),
            alpha_max: alpha_hi(),
            alpha_step: alpha_step(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GridSpec::Ssa { dl_min, dl_max } => {
                if dl_min < 2 || dl_max < dl_min {
                    return Err(Error::Validation(format!("invalid SSA grid {dl_min}..={dl_max}")));
                }
            }
            GridSpec::Vmd {
                k_min,
                k_max,
                k_step,
                alpha_min,
                alpha_max,
                alpha_step,
            } => {
                if k_min < 1 || k_max < k_min || k_step < 1 {
                    return Err(Error::Validation(format!("invalid VMD mode grid {k_min}..={k_max} step {k_step}")));
                }
                if !(alpha_min > 0.0) || !(alpha_max >= alpha_min) || !(alpha_step > 0.0) {
                    return Err(Error::Validation(format!(
                        "invalid VMD alpha grid {alpha_min}..={alpha_max} step {alpha_step}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Grid points in row-major order (modes outer, alpha inner for VMD).
    /// `vmd_base` supplies the VMD settings that the grid does not vary.
    pub fn points(&self, vmd_base: &VmdConfig) -> Vec<DecomposerSpec> {
        match *self {
            GridSpec::Ssa { dl_min, dl_max } => (dl_min..=dl_max)
                .map(|l| DecomposerSpec::Ssa(SsaConfig::new(l)))
                .collect(),
            GridSpec::Vmd {
                k_min,
                k_max,
                k_step,
                alpha_min,
                alpha_max,
                alpha_step,
            } => {
                // Integer step counts avoid accumulating float error.
                let n_alpha = ((alpha_max - alpha_min) / alpha_step + 1e-9).floor() as usize + 1;
                let mut out = Vec::new();
                for k in (k_min..=k_max).step_by(k_step) {
                    for i in 0..n_alpha {
                        out.push(DecomposerSpec::Vmd(VmdConfig {
                            modes: k,
                            alpha: alpha_min + i as f64 * alpha_step,
                            ..*vmd_base
                        }));
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub decomposer: DecomposerSpec,
    pub label: String,
    pub report: Option<MetricsReport>,
    /// Failure message when the point could not be evaluated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    /// Row indices of successful points by validation NSE, best first.
    pub ranking: Vec<usize>,
    pub optimal: Option<usize>,
}

impl GridResult {
    pub fn optimal_report(&self) -> Option<&MetricsReport> {
        self.optimal.and_then(|i| self.rows[i].report.as_ref())
    }
}

/// Evaluates every grid point with the config's sampler, split and model
/// settings and picks the point with the highest validation NSE. Failed
/// points are recorded and skipped. Points run concurrently; the result
/// order does not depend on completion order.
pub fn grid_search(config: &ExperimentConfig, grid: &GridSpec, ctx: &Context) -> Result<GridResult> {
    config.validate()?;
    grid.validate()?;
    let series = config.series.load()?;
    let vmd_base = match &config.decomposer {
        DecomposerSpec::Vmd(v) => *v,
        _ => config.compare.vmd,
    };
    let points = grid.points(&vmd_base);

    let rows: Vec<GridRow> = ctx.install(|| {
        points
            .into_par_iter()
            .map(|decomposer| {
                let label = decomposer.label();
                let name = experiment_label(&decomposer, config.sampler.technique);
                let result = evaluate(&name, &series, &config.split, &decomposer, &config.sampler, &config.gbt, ctx);
                // Prefix tails of one grid point are never reused by another.
                ctx.evict(&decomposer);
                match result {
                    Ok(outcome) => GridRow {
                        decomposer,
                        label,
                        report: Some(outcome.report),
                        error: None,
                    },
                    Err(e) => GridRow {
                        decomposer,
                        label,
                        report: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });

    let mut ranking: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].report.is_some()).collect();
    let nse = |i: usize| rows[i].report.as_ref().expect("ranked rows have reports").scores.validation.nse;
    // Stable sort keeps grid order among equal scores.
    ranking.sort_by(|&a, &b| nse(b).total_cmp(&nse(a)));
    let optimal = ranking.first().copied();
    Ok(GridResult { rows, ranking, optimal })
}

/// Wide NSE table: one row per period, one column per grid point. Failed
/// points are left empty.
pub fn grid_nse_csv(result: &GridResult) -> String {
    let mut out = String::from("period");
    for row in &result.rows {
        out.push(',');
        out.push_str(&row.label.replace(',', ";"));
    }
    out.push('\n');
    for period in Period::ALL {
        out.push_str(period.as_str());
        for row in &result.rows {
            out.push(',');
            if let Some(r) = &row.report {
                out.push_str(&r.scores.get(period).nse.to_string());
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_sizes() {
        let base = VmdConfig::new(3, 100.0);
        assert_eq!(GridSpec::default_ssa().points(&base).len(), 9);
        let vmd = GridSpec::default_vmd().points(&base);
        assert_eq!(vmd.len(), 270);
        assert_eq!(vmd[0], DecomposerSpec::Vmd(VmdConfig::new(3, 100.0)));
        assert_eq!(vmd[269], DecomposerSpec::Vmd(VmdConfig::new(11, 3000.0)));
    }

    #[test]
    fn invalid_grids() {
        assert!(GridSpec::Ssa { dl_min: 5, dl_max: 4 }.validate().is_err());
        let bad = GridSpec::Vmd {
            k_min: 3,
            k_max: 4,
            k_step: 1,
            alpha_min: 100.0,
            alpha_max: 200.0,
            alpha_step: 0.0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn grid_json_defaults() {
        let g: GridSpec = serde_json::from_str(r#"{"kind":"vmd"}"#).unwrap();
        assert_eq!(g, GridSpec::default_vmd());
        let g: GridSpec = serde_json::from_str(r#"{"kind":"ssa","dl_max":5}"#).unwrap();
        assert_eq!(g, GridSpec::Ssa { dl_min: 3, dl_max: 5 });
    }
}
