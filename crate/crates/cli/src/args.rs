use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use stepcast_core::gbt::GbtConfig;
use stepcast_core::pipeline::{ExperimentConfig, GridSpec, SeriesSource};
use stepcast_core::sampling::{DecomposerSpec, Technique};
use stepcast_core::ssa::SsaConfig;
use stepcast_core::vmd::{InitFreqs, VmdConfig};
use stepcast_core::{Error, Result};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON experiment config; flags given on the command line override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory that receives every output file (created if missing)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads [default: number of cores]
    #[arg(long, value_name = "N", env = "STEPCAST_JOBS", hide_env_values = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Observed series as CSV with header `date,value`
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    pub input: Option<PathBuf>,

    /// Synthetic generator preset (guoyang-like, chaohu-like, taoxi-like)
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,

    /// Generator seed; required with --preset
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Synthetic series length [default: preset length]
    #[arg(long, value_name = "N")]
    pub length: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecomposerKind {
    Ssa,
    Vmd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Uniform,
    Zeros,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposerArgs {
    /// Decomposition method; `none` keeps the raw series as one component [default: ssa, or the
    /// method whose flags are given]
    #[arg(long, value_enum, value_name = "KIND")]
    pub decomposer: Option<DecomposerKind>,

    /// SSA window length DL [default: 3]
    #[arg(long, value_name = "DL")]
    pub window: Option<usize>,

    /// VMD number of modes K [default: 3]
    #[arg(long, value_name = "K")]
    pub modes: Option<usize>,

    /// VMD bandwidth penalty alpha [default: 2000]
    #[arg(long, value_name = "A")]
    pub alpha: Option<f64>,

    /// VMD dual ascent step tau [default: 0]
    #[arg(long, value_name = "T")]
    pub tau: Option<f64>,

    /// VMD convergence tolerance [default: 1e-7]
    #[arg(long, value_name = "TOL")]
    pub tol: Option<f64>,

    /// VMD iteration cap [default: 500]
    #[arg(long, value_name = "N")]
    pub max_iter: Option<usize>,

    /// VMD center-frequency initialization [default: uniform]
    #[arg(long, value_enum, value_name = "KIND")]
    pub init: Option<InitKind>,

    /// Seed for `--init random`; required with it
    #[arg(long, value_name = "N")]
    pub init_seed: Option<u64>,

    /// Keep the first VMD mode at zero frequency
    #[arg(long)]
    pub dc_mode: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    /// Sampling technique
    #[arg(long, value_parser = parse_technique, value_name = "odb|kn|sdb|fsdb")]
    pub technique: Option<Technique>,

    /// Number of lagged inputs m [default: 7]
    #[arg(long, value_name = "M")]
    pub lag: Option<usize>,

    /// Warm-up length W; the first sample predicts t = W+1 [default: 100]
    #[arg(long, value_name = "W")]
    pub warmup: Option<usize>,

    /// KN only: end of the block decomposed in one piece [default: end of the test period]
    #[arg(long, value_name = "T")]
    pub calib_end: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    /// Calibration fraction [default: 0.6]
    #[arg(long, value_name = "F")]
    pub calib_frac: Option<f64>,

    /// Test fraction [default: 0.2]
    #[arg(long, value_name = "F")]
    pub test_frac: Option<f64>,

    /// Validation fraction [default: 0.2]
    #[arg(long, value_name = "F")]
    pub valid_frac: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GbtArgs {
    /// Named hyperparameter set (guoyang, chaohu, taoxi) [default: chaohu]
    #[arg(long, value_name = "NAME")]
    pub gbt_preset: Option<String>,

    /// Number of trees
    #[arg(long, value_name = "N")]
    pub n_estimators: Option<usize>,

    /// Shrinkage applied to each tree
    #[arg(long, value_name = "LR")]
    pub learning_rate: Option<f64>,

    /// Maximum tree depth
    #[arg(long, value_name = "D")]
    pub max_depth: Option<usize>,

    /// Minimum hessian sum per leaf
    #[arg(long, value_name = "W")]
    pub min_child_weight: Option<f64>,

    /// L2 penalty on leaf weights
    #[arg(long, value_name = "L")]
    pub lambda: Option<f64>,

    /// Minimum gain required to split
    #[arg(long, value_name = "G")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Ssa,
    Vmd,
}

fn parse_technique(s: &str) -> std::result::Result<Technique, String> {
    s.parse::<Technique>().map_err(|e| e.to_string())
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("config {}: {e}", path.display())))
}

/// Starting config: the file given with `--config`, or one built from the
/// series flags.
pub fn base_config(common: &CommonArgs, series: Option<&SeriesArgs>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => Some(read_config(path)?),
        None => None,
    };
    if let Some(s) = series {
        if let Some(source) = series_source(s)? {
            match &mut cfg {
                Some(c) => c.series = source,
                None => cfg = Some(ExperimentConfig::new(source)),
            }
        } else if s.length.is_some() {
            match cfg.as_mut().map(|c| &mut c.series) {
                Some(SeriesSource::Synthetic { length, .. }) => *length = s.length,
                _ => return Err(Error::Validation("--length applies to synthetic series only".into())),
            }
        }
    }
    let mut cfg = cfg.ok_or_else(|| {
        Error::Validation("no series given: pass --input FILE, --preset NAME --seed N, or --config FILE".into())
    })?;
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    Ok(cfg)
}

fn series_source(s: &SeriesArgs) -> Result<Option<SeriesSource>> {
    if let Some(path) = &s.input {
        if s.seed.is_some() || s.length.is_some() {
            return Err(Error::Validation("--seed and --length apply to synthetic series only".into()));
        }
        return Ok(Some(SeriesSource::File { path: path.clone() }));
    }
    match (&s.preset, s.seed) {
        (Some(preset), Some(seed)) => Ok(Some(SeriesSource::Synthetic {
            preset: preset.clone(),
            seed,
            length: s.length,
        })),
        (Some(_), None) => Err(Error::Validation("--preset requires --seed".into())),
        (None, Some(_)) => Err(Error::Validation("--seed requires --preset".into())),
        (None, None) => Ok(None),
    }
}

pub fn apply_decomposer(cfg: &mut ExperimentConfig, a: &DecomposerArgs) -> Result<()> {
    let ssa_flags = a.window.is_some();
    let vmd_flags = a.modes.is_some()
        || a.alpha.is_some()
        || a.tau.is_some()
        || a.tol.is_some()
        || a.max_iter.is_some()
        || a.init.is_some()
        || a.init_seed.is_some()
        || a.dc_mode;
    // Without --decomposer, method-specific flags select the method.
    let kind = match (a.decomposer, ssa_flags, vmd_flags) {
        (Some(k), _, _) => k,
        (None, true, true) => {
            return Err(Error::Validation("both SSA and VMD flags given".into()));
        }
        (None, true, false) => DecomposerKind::Ssa,
        (None, false, true) => DecomposerKind::Vmd,
        (None, false, false) => match cfg.decomposer {
            DecomposerSpec::Ssa(_) => DecomposerKind::Ssa,
            DecomposerSpec::Vmd(_) => DecomposerKind::Vmd,
            DecomposerSpec::PassThrough => DecomposerKind::None,
        },
    };
    cfg.decomposer = match kind {
        DecomposerKind::Ssa => {
            if vmd_flags {
                return Err(Error::Validation("VMD flags given with an SSA decomposer".into()));
            }
            let mut c = match cfg.decomposer {
                DecomposerSpec::Ssa(c) => c,
                _ => SsaConfig::new(3),
            };
            if let Some(w) = a.window {
                c.window = w;
            }
            DecomposerSpec::Ssa(c)
        }
        DecomposerKind::Vmd => {
            if ssa_flags {
                return Err(Error::Validation("--window given with a VMD decomposer".into()));
            }
            let mut c = match cfg.decomposer {
                DecomposerSpec::Vmd(c) => c,
                _ => VmdConfig::new(3, 2000.0),
            };
            apply_vmd(&mut c, a)?;
            DecomposerSpec::Vmd(c)
        }
        DecomposerKind::None => {
            if ssa_flags || vmd_flags {
                return Err(Error::Validation("decomposer flags given with --decomposer none".into()));
            }
            DecomposerSpec::PassThrough
        }
    };
    Ok(())
}

fn apply_vmd(c: &mut VmdConfig, a: &DecomposerArgs) -> Result<()> {
    if let Some(k) = a.modes {
        c.modes = k;
    }
    if let Some(v) = a.alpha {
        c.alpha = v;
    }
    if let Some(v) = a.tau {
        c.tau = v;
    }
    if let Some(v) = a.tol {
        c.tol = v;
    }
    if let Some(v) = a.max_iter {
        c.max_iter = v;
    }
    if a.dc_mode {
        c.dc_mode = true;
    }
    match (a.init, a.init_seed) {
        (Some(InitKind::Random), Some(seed)) => c.init = InitFreqs::Random { seed },
        (Some(InitKind::Random), None) => return Err(Error::Validation("--init random requires --init-seed".into())),
        (Some(_), Some(_)) => return Err(Error::Validation("--init-seed applies to --init random only".into())),
        (None, Some(seed)) => match c.init {
            InitFreqs::Random { .. } => c.init = InitFreqs::Random { seed },
            _ => return Err(Error::Validation("--init-seed applies to --init random only".into())),
        },
        (Some(InitKind::Uniform), None) => c.init = InitFreqs::Uniform,
        (Some(InitKind::Zeros), None) => c.init = InitFreqs::Zeros,
        (None, None) => {}
    }
    Ok(())
}

pub fn apply_sampler(cfg: &mut ExperimentConfig, a: &SamplerArgs) {
    if let Some(t) = a.technique {
        cfg.sampler.technique = t;
    }
    if let Some(m) = a.lag {
        cfg.sampler.lag = m;
    }
    if let Some(w) = a.warmup {
        cfg.sampler.warmup = w;
    }
    if a.calib_end.is_some() {
        cfg.sampler.calib_end = a.calib_end;
    }
}

pub fn apply_split(cfg: &mut ExperimentConfig, a: &SplitArgs) {
    if let Some(f) = a.calib_frac {
        cfg.split.calib_frac = f;
    }
    if let Some(f) = a.test_frac {
        cfg.split.test_frac = f;
    }
    if let Some(f) = a.valid_frac {
        cfg.split.valid_frac = f;
    }
}

pub fn apply_gbt(cfg: &mut ExperimentConfig, a: &GbtArgs) -> Result<()> {
    if let Some(name) = &a.gbt_preset {
        cfg.gbt = GbtConfig::preset(name)?;
    }
    let g = &mut cfg.gbt;
    if let Some(v) = a.n_estimators {
        g.n_estimators = v;
    }
    if let Some(v) = a.learning_rate {
        g.learning_rate = v;
    }
    if let Some(v) = a.max_depth {
        g.max_depth = v;
    }
    if let Some(v) = a.min_child_weight {
        g.min_child_weight = v;
    }
    if let Some(v) = a.lambda {
        g.lambda = v;
    }
    if let Some(v) = a.gamma {
        g.gamma = v;
    }
    Ok(())
}

pub fn apply_grid(cfg: &mut ExperimentConfig, kind: Option<GridKind>) {
    match kind {
        Some(GridKind::Ssa) if !matches!(cfg.grid, Some(GridSpec::Ssa { .. })) => cfg.grid = Some(GridSpec::default_ssa()),
        Some(GridKind::Vmd) if !matches!(cfg.grid, Some(GridSpec::Vmd { .. })) => cfg.grid = Some(GridSpec::default_vmd()),
        _ => {}
    }
}
