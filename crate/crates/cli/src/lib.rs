//! `stepcast` command line: synthetic data, decomposition, sampling,
//! causality audits, training, forecasting, grid search and comparisons.

mod args;
mod commands;
pub mod plot;

use std::ffi::OsString;

use clap::{Args, CommandFactory, Parser, Subcommand};

use args::{CommonArgs, DecomposerArgs, GbtArgs, GridKind, SamplerArgs, SeriesArgs, SplitArgs};

pub use plot::{emit_plot, render_svg};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for usage, configuration and input validation errors.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for failures during computation or I/O.
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stepcast",
    version,
    about = "Decomposition-based water-level forecasting with leakage-free sampling",
    after_help = "Exit status: 0 success, 1 validation or usage error, 2 runtime error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic daily water-level series (series.csv)
    Synth(SynthCmd),
    /// Decompose a whole series into components (components.csv)
    Decompose(DecomposeCmd),
    /// Build supervised samples, one CSV per component
    Sample(SampleCmd),
    /// Check whether stored samples reproduce from truncated data (audit.json)
    Audit(SampleCmd),
    /// Fit one model per component on the calibration period (model.json, report.json)
    Train(TrainCmd),
    /// Apply a trained model to a series (forecast.csv)
    Forecast(ForecastCmd),
    /// Evaluate a decomposer parameter grid (grid.json, grid.csv, grid_nse.csv)
    #[command(visible_alias = "grid-search")]
    Grid(GridCmd),
    /// Compare the naive model with SSA and VMD under SDB and FSDB (comparison.csv)
    Compare(CompareCmd),
    /// Run one experiment and write scores with observed-vs-forecast charts
    Report(ReportCmd),
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Generator preset (guoyang-like, chaohu-like, taoxi-like)
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Generator seed; required with --preset
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Series length [default: preset length]
    #[arg(long, value_name = "N")]
    pub length: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecomposeCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub decomposer: DecomposerArgs,
}

#[derive(Debug, Args)]
pub struct SampleCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub decomposer: DecomposerArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub decomposer: DecomposerArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub gbt: GbtArgs,
}

#[derive(Debug, Args)]
pub struct ForecastCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Model file written by `train`
    #[arg(long, value_name = "FILE")]
    pub model: std::path::PathBuf,
}

#[derive(Debug, Args)]
pub struct GridCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Grid to search; the default grid of that kind replaces any other kind in the config
    #[arg(long, value_enum, value_name = "KIND")]
    pub grid: Option<GridKind>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub gbt: GbtArgs,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    /// SSA window length for the SSA rows [default: 3]
    #[arg(long, value_name = "DL")]
    pub ssa_window: Option<usize>,
    /// VMD modes for the VMD rows [default: 3]
    #[arg(long, value_name = "K")]
    pub vmd_modes: Option<usize>,
    /// VMD alpha for the VMD rows [default: 2000]
    #[arg(long, value_name = "A")]
    pub vmd_alpha: Option<f64>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub gbt: GbtArgs,
    /// Skip the validation-period SVG charts
    #[arg(long)]
    pub no_plots: bool,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    #[command(flatten)]
    pub train: TrainCmd,
    /// Skip the per-period SVG charts
    #[arg(long)]
    pub no_plots: bool,
}

/// Summary of the JSON config accepted by `--config`, printed on usage and
/// configuration errors.
pub const CONFIG_HELP: &str = r#"Config file (--config FILE) is a JSON object; unknown keys are rejected:
  "series":     {"file": {"path": "levels.csv"}}
                | {"synthetic": {"preset": "chaohu-like", "seed": 7, "length": 3653}}   (required)
  "split":      {"calib_frac": 0.6, "test_frac": 0.2, "valid_frac": 0.2}
  "decomposer": {"kind": "ssa", "window": 3}
                | {"kind": "vmd", "modes": 3, "alpha": 2000, "tau": 0, "tol": 1e-7,
                   "max_iter": 500, "init": "uniform" | "zeros" | {"random": {"seed": 1}},
                   "dc_mode": false}
                | {"kind": "passthrough"}
  "sampler":    {"technique": "odb" | "kn" | "sdb" | "fsdb", "lag": 7, "warmup": 100, "calib_end": null}
  "gbt":        {"n_estimators": 450, "learning_rate": 0.01, "max_depth": 3,
                 "min_child_weight": 1, "lambda": 1, "gamma": 0, "base_score": null}
  "compare":    {"ssa": {"window": 3}, "vmd": {"modes": 3, "alpha": 2000}}
  "grid":       {"kind": "ssa", "dl_min": 3, "dl_max": 11}
                | {"kind": "vmd", "k_min": 3, "k_max": 11, "k_step": 1,
                   "alpha_min": 100, "alpha_max": 3000, "alpha_step": 100}
  "out":        "results/"
  "jobs":       4
Command-line flags override the file."#;

/// Help text of the top-level command or of one subcommand, rendered at a
/// fixed width.
pub fn help_text(subcommand: Option<&str>) -> Option<String> {
    let mut cmd = Cli::command().term_width(100);
    cmd.build();
    let target = match subcommand {
        None => &mut cmd,
        Some(name) => cmd.find_subcommand_mut(name)?,
    };
    Some(target.render_long_help().to_string())
}

pub const SUBCOMMANDS: [&str; 9] = [
    "synth",
    "decompose",
    "sample",
    "audit",
    "train",
    "forecast",
    "grid",
    "compare",
    "report",
];

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit status. Messages go to standard error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                _ => {
                    let _ = e.print();
                    eprintln!("\n{CONFIG_HELP}");
                    EXIT_VALIDATION
                }
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) if e.is_validation() => {
            eprintln!("error: {e}");
            eprintln!("\n{CONFIG_HELP}");
            EXIT_VALIDATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
