use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stepcast_core::gbt::{GbtConfig, GbtModel};
use stepcast_core::pipeline::{
    compare, evaluate, forecast_aggregate, grid_nse_csv, grid_search, run_experiment_detailed, comparison_csv,
    ExperimentConfig, ExperimentOutcome, GridResult, MetricsReport, SeriesSource,
};
use stepcast_core::sampling::{audit_causality, extract, Context, DecomposerSpec, SamplerConfig, Technique};
use stepcast_core::series::{generate_synthetic, save_csv, split_chronological, Period, SplitSpec, SyntheticSpec, TimeSeries};
use stepcast_core::{Error, Result};

use crate::args::{apply_decomposer, apply_gbt, apply_grid, apply_sampler, apply_split, base_config, SeriesArgs};
use crate::plot::emit_plot;
use crate::{Command, CompareCmd, DecomposeCmd, ForecastCmd, GridCmd, ReportCmd, SampleCmd, SynthCmd, TrainCmd};

/// Model file written by `train` and read by `forecast`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub series: String,
    pub n: usize,
    pub decomposer: DecomposerSpec,
    pub sampler: SamplerConfig,
    pub split: SplitSpec,
    pub gbt: GbtConfig,
    /// One model per component, in component order.
    pub models: Vec<GbtModel>,
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(c) => synth(c),
        Command::Decompose(c) => decompose(c),
        Command::Sample(c) => sample(c, false),
        Command::Audit(c) => sample(c, true),
        Command::Train(c) => train(c),
        Command::Forecast(c) => forecast(c),
        Command::Grid(c) => grid(c),
        Command::Compare(c) => compare_cmd(c),
        Command::Report(c) => report(c),
    }
}

struct Prepared {
    config: ExperimentConfig,
    out: PathBuf,
    ctx: Context,
}

fn prepare(config: ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let out = config
        .out
        .clone()
        .ok_or_else(|| Error::Validation("no output directory: pass --out DIR or set \"out\" in the config".into()))?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let ctx = match config.jobs {
        Some(j) => Context::new(j)?,
        None => Context::with_available_parallelism()?,
    };
    Ok(Prepared { config, out, ctx })
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(dir, name, text)
}

/// Fills in the KN block end the same way the pipeline does.
fn resolve_sampler(series: &TimeSeries, config: &ExperimentConfig) -> Result<SamplerConfig> {
    let mut sampler = config.sampler;
    if sampler.technique == Technique::Kn && sampler.calib_end.is_none() {
        let ranges = split_chronological(series, &config.split)?;
        sampler.calib_end = Some(*ranges.test.end());
    }
    Ok(sampler)
}

fn synth(c: SynthCmd) -> Result<()> {
    let series_args = SeriesArgs {
        input: None,
        preset: c.preset,
        seed: c.seed,
        length: c.length,
    };
    let p = prepare(base_config(&c.common, Some(&series_args))?)?;
    let SeriesSource::Synthetic { preset, seed, length } = &p.config.series else {
        return Err(Error::Validation("synth needs a synthetic series (--preset NAME --seed N)".into()));
    };
    let mut spec = SyntheticSpec::preset(preset, *seed)?;
    if let Some(n) = length {
        spec.length = *n;
    }
    let series = generate_synthetic(&spec)?;
    save_csv(&series, p.out.join("series.csv"))
}

fn decompose(c: DecomposeCmd) -> Result<()> {
    let mut cfg = base_config(&c.common, Some(&c.series))?;
    apply_decomposer(&mut cfg, &c.decomposer)?;
    let p = prepare(cfg)?;
    let series = p.config.series.load()?;
    let cs = p.config.decomposer.decompose(series.values())?;
    write(&p.out, "components.csv", cs.to_wide_csv())?;
    if let Some(conv) = &cs.convergence {
        #[derive(Serialize)]
        struct VmdSummary<'a> {
            center_freqs: &'a Option<Vec<f64>>,
            bandwidths: &'a Option<Vec<f64>>,
            convergence: &'a stepcast_core::components::Convergence,
        }
        write_json(
            &p.out,
            "convergence.json",
            &VmdSummary {
                center_freqs: &cs.center_freqs,
                bandwidths: &cs.bandwidths,
                convergence: conv,
            },
        )?;
    }
    if let Some(sv) = &cs.singular_values {
        write_json(&p.out, "singular_values.json", sv)?;
    }
    Ok(())
}

fn sample(c: SampleCmd, audit: bool) -> Result<()> {
    let mut cfg = base_config(&c.common, Some(&c.series))?;
    apply_decomposer(&mut cfg, &c.decomposer)?;
    apply_sampler(&mut cfg, &c.sampler);
    apply_split(&mut cfg, &c.split);
    let p = prepare(cfg)?;
    let series = p.config.series.load()?;
    let sampler = resolve_sampler(&series, &p.config)?;
    if audit {
        let report = audit_causality(&series, &p.config.decomposer, &sampler, &p.ctx)?;
        return write_json(&p.out, "audit.json", &report);
    }
    let samples = extract(&series, &p.config.decomposer, &sampler, &p.ctx)?;
    for (k, sm) in samples.components.iter().enumerate() {
        write(&p.out, &format!("component_{}.csv", k + 1), sm.to_csv())?;
    }
    Ok(())
}

fn experiment_config(c: &TrainCmd) -> Result<ExperimentConfig> {
    let mut cfg = base_config(&c.common, Some(&c.series))?;
    apply_decomposer(&mut cfg, &c.decomposer)?;
    apply_sampler(&mut cfg, &c.sampler);
    apply_split(&mut cfg, &c.split);
    apply_gbt(&mut cfg, &c.gbt)?;
    Ok(cfg)
}

fn train(c: TrainCmd) -> Result<()> {
    let p = prepare(experiment_config(&c)?)?;
    let (series, outcome) = run_experiment_detailed(&p.config, &p.ctx)?;
    let model = ModelFile {
        series: series.name().to_string(),
        n: series.len(),
        decomposer: p.config.decomposer.clone(),
        sampler: outcome.report.sampler,
        split: p.config.split,
        gbt: p.config.gbt,
        models: outcome.models,
    };
    write_json(&p.out, "model.json", &model)?;
    write_json(&p.out, "report.json", &outcome.report)
}

fn forecast(c: ForecastCmd) -> Result<()> {
    let text = std::fs::read_to_string(&c.model).map_err(|e| Error::io(&c.model, e))?;
    let model: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("model file {}: {e}", c.model.display())))?;
    let mut cfg = base_config(&c.common, Some(&c.series))?;
    cfg.decomposer = model.decomposer.clone();
    cfg.sampler = model.sampler;
    cfg.split = model.split;
    cfg.gbt = model.gbt;
    let p = prepare(cfg)?;
    let series = p.config.series.load()?;
    let samples = extract(&series, &model.decomposer, &model.sampler, &p.ctx)?;
    let n = series.len();
    let points = forecast_aggregate(&model.models, &samples, &(1..=n))?;
    let ranges = split_chronological(&series, &model.split)?;

    // The next step uses the last `lag` values of each component of the
    // whole observed series, which is what every technique sees at t = N+1.
    let whole = p.ctx.whole(series.values(), &model.decomposer)?;
    if whole.n_components() != model.models.len() {
        return Err(Error::Shape(format!(
            "model has {} components but the decomposer produced {}",
            model.models.len(),
            whole.n_components()
        )));
    }
    let lag = model.sampler.lag;
    let next: f64 = model
        .models
        .iter()
        .zip(&whole.components)
        .map(|(m, comp)| m.predict_row(&comp[comp.len() - lag..]))
        .sum();

    let mut csv = String::from("t,date,period,observed,forecast\n");
    for pt in &points {
        let period = ranges.period_of(pt.t).map_or("", Period::as_str);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            pt.t,
            series.date_at(pt.t - 1),
            period,
            series.values()[pt.t - 1],
            pt.forecast
        ));
    }
    csv.push_str(&format!("{},{},next,,{}\n", n + 1, series.date_at(n), next));
    write(&p.out, "forecast.csv", csv)
}

fn grid_long_csv(result: &GridResult) -> String {
    let mut out = String::from("label,status");
    for p in Period::ALL {
        for m in ["nse", "rmse", "mae"] {
            out.push_str(&format!(",{}_{m}", p.as_str()));
        }
    }
    out.push_str(",optimal\n");
    for (i, row) in result.rows.iter().enumerate() {
        out.push_str(&format!("\"{}\"", row.label));
        match &row.report {
            Some(r) => {
                out.push_str(",ok");
                for p in Period::ALL {
                    let s = r.scores.get(p);
                    out.push_str(&format!(",{},{},{}", s.nse, s.rmse, s.mae));
                }
            }
            None => out.push_str(",failed,,,,,,,,,"),
        }
        out.push_str(if result.optimal == Some(i) { ",1\n" } else { ",0\n" });
    }
    out
}

fn grid(c: GridCmd) -> Result<()> {
    let mut cfg = base_config(&c.common, Some(&c.series))?;
    apply_grid(&mut cfg, c.grid);
    apply_sampler(&mut cfg, &c.sampler);
    apply_split(&mut cfg, &c.split);
    apply_gbt(&mut cfg, &c.gbt)?;
    let p = prepare(cfg)?;
    let spec = p
        .config
        .grid
        .clone()
        .ok_or_else(|| Error::Validation("no grid: pass --grid ssa|vmd or set \"grid\" in the config".into()))?;
    let result = grid_search(&p.config, &spec, &p.ctx)?;
    write_json(&p.out, "grid.json", &result)?;
    write(&p.out, "grid.csv", grid_long_csv(&result))?;
    write(&p.out, "grid_nse.csv", grid_nse_csv(&result))
}

fn compare_cmd(c: CompareCmd) -> Result<()> {
    let mut cfg = base_config(&c.common, Some(&c.series))?;
    if let Some(w) = c.ssa_window {
        cfg.compare.ssa.window = w;
    }
    if let Some(k) = c.vmd_modes {
        cfg.compare.vmd.modes = k;
    }
    if let Some(a) = c.vmd_alpha {
        cfg.compare.vmd.alpha = a;
    }
    apply_sampler(&mut cfg, &c.sampler);
    apply_split(&mut cfg, &c.split);
    apply_gbt(&mut cfg, &c.gbt)?;
    let p = prepare(cfg)?;
    let outcome = compare(&p.config, &p.ctx)?;
    write(&p.out, "comparison.csv", comparison_csv(&outcome))?;
    let reports: Vec<&MetricsReport> = outcome.outcomes.iter().map(|o| &o.report).collect();
    write_json(&p.out, "compare.json", &reports)?;
    if !c.no_plots {
        for o in &outcome.outcomes {
            let (obs, fc) = o.period_series(&outcome.series, Period::Validation);
            emit_plot(&obs, &fc, &p.out.join(format!("{}_validation.svg", o.report.label)))?;
        }
    }
    Ok(())
}

fn report_csv(report: &MetricsReport) -> String {
    let mut out = String::from("period,samples,nse,rmse,mae\n");
    let counts = [report.rows.calibration, report.rows.test, report.rows.validation];
    for (p, n) in Period::ALL.into_iter().zip(counts) {
        let s = report.scores.get(p);
        out.push_str(&format!("{},{n},{},{},{}\n", p.as_str(), s.nse, s.rmse, s.mae));
    }
    out
}

fn report(c: ReportCmd) -> Result<()> {
    let p = prepare(experiment_config(&c.train)?)?;
    let series = p.config.series.load()?;
    let label = stepcast_core::pipeline::experiment_label(&p.config.decomposer, p.config.sampler.technique);
    let outcome: ExperimentOutcome = evaluate(
        &label,
        &series,
        &p.config.split,
        &p.config.decomposer,
        &p.config.sampler,
        &p.config.gbt,
        &p.ctx,
    )?;
    write_json(&p.out, "report.json", &outcome.report)?;
    write(&p.out, "report.csv", report_csv(&outcome.report))?;
    if !c.no_plots {
        for period in Period::ALL {
            let (obs, fc) = outcome.period_series(&series, period);
            emit_plot(&obs, &fc, &p.out.join(format!("{label}_{}.svg", period.as_str())))?;
        }
    }
    Ok(())
}
