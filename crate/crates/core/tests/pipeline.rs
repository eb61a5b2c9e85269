use stepcast_core::gbt::{GbtConfig, MatrixView};
use stepcast_core::metrics::nse;
use stepcast_core::pipeline::{
    compare, evaluate, forecast_aggregate, grid_nse_csv, grid_search, naive_baseline, run_experiment, comparison_csv,
    train_hybrid, ExperimentConfig, GridSpec, SeriesSource, COMPARE_MODELS,
};
use stepcast_core::sampling::{extract, Context, DecomposerSpec, SampleSet, SamplerConfig, Technique};
use stepcast_core::series::{generate_synthetic, split_chronological, Period, SplitSpec, SyntheticSpec, TimeSeries};
use stepcast_core::ssa::SsaConfig;
use stepcast_core::vmd::VmdConfig;

fn series(seed: u64, length: usize) -> TimeSeries {
    let mut spec = SyntheticSpec::preset("chaohu-like", seed).unwrap();
    spec.length = length;
    generate_synthetic(&spec).unwrap()
}

fn quick_gbt() -> GbtConfig {
    GbtConfig {
        n_estimators: 25,
        learning_rate: 0.1,
        ..GbtConfig::default()
    }
}

fn config(seed: u64, length: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(SeriesSource::Synthetic {
        preset: "chaohu-like".into(),
        seed,
        length: Some(length),
    });
    cfg.gbt = quick_gbt();
    cfg.sampler.warmup = 40;
    cfg
}

#[test]
fn passthrough_hybrid_is_the_naive_baseline() {
    let s = series(1, 260);
    let ctx = Context::new(2).unwrap();
    let split = SplitSpec::default();
    let naive = naive_baseline(&s, &split, 7, 40, &quick_gbt(), &ctx).unwrap();
    let hybrid = evaluate(
        "naive",
        &s,
        &split,
        &DecomposerSpec::PassThrough,
        &SamplerConfig::new(Technique::Sdb, 7, 40),
        &quick_gbt(),
        &ctx,
    )
    .unwrap();
    assert_eq!(naive.models, hybrid.models);
    assert_eq!(naive.forecasts, hybrid.forecasts);
    assert_eq!(naive.report.scores, hybrid.report.scores);
}

#[test]
fn one_model_per_component_and_aggregation_is_the_sum() {
    let s = series(2, 260);
    let ctx = Context::new(2).unwrap();
    let samples = extract(&s, &DecomposerSpec::Ssa(SsaConfig::new(3)), &SamplerConfig::new(Technique::Fsdb, 7, 40), &ctx).unwrap();
    let ranges = split_chronological(&s, &SplitSpec::default()).unwrap();
    let models = train_hybrid(&samples, &ranges, &quick_gbt(), &ctx).unwrap();
    assert_eq!(models.len(), 3);
    assert!(models.iter().all(|m| m.n_features == 7));

    let all = 1..=s.len();
    let agg = forecast_aggregate(&models, &samples, &all).unwrap();
    let per_component: Vec<Vec<f64>> = models
        .iter()
        .zip(&samples.components)
        .map(|(m, sm)| m.predict(MatrixView::new(&sm.x, sm.lag).unwrap()).unwrap())
        .collect();
    for (j, p) in agg.iter().enumerate() {
        let expected: f64 = per_component.iter().map(|c| c[j]).sum();
        assert_eq!(p.forecast, expected);
    }
}

#[test]
fn permuting_components_permutes_models() {
    let s = series(3, 260);
    let ctx = Context::new(2).unwrap();
    let samples = extract(&s, &DecomposerSpec::Ssa(SsaConfig::new(3)), &SamplerConfig::new(Technique::Fsdb, 7, 40), &ctx).unwrap();
    let ranges = split_chronological(&s, &SplitSpec::default()).unwrap();
    let models = train_hybrid(&samples, &ranges, &quick_gbt(), &ctx).unwrap();
    let reversed = SampleSet {
        technique: samples.technique,
        components: samples.components.iter().rev().cloned().collect(),
    };
    let rev_models = train_hybrid(&reversed, &ranges, &quick_gbt(), &ctx).unwrap();
    for (a, b) in models.iter().zip(rev_models.iter().rev()) {
        assert_eq!(a, b);
    }
    let all = 1..=s.len();
    let fa = forecast_aggregate(&models, &samples, &all).unwrap();
    let fb = forecast_aggregate(&rev_models, &reversed, &all).unwrap();
    for (a, b) in fa.iter().zip(&fb) {
        assert_eq!(a.t, b.t);
        assert!((a.forecast - b.forecast).abs() < 1e-12);
    }
}

#[test]
fn exact_targets_reproduce_observations_for_ssa_but_not_vmd() {
    let s = series(4, 300);
    let ctx = Context::new(2).unwrap();
    let sampler = SamplerConfig::new(Technique::Fsdb, 7, 100);
    let observed_at = |set: &SampleSet| set.times().iter().map(|&t| s.values()[t - 1]).collect::<Vec<_>>();

    let ssa = extract(&s, &DecomposerSpec::Ssa(SsaConfig::new(5)), &sampler, &ctx).unwrap();
    let score = nse(&observed_at(&ssa), &ssa.target_sums()).unwrap();
    assert!((score - 1.0).abs() < 1e-12, "{score}");

    let vmd = extract(&s, &DecomposerSpec::Vmd(VmdConfig::new(3, 2000.0)), &sampler, &ctx).unwrap();
    let score = nse(&observed_at(&vmd), &vmd.target_sums()).unwrap();
    assert!(score < 1.0, "{score}");
}

#[test]
fn stepwise_variants_share_row_counts_and_reports_are_deterministic() {
    let ctx = Context::new(2).unwrap();
    let mut cfg = config(1, 280);
    cfg.decomposer = DecomposerSpec::Ssa(SsaConfig::new(3));
    let fsdb = run_experiment(&cfg, &ctx).unwrap();
    cfg.sampler.technique = Technique::Sdb;
    let sdb = run_experiment(&cfg, &ctx).unwrap();
    assert_eq!(fsdb.rows, sdb.rows);
    assert_eq!(fsdb.label, "SSA-FSDB");
    assert_eq!(sdb.label, "SSA-SDB");
    assert!(fsdb.target_bias < 1e-9);
    assert!(sdb.target_bias > 0.0);

    let again = run_experiment(&cfg, &Context::new(1).unwrap()).unwrap();
    assert_eq!(serde_json::to_string(&sdb).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn kn_block_defaults_to_end_of_test_period() {
    let ctx = Context::new(2).unwrap();
    let mut cfg = config(5, 250);
    cfg.decomposer = DecomposerSpec::Ssa(SsaConfig::new(3));
    cfg.sampler.technique = Technique::Kn;
    let report = run_experiment(&cfg, &ctx).unwrap();
    assert_eq!(report.sampler.calib_end, Some(200));
}

#[test]
fn grid_rows_and_selection() {
    let ctx = Context::new(2).unwrap();
    let cfg = config(6, 240);
    let ssa = grid_search(&cfg, &GridSpec::Ssa { dl_min: 3, dl_max: 11 }, &ctx).unwrap();
    assert_eq!(ssa.rows.len(), 9);
    assert_eq!(ssa.ranking.len(), 9);
    let best = ssa.optimal_report().unwrap().scores.validation.nse;
    assert!(ssa.rows.iter().all(|r| r.report.as_ref().unwrap().scores.validation.nse <= best));
    let table = grid_nse_csv(&ssa);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 10);
    }

    let one = GridSpec::Vmd {
        k_min: 2,
        k_max: 2,
        k_step: 1,
        alpha_min: 500.0,
        alpha_max: 500.0,
        alpha_step: 100.0,
    };
    let single = grid_search(&cfg, &one, &ctx).unwrap();
    assert_eq!(single.rows.len(), 1);
    assert_eq!(single.optimal, Some(0));
}

#[test]
fn grid_records_failing_points() {
    let ctx = Context::new(1).unwrap();
    let mut cfg = config(7, 200);
    // Windows above 20 need a longer warm-up than 40 and fail validation.
    cfg.sampler.warmup = 40;
    let r = grid_search(&cfg, &GridSpec::Ssa { dl_min: 19, dl_max: 21 }, &ctx).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.rows[0].report.is_some());
    assert!(r.rows[2].report.is_none() && r.rows[2].error.is_some());
    assert_eq!(r.optimal, Some(r.ranking[0]));
}

#[test]
fn compare_table_has_five_rows_and_nine_cells() {
    let ctx = Context::new(2).unwrap();
    let mut cfg = config(8, 260);
    cfg.sampler.warmup = 100;
    let out = compare(&cfg, &ctx).unwrap();
    let labels: Vec<&str> = out.outcomes.iter().map(|o| o.report.label.as_str()).collect();
    assert_eq!(labels, COMPARE_MODELS);
    let csv = comparison_csv(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("model,calibration_nse,calibration_rmse,calibration_mae,test_nse"));
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 10);
        assert!(cells[1..].iter().all(|c| c.parse::<f64>().unwrap().is_finite()));
    }
    for o in &out.outcomes {
        for p in Period::ALL {
            let (obs, fc) = o.period_series(&out.series, p);
            assert_eq!(obs.len(), fc.len());
            assert!(!obs.is_empty());
        }
    }
}
