use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stepcast_core::components::reconstruction_error;
use stepcast_core::ssa::{diagonal_average_rank1, ssa_decompose, trajectory_matrix, SsaConfig};

fn range(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn sum_components(components: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; components[0].len()];
    for c in components {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v;
        }
    }
    out
}

/// Hankelization by walking every anti-diagonal cell of an explicit matrix.
fn brute_force_hankelize(m: &DMatrix<f64>) -> Vec<f64> {
    let (l, k) = m.shape();
    (0..l + k - 1)
        .map(|t| {
            let cells: Vec<f64> = (0..l).filter(|&i| t >= i && t - i < k).map(|i| m[(i, t - i)]).collect();
            cells.iter().sum::<f64>() / cells.len() as f64
        })
        .collect()
}

/// Elementary components computed from a dense SVD of the trajectory matrix.
fn svd_components(values: &[f64], window: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let rows = trajectory_matrix(values, window);
    let k = rows[0].len();
    let x = DMatrix::from_fn(window, k, |i, j| rows[i][j]);
    let svd = x.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let comps = idx
        .iter()
        .map(|&i| {
            let rank1 = u.column(i) * vt.row(i) * svd.singular_values[i];
            brute_force_hankelize(&rank1)
        })
        .collect();
    (sv, comps)
}

#[test]
fn ramp_has_two_nonzero_components() {
    let ramp = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let cs = ssa_decompose(&ramp, &SsaConfig::new(3)).unwrap();
    let (oracle_sv, oracle) = svd_components(&ramp, 3);
    let sv = cs.singular_values.as_ref().unwrap();
    for (a, b) in sv.iter().zip(&oracle_sv) {
        assert!((a - b).abs() < 1e-9, "{sv:?} vs {oracle_sv:?}");
    }
    let energy: Vec<f64> = cs.components.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    assert!(energy[0] > 1.0 && energy[1] > 1e-6, "{energy:?}");
    assert!(energy[2] < 1e-20, "{energy:?}");
    for (ours, theirs) in cs.components.iter().zip(&oracle).take(2) {
        for (a, b) in ours.iter().zip(theirs) {
            assert!((a - b).abs() < 1e-9, "{ours:?} vs {theirs:?}");
        }
    }
    for (s, r) in sum_components(&cs.components).iter().zip(ramp) {
        assert!((s - r).abs() < 1e-12);
    }
}

#[test]
fn components_match_dense_svd_on_random_short_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.random_range(6..=12);
        let window = rng.random_range(2..=n / 2);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let cs = ssa_decompose(&values, &SsaConfig::new(window)).unwrap();
        let (oracle_sv, oracle) = svd_components(&values, window);
        // Random data has well separated singular values, so the pairing is unambiguous.
        for (k, (ours, theirs)) in cs.components.iter().zip(&oracle).enumerate() {
            for (a, b) in ours.iter().zip(theirs) {
                assert!((a - b).abs() < 1e-8, "component {k}: {ours:?} vs {theirs:?} (sv {oracle_sv:?})");
            }
        }
    }
}

#[test]
fn rank_one_averaging_matches_brute_force_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let l = rng.random_range(1..=6);
        let k = rng.random_range(1..=7);
        let u: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(-10.0..10.0)).collect();
        let m = DMatrix::from_fn(l, k, |i, j| u[i] * w[j]);
        assert_eq!(diagonal_average_rank1(&u, &w), brute_force_hankelize(&m));
    }
}

#[test]
fn random_series_reconstruct_for_all_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..5 {
        let values: Vec<f64> = (0..500).map(|_| rng.random_range(-3.0..3.0)).collect();
        let tol = 1e-9 * range(&values);
        for window in 3..=11 {
            let cs = ssa_decompose(&values, &SsaConfig::new(window)).unwrap();
            assert_eq!(cs.n_components(), window);
            let sum = cs.reconstruct().unwrap();
            let err = sum.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < tol, "window {window}: {err}");
            assert!(reconstruction_error(&values, &cs).unwrap() < tol);
        }
    }
}

fn series_strategy() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (2usize..=8).prop_flat_map(|window| (prop::collection::vec(-100.0f64..100.0, 2 * window..60), Just(window)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction_is_exact((values, window) in series_strategy()) {
        let cs = ssa_decompose(&values, &SsaConfig::new(window)).unwrap();
        let r = range(&values).max(1e-300);
        let sum = cs.reconstruct().unwrap();
        for (a, b) in sum.iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-9 * r.max(1.0));
        }
    }

    #[test]
    fn energies_do_not_increase((values, window) in series_strategy()) {
        let cs = ssa_decompose(&values, &SsaConfig::new(window)).unwrap();
        let sv = cs.singular_values.unwrap();
        for pair in sv.windows(2) {
            prop_assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn scaling_scales_the_leading_component(
        (values, window) in series_strategy(),
        c in prop_oneof![0.1f64..10.0, -10.0f64..-0.1],
    ) {
        let base = ssa_decompose(&values, &SsaConfig::new(window)).unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let cs = ssa_decompose(&scaled, &SsaConfig::new(window)).unwrap();
        let sv = base.singular_values.as_ref().unwrap();
        // Elementary components are sign-free; compare the leading one when it
        // is separated from the next, otherwise the whole sum.
        let separated = sv.len() < 2 || sv[0] - sv[1] > 1e-3 * sv[0];
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0) * c.abs();
        if separated {
            for (a, b) in cs.components[0].iter().zip(&base.components[0]) {
                prop_assert!((a - c * b).abs() <= 1e-8 * scale);
            }
        }
        let total = cs.reconstruct().unwrap();
        for (a, b) in total.iter().zip(&values) {
            prop_assert!((a - c * b).abs() <= 1e-8 * scale);
        }
    }
}
