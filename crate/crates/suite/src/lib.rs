//! Seeded fixtures shared by the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stepcast_core::pipeline::COMPARE_MODELS;
use stepcast_core::series::TimeSeries;

/// Max minus min.
pub fn range(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Independent draws from U(-10, 10).
pub fn uniform_series(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-10.0..10.0)).collect()
}

/// Random walk starting at 10 with U(-0.5, 0.5) steps.
pub fn random_walk(seed: u64, n: usize) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = 10.0;
    let values = (0..n)
        .map(|_| {
            level += rng.random_range(-0.5..0.5);
            level
        })
        .collect();
    TimeSeries::from_values(values).expect("finite walk")
}

/// Unit cosine at `freq` cycles per sample.
pub fn tone(freq: f64, n: usize) -> Vec<f64> {
    (0..n).map(|t| (std::f64::consts::TAU * freq * t as f64).cos()).collect()
}

/// Tones at 0.05 and 0.25 cycles per sample, N = 1000.
pub fn two_tones() -> Vec<f64> {
    tone(0.05, 1000).iter().zip(tone(0.25, 1000)).map(|(a, b)| a + b).collect()
}

/// Pearson correlation with 5% trimmed from each end.
pub fn interior_corr(a: &[f64], b: &[f64]) -> f64 {
    let cut = a.len() / 20;
    let (a, b) = (&a[cut..a.len() - cut], &b[cut..b.len() - cut]);
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Header plus one row per comparison model, each with nine finite metrics.
pub fn table_well_formed(csv: &str) -> bool {
    let lines: Vec<&str> = csv.lines().collect();
    lines.len() == COMPARE_MODELS.len() + 1
        && lines[0].split(',').count() == 10
        && lines[1..].iter().zip(COMPARE_MODELS).all(|(l, name)| {
            let cells: Vec<&str> = l.split(',').collect();
            cells.len() == 10
                && cells[0] == name
                && cells[1..].iter().all(|c| c.parse::<f64>().is_ok_and(f64::is_finite))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_seeded() {
        assert_eq!(uniform_series(3, 20), uniform_series(3, 20));
        assert_ne!(uniform_series(3, 20), uniform_series(4, 20));
        assert_eq!(random_walk(1, 50).values(), random_walk(1, 50).values());
    }

    #[test]
    fn helpers_on_small_inputs() {
        assert_eq!(range(&[2.0, -1.0, 5.0]), 6.0);
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        let t = tone(0.05, 400);
        assert!((interior_corr(&t, &t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_tables_are_detected() {
        let header = "model,a,b,c,d,e,f,g,h,i";
        let row = |m: &str| format!("{m},1,1,1,1,1,1,1,1,1");
        let good: Vec<String> = std::iter::once(header.to_string()).chain(COMPARE_MODELS.iter().map(|m| row(m))).collect();
        assert!(table_well_formed(&good.join("\n")));
        let mut bad = good.clone();
        bad[2] = format!("{},NaN,1,1,1,1,1,1,1,1", COMPARE_MODELS[1]);
        assert!(!table_well_formed(&bad.join("\n")));
        assert!(!table_well_formed(&good[..5].join("\n")));
    }
}
