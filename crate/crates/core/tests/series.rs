use std::io::Cursor;

use proptest::prelude::*;
use stepcast_core::series::{
    default_start_date, read_csv, split_len, summary_stats, write_csv, Period, SplitSpec, SyntheticSpec, TimeSeries,
};

proptest! {
    #[test]
    fn csv_round_trip_is_identity(
        values in prop::collection::vec(-1e6f64..1e6, 1..200),
        offset in 0i64..5000,
    ) {
        let start = default_start_date() + chrono::Days::new(offset as u64);
        let s = TimeSeries::new("s", start, values).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let back = read_csv(Cursor::new(buf), "s").unwrap();
        prop_assert_eq!(back.values(), s.values());
        prop_assert_eq!(back.start_date(), s.start_date());
    }

    #[test]
    fn split_ranges_partition_the_series(
        n in 5usize..5000,
        calib in 0.2f64..0.8,
        test_share in 0.1f64..0.9,
    ) {
        let test = (1.0 - calib) * test_share;
        let spec = SplitSpec { calib_frac: calib, test_frac: test, valid_frac: 1.0 - calib - test };
        if let Ok(r) = split_len(n, &spec) {
            let mut seen = Vec::new();
            for p in Period::ALL {
                let range = r.range(p);
                prop_assert!(!range.is_empty());
                seen.extend(range.clone());
            }
            prop_assert_eq!(seen, (1..=n).collect::<Vec<_>>());
            for t in [1, n / 2 + 1, n] {
                prop_assert!(r.period_of(t).is_some());
            }
        }
    }

    #[test]
    fn generator_is_a_pure_function(seed in 0u64..10_000, length in 1usize..400) {
        let mut spec = SyntheticSpec::preset("taoxi-like", seed).unwrap();
        spec.length = length;
        let a = stepcast_core::series::generate_synthetic(&spec).unwrap();
        let b = stepcast_core::series::generate_synthetic(&spec).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert_eq!(a.len(), length);
    }
}

#[test]
fn csv_examples() {
    let ok = "date,value\n2007-01-01,28.5\n2007-01-02,28.6\n";
    assert_eq!(read_csv(Cursor::new(ok), "x").unwrap().values(), &[28.5, 28.6]);
    let gap = "date,value\n2007-01-01,28.5\n2007-01-03,28.6\n";
    let err = read_csv(Cursor::new(gap), "x").unwrap_err();
    assert!(matches!(err, stepcast_core::Error::Ingestion { row: 3, .. }), "{err}");
    let nan = "date,value\n2007-01-01,NaN\n";
    assert!(matches!(read_csv(Cursor::new(nan), "x"), Err(stepcast_core::Error::Ingestion { .. })));
}

#[test]
fn summary_examples() {
    let s = summary_stats(&[1.0, 3.0]);
    assert_eq!((s.min, s.max, s.mean, s.std), (1.0, 3.0, 2.0, 1.0));
    let s = summary_stats(&[2.0, 2.0, 2.0]);
    assert_eq!((s.min, s.max, s.mean, s.std), (2.0, 2.0, 2.0, 0.0));
    let s = summary_stats(&[5.0]);
    assert_eq!((s.min, s.max, s.mean, s.std), (5.0, 5.0, 5.0, 0.0));
}

#[test]
fn presets_have_the_standard_length() {
    for name in stepcast_core::series::PRESET_NAMES {
        let spec = SyntheticSpec::preset(name, 1).unwrap();
        assert_eq!(spec.length, 3653);
        let s = stepcast_core::series::generate_synthetic(&spec).unwrap();
        assert!(s.values().iter().all(|v| v.is_finite()));
    }
    assert!(SyntheticSpec::preset("nowhere-like", 1).is_err());
}
