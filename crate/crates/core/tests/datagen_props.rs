mod common;

use std::path::Path;

use karma::datagen::{generate, read_csv, write_csv, CsvOptions, GeneratorConfig, GroundTruth, LabelRule, MaskSpec};
use karma::reference::DensePredictorF0;
use karma::regularity::check_regularity;
use karma::{Error, LabeledExample, ObservedVector};
use proptest::prelude::*;

fn example(d: usize) -> impl Strategy<Value = LabeledExample> {
    (
        prop::collection::vec(prop::option::weighted(0.6, prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO), d),
        prop_oneof![Just(1.0), Just(-1.0), -1e6f64..1e6],
    )
        .prop_map(|(cells, y)| LabeledExample::new(ObservedVector::from_options(&cells).unwrap(), y).unwrap())
}

fn dataset() -> impl Strategy<Value = (usize, Vec<LabeledExample>)> {
    (1usize..=6).prop_flat_map(|d| (Just(d), prop::collection::vec(example(d), 0..20)))
}

fn round_trip(d: usize, data: &[LabeledExample]) -> Vec<LabeledExample> {
    let mut buf = Vec::new();
    write_csv(&mut buf, d, data).unwrap();
    let opts = CsvOptions {
        rescale: false,
        ..CsvOptions::default()
    };
    let back = read_csv(buf.as_slice(), Path::new("mem.csv"), &opts).unwrap();
    assert_eq!(back.d, d);
    back.examples
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact((d, data) in dataset()) {
        let back = round_trip(d, &data);
        prop_assert_eq!(back.len(), data.len());
        for (a, b) in data.iter().zip(&back) {
            prop_assert_eq!(a.input.indices(), b.input.indices());
            for (x, y) in a.input.values().iter().zip(b.input.values()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            prop_assert_eq!(a.label.to_bits(), b.label.to_bits());
        }
    }

    #[test]
    fn margin_labels_agree_with_realizing_predictor(d in 3usize..=8, r in 1usize..=3, margin in 0.0f64..0.2, seed in 0u64..5_000) {
        let r = r.min(d - 1);
        let mut cfg = GeneratorConfig::new(d, r, 0.1, 40, seed);
        cfg.mask = MaskSpec::Keep { p: 0.8 };
        cfg.margin = margin;
        let (data, truth) = generate(&cfg).unwrap();
        let f0 = DensePredictorF0::realizing(&truth.wstar, truth.subspace.clone()).unwrap();
        for e in &data {
            let f = f0.predict(&e.input).unwrap();
            prop_assert!(e.label * f >= margin - 1e-9, "y {} f {f} margin {margin}", e.label);
        }
    }

    #[test]
    fn generated_data_is_regular_by_construction(d in 2usize..=8, r in 1usize..=3, lambda0 in 0.05f64..0.5, seed in 0u64..5_000) {
        let r = r.min(d);
        let mut cfg = GeneratorConfig::new(d, r, lambda0, 30, seed);
        cfg.mask = MaskSpec::Keep { p: 0.85 };
        let Ok((data, truth)) = generate(&cfg) else {
            // a subspace with no λ₀-regular pattern under this mask
            return Ok(());
        };
        let rep = check_regularity(&common::inputs(&data), Some(&truth.full_vectors), &truth.subspace, 1e-9).unwrap();
        prop_assert!(rep.is_regular());
        prop_assert!(rep.lambda >= lambda0 - 1e-9);
        prop_assert!(rep.max_observed_norm <= 1.0 + 1e-12);
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let bytes = |seed| {
        let mut cfg = GeneratorConfig::new(8, 2, 0.2, 200, seed);
        cfg.margin = 0.05;
        let (data, truth) = generate(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, 8, &data).unwrap();
        (buf, truth.to_toml().unwrap())
    };
    assert_eq!(bytes(11), bytes(11));
    assert_ne!(bytes(11).0, bytes(12).0);
}

#[test]
fn ground_truth_reloads_exactly() {
    let (_, truth) = common::synthetic(6, 2, 0.2, 25, 0.7, 0.0, 5);
    let back = GroundTruth::from_toml(&truth.to_toml().unwrap()).unwrap();
    assert_eq!(back, truth);
}

#[test]
fn regression_labels_track_clean_targets() {
    let mut cfg = GeneratorConfig::new(5, 2, 0.2, 300, 9);
    cfg.labels = LabelRule::Regression { noise: 0.0 };
    let (data, truth) = generate(&cfg).unwrap();
    for (e, t) in data.iter().zip(truth.clean_targets()) {
        assert_eq!(e.label, t);
    }
}

#[test]
fn fixed_patterns_are_the_only_patterns() {
    let mut cfg = GeneratorConfig::new(4, 1, 0.05, 100, 3);
    cfg.mask = MaskSpec::Patterns {
        patterns: vec![vec![0, 2], vec![1, 3]],
    };
    let (data, _) = generate(&cfg).unwrap();
    for e in &data {
        let p = e.input.indices();
        assert!(p == [0, 2] || p == [1, 3], "{p:?}");
    }
}

#[test]
fn unreachable_lambda_exhausts_the_budget() {
    // a rank-3 subspace needs at least three observed coordinates, so a
    // two-coordinate pattern never passes
    let mut cfg = GeneratorConfig::new(4, 3, 0.1, 5, 0);
    cfg.mask = MaskSpec::Patterns { patterns: vec![vec![0, 1]] };
    assert!(matches!(generate(&cfg), Err(Error::GeneratorExhausted { .. })));
}

#[test]
fn csv_accepts_label_anywhere_and_custom_missing() {
    let text = "label,a,b\n1,0.5,NA\n-1,,0.25\n";
    let opts = CsvOptions {
        missing: vec!["".into(), "NA".into()],
        ..CsvOptions::default()
    };
    let ds = read_csv(text.as_bytes(), Path::new("t.csv"), &opts).unwrap();
    assert_eq!(ds.feature_names, vec!["a", "b"]);
    assert_eq!(ds.examples[0].input.indices(), &[0]);
    assert_eq!(ds.examples[1].input.values(), &[0.25]);
    assert_eq!(ds.examples[1].label, -1.0);
}

#[test]
fn csv_errors_carry_row_and_column() {
    let text = "x0,x1,label\n0.1,0.2,1\n0.3,oops,1\n";
    match read_csv(text.as_bytes(), Path::new("bad.csv"), &CsvOptions::default()) {
        Err(Error::Csv { row, column, .. }) => {
            assert_eq!(row, 2);
            assert_eq!(column, "x1");
        }
        other => panic!("{other:?}"),
    }
    let nan = "x0,label\nNaN,1\n";
    assert!(read_csv(nan.as_bytes(), Path::new("nan.csv"), &CsvOptions::default()).is_err());
}
