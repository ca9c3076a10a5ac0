use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use karma::datagen::{load_csv, CsvOptions};
use karma::evaluation::evaluate;
use karma::{KarmaModel, LossSpec};

fn karma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_karma")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = karma(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn usage_and_parameter_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "d.csv");
    assert_eq!(karma(&["generate", "--d", "3", "--rank", "5", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(karma(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(karma(&["train", "--gamma", "x"]).status.code(), Some(2));
    assert_eq!(karma(&["generate", "--fixture", "nope", "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn missing_input_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = karma(&["train", "--data", s(&p(dir.path(), "absent.csv")), "--out", s(&p(dir.path(), "m.txt"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
}

#[test]
fn fixture_has_three_types_per_copy() {
    let dir = tempfile::tempdir().unwrap();
    let data = p(dir.path(), "m.csv");
    ok(&["generate", "--fixture", "matrix-m", "--per-type", "50", "--out", s(&data)]);
    let text = read(&data);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,x1,x2,x3,label"));
    assert_eq!(lines.count(), 150);
    assert!(p(dir.path(), "m.csv.run.toml").exists());
}

#[test]
fn gram_of_one_row_and_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let one = p(dir.path(), "one.csv");
    std::fs::write(&one, "x0,x1,label\n0.5,?,1\n").unwrap();
    let out = ok(&["gram", "--data", s(&one), "--gamma", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    // (1 + m + m²) · 0.25 with one shared coordinate
    assert_eq!(text.trim().parse::<f64>().unwrap(), 0.75);

    let data = p(dir.path(), "g.csv");
    ok(&["generate", "--d", "5", "--rank", "2", "--n", "12", "--seed", "3", "--out", s(&data)]);
    let gram = p(dir.path(), "g.gram.csv");
    ok(&["gram", "--data", s(&data), "--gamma", "2", "--out", s(&gram)]);
    let rows: Vec<Vec<String>> = read(&gram).lines().map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 12);
    let mut m = nalgebra::DMatrix::zeros(12, 12);
    for i in 0..12 {
        assert_eq!(rows[i].len(), 12);
        for j in 0..12 {
            assert_eq!(rows[i][j], rows[j][i]);
            m[(i, j)] = rows[i][j].parse::<f64>().unwrap();
        }
    }
    let eig = m.symmetric_eigenvalues();
    let max = eig.amax();
    assert!(eig.iter().all(|&e| e >= -1e-9 * max));
}

#[test]
fn predict_matches_in_process_and_handles_edges() {
    let dir = tempfile::tempdir().unwrap();
    let data = p(dir.path(), "d.csv");
    ok(&["generate", "--d", "6", "--rank", "2", "--n", "80", "--margin", "0.05", "--seed", "8", "--out", s(&data)]);
    let model = p(dir.path(), "m.txt");
    ok(&["train", "--data", s(&data), "--gamma", "2", "--rho", "0.01", "--epochs", "3", "--out", s(&model)]);
    let preds = p(dir.path(), "pred.csv");
    ok(&["predict", "--model", s(&model), "--data", s(&data), "--out", s(&preds)]);

    let m = KarmaModel::load(&model).unwrap();
    let ds = load_csv(&data, &CsvOptions::default()).unwrap();
    let expected = karma::cli::model_predictions(&m, &ds.examples).unwrap();
    let text = read(&preds);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("prediction,label"));
    let got: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(got.len(), expected.len());
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    let empty = p(dir.path(), "empty.csv");
    std::fs::write(&empty, "x0,x1,x2,x3,x4,x5,label\n").unwrap();
    let out = ok(&["predict", "--model", s(&model), "--data", s(&empty)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "prediction,label\n");

    let narrow = p(dir.path(), "narrow.csv");
    std::fs::write(&narrow, "x0,x1,label\n0.1,0.2,1\n").unwrap();
    assert!(!karma(&["predict", "--model", s(&model), "--data", s(&narrow)]).status.success());
}

#[test]
fn config_file_overrides_flags_and_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let data = p(dir.path(), "d.csv");
    let cfg = p(dir.path(), "gen.toml");
    std::fs::write(&cfg, "[generate]\nn = 17\nseed = 4\n").unwrap();
    ok(&["generate", "--config", s(&cfg), "--n", "99", "--d", "4", "--rank", "1", "--out", s(&data)]);
    assert_eq!(read(&data).lines().count(), 18);
    let log: toml::Table = read(&p(dir.path(), "d.csv.run.toml")).parse().unwrap();
    assert_eq!(log["command"].as_str(), Some("generate"));
    assert_eq!(log["generate"]["n"].as_integer(), Some(17));
    assert_eq!(log["generate"]["d"].as_integer(), Some(4));

    let bad = p(dir.path(), "bad.toml");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(karma(&["generate", "--config", s(&bad), "--out", s(&data)]).status.code(), Some(2));
}

#[test]
fn fixture_training_reaches_zero_hinge_loss() {
    let dir = tempfile::tempdir().unwrap();
    let data = p(dir.path(), "m.csv");
    ok(&["generate", "--fixture", "matrix-m", "--per-type", "50", "--out", s(&data)]);
    let model = p(dir.path(), "m.txt");
    ok(&["train", "--data", s(&data), "--gamma", "2", "--rho", "0.01", "--out", s(&model)]);
    let m = KarmaModel::load(&model).unwrap();
    assert!(m.uses_average());
    let ds = load_csv(&data, &CsvOptions::default()).unwrap();
    let metrics = evaluate(&m, &ds.examples, LossSpec::hinge()).unwrap();
    assert_eq!(metrics.mean_loss, 0.0, "{metrics:?}");
    assert!(p(dir.path(), "m.txt.log.csv").exists());
}

#[test]
fn holdout_selection_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = p(dir.path(), "d.csv");
    ok(&["generate", "--d", "6", "--rank", "2", "--n", "150", "--margin", "0.05", "--seed", "2", "--out", s(&data)]);
    let model = p(dir.path(), "m.txt");
    ok(&["train", "--data", s(&data), "--gamma-grid", "1,2,3", "--rho", "0.01", "--out", s(&model)]);
    let report: toml::Table = read(&p(dir.path(), "m.txt.report.toml")).parse().unwrap();
    let g = report["selected_gamma"].as_integer().unwrap();
    assert!((1..=3).contains(&g));
    assert_eq!(KarmaModel::load(&model).unwrap().gamma() as i64, g);

    let eval = p(dir.path(), "eval.toml");
    ok(&["evaluate", "--model", s(&model), "--data", s(&data), "--out", s(&eval)]);
    let e: toml::Table = read(&eval).parse().unwrap();
    assert_eq!(e["n"].as_integer(), Some(150));
}

#[test]
fn regularity_and_regret_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = p(dir.path(), "d.csv");
    ok(&["generate", "--d", "5", "--rank", "2", "--lambda0", "0.3", "--n", "200", "--margin", "0.05", "--seed", "6", "--out", s(&data)]);
    let truth = p(dir.path(), "d.csv.truth.toml");
    let reg = p(dir.path(), "reg.toml");
    let out = ok(&["check-regularity", "--data", s(&data), "--truth", s(&truth), "--out", s(&reg)]);
    assert!(!out.stdout.is_empty());
    let r: toml::Table = read(&reg).parse().unwrap();
    assert!(r["lambda"].as_float().unwrap() >= 0.3 - 1e-9);

    let rec = p(dir.path(), "regret.toml");
    ok(&["regret", "--data", s(&data), "--truth", s(&truth), "--out", s(&rec)]);
    let r: toml::Table = read(&rec).parse().unwrap();
    assert_eq!(r["within_bound"].as_bool(), Some(true));
    let curve = read(&p(dir.path(), "regret.toml.curve.csv"));
    assert_eq!(curve.lines().count(), 201);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let data = p(dir.path(), &format!("{tag}.csv"));
        let model = p(dir.path(), &format!("{tag}.txt"));
        ok(&["generate", "--d", "5", "--n", "60", "--seed", "1", "--out", s(&data)]);
        ok(&["train", "--data", s(&data), "--gamma", "2", "--epochs", "2", "--out", s(&model)]);
        (std::fs::read(&data).unwrap(), std::fs::read(&model).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}
