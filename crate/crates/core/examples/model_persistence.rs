//! Save a trained model to text, load it back and check the predictions
//! are bit-identical. Also scores a CSV through the loader.
//!
//! cargo run --example model_persistence

use karma::datagen::{generate, load_csv, save_csv, CsvOptions, GeneratorConfig};
use karma::learner::train_batch;
use karma::{KarmaModel, LossSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = GeneratorConfig::new(6, 2, 0.2, 200, 5);
    cfg.margin = 0.05;
    let (data, _) = generate(&cfg)?;
    let dir = std::env::temp_dir().join(format!("karma-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("data.csv");
    save_csv(&csv, 6, &data)?;
    let ds = load_csv(&csv, &CsvOptions::default())?;

    let model = train_batch(&ds.examples, 600, &TrainConfig::new(2, 0.01, LossSpec::hinge()), 0)?;
    let path = dir.join("model.txt");
    model.save(&path)?;
    let back = KarmaModel::load(&path)?;
    let same = ds
        .examples
        .iter()
        .all(|e| model.predict_default(&e.input).unwrap().to_bits() == back.predict_default(&e.input).unwrap().to_bits());
    println!("support {}  rounds {}  identical predictions: {same}", back.support().len(), back.rounds());
    println!("{}", std::fs::read_to_string(&path)?.lines().take(12).collect::<Vec<_>>().join("\n"));
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
