//! Generate a low-rank dataset with missing entries, pick the depth on a
//! holdout split and compare against imputation baselines on a test set.
//!
//! cargo run --release --example synthetic_pipeline

use karma::datagen::{generate, GeneratorConfig};
use karma::evaluation::{evaluate, holdout_select_gamma, mean_impute_baseline, split_holdout, zero_impute_baseline};
use karma::{LossSpec, TrainConfig};

fn main() -> karma::Result<()> {
    let mut cfg = GeneratorConfig::new(20, 3, 0.2, 2500, 7);
    cfg.margin = 0.1;
    let (data, _truth) = generate(&cfg)?;
    let (train, test) = data.split_at(2000);
    let (fit, holdout) = split_holdout(train, 0.2, 0)?;

    let tc = TrainConfig::new(1, 1e-3, LossSpec::hinge());
    let rounds = 5 * fit.len();
    let (model, report) = holdout_select_gamma(&fit, &holdout, &[1, 2, 3, 4], &tc, rounds, 0)?;
    for s in &report.per_gamma {
        println!("gamma {}: holdout hinge {:.4}", s.gamma, s.holdout.mean_loss);
    }
    let hinge = LossSpec::hinge();
    let ours = evaluate(&model, test, hinge)?;
    let zero = evaluate(&zero_impute_baseline(&fit, rounds, &tc, 0)?, test, hinge)?;
    let mean = evaluate(&mean_impute_baseline(&fit, rounds, &tc, 0)?, test, hinge)?;
    println!("selected gamma {}", report.selected_gamma);
    println!("test error: kernel {:.3}  zero-impute {:.3}  mean-impute {:.3}", ours.zero_one_error, zero.zero_one_error, mean.zero_one_error);
    Ok(())
}
