//! Three instance types on four columns, two of them partially observed.
//! Trains depth 1 and depth 2 and reports the training hinge loss of the
//! averaged model.
//!
//! cargo run --example matrix_m

use karma::datagen::matrix_m_fixture;
use karma::evaluation::evaluate;
use karma::learner::train_batch;
use karma::{LossSpec, TrainConfig};

fn main() -> karma::Result<()> {
    let data = matrix_m_fixture(50);
    for gamma in [1, 2] {
        let cfg = TrainConfig::new(gamma, 0.01, LossSpec::hinge());
        for rounds in [10, 50, 150] {
            let model = train_batch(&data, rounds, &cfg, 0)?;
            let m = evaluate(&model, &data, LossSpec::hinge())?;
            println!("gamma {gamma} rounds {rounds:>3}: hinge {:.4} error {:.3}", m.mean_loss, m.zero_one_error);
        }
    }
    Ok(())
}
