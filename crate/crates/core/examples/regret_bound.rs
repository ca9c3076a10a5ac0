//! Online run against the ground-truth comparator, with the three terms of
//! the regret bound. The automatic depth `⌈ln T / λ⌉` makes `Γ` and the
//! kernel values astronomically large, so the bound holds but says little;
//! a shallow fixed depth is shown next to it.
//!
//! cargo run --release --example regret_bound

use karma::datagen::{generate, GeneratorConfig};
use karma::evaluation::{regret_harness, RegretConfig};

fn main() -> karma::Result<()> {
    let mut cfg = GeneratorConfig::new(10, 2, 0.55, 1000, 3);
    cfg.margin = 0.05;
    let (data, truth) = generate(&cfg)?;
    for gamma in [None, Some(3)] {
        let cfg = RegretConfig {
            gamma,
            ..RegretConfig::default()
        };
        report(&regret_harness(&data, Some(&truth), &cfg)?);
    }
    Ok(())
}

fn report(rec: &karma::evaluation::RegretRecord) {
    println!("lambda {:.4} (singular {:.4}), gamma {}, rho {:.3e}", rec.lambda, rec.lambda_singular, rec.gamma, rec.rho);
    println!("algorithm loss {:.3e}  comparator loss {:.3}  regret {:.3e}", rec.algorithm_loss, rec.comparator_loss, rec.regret);
    println!(
        "bound {:.3e} = {:.3e} + {:.3e} + {:.3e}",
        rec.bound, rec.bound_optimization, rec.bound_regularization, rec.bound_approximation
    );
    for r in rec.per_round.iter().filter(|r| r.t % 200 == 0) {
        println!("t {:>4}: regret {:.3e}", r.t, r.regret);
    }
    println!();
}
