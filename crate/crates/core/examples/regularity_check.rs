//! Per-pattern regularity diagnostics of a generated dataset against its
//! ground-truth subspace.
//!
//! cargo run --example regularity_check

use karma::datagen::{generate, GeneratorConfig, MaskSpec};
use karma::regularity::check_regularity;
use karma::ObservedVector;

fn main() -> karma::Result<()> {
    let mut cfg = GeneratorConfig::new(6, 2, 0.3, 300, 2);
    cfg.mask = MaskSpec::Patterns {
        patterns: vec![vec![0, 1, 2], vec![2, 3, 4, 5], vec![0, 5]],
    };
    let (data, truth) = generate(&cfg)?;
    let xs: Vec<ObservedVector> = data.iter().map(|e| e.input.clone()).collect();
    let rep = check_regularity(&xs, Some(&truth.full_vectors), &truth.subspace, 1e-9)?;
    print!("{}", rep.to_table());
    Ok(())
}
