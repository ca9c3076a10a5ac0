//! A truncated power series in the complement projection, written as one
//! weight vector in the embedding space, approaches the pseudo-inverse
//! predictor as the depth grows.
//!
//! cargo run --example improper_weights

use karma::datagen::{generate, GeneratorConfig};
use karma::reference::improper_weights;
use karma::regularity::check_regularity;
use karma::{embed, embedding_inner_product, DensePredictorF0, DensePredictorFGamma, ObservedVector};

fn main() -> karma::Result<()> {
    let (data, truth) = generate(&GeneratorConfig::new(5, 2, 0.3, 50, 1))?;
    let xs: Vec<ObservedVector> = data.iter().map(|e| e.input.clone()).collect();
    let rep = check_regularity(&xs, None, &truth.subspace, 1e-9)?;
    let mu = rep.eigen_lambda;
    let f0 = DensePredictorF0::realizing(&truth.wstar, truth.subspace.clone())?;
    let w = f0.weights().as_slice().to_vec();
    let q = truth.subspace.complement();
    println!("smallest restricted eigenvalue {mu:.4}");
    for gamma in 1..=8 {
        let v = improper_weights(&w, &q, gamma)?;
        let fg = DensePredictorFGamma::new(&w, q.clone(), gamma)?;
        let mut gap = 0.0f64;
        let mut series = 0.0f64;
        for x in &xs {
            let via_v = embedding_inner_product(&v, &embed(x, gamma)?)?;
            series = series.max((via_v - fg.predict(x)?).abs());
            gap = gap.max((via_v - f0.predict(x)?).abs());
        }
        let bound = (1.0 - mu).powi(gamma as i32) / mu;
        println!("gamma {gamma}: |v| {:.3}  series mismatch {series:.1e}  gap {gap:.4}  bound {bound:.4}", v.norm());
    }
    Ok(())
}
