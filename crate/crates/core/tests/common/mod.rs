#![allow(dead_code)]

use karma::datagen::{generate, GeneratorConfig, MaskSpec};
use karma::reference::SubspaceSpec;
use karma::{LabeledExample, ObservedVector};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random vector with each coordinate observed with probability `keep`,
/// values uniform in [-1, 1].
pub fn random_observed<R: Rng>(rng: &mut R, d: usize, keep: f64) -> ObservedVector {
    let mut idx = Vec::new();
    let mut vals = Vec::new();
    for i in 0..d {
        if rng.random::<f64>() < keep {
            idx.push(i);
            vals.push(rng.random_range(-1.0..1.0));
        }
    }
    ObservedVector::new(d, idx, vals).unwrap()
}

pub fn random_stream<R: Rng>(rng: &mut R, d: usize, n: usize, keep: f64) -> Vec<LabeledExample> {
    (0..n)
        .map(|_| {
            let x = random_observed(rng, d, keep);
            let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
            LabeledExample::new(x, y).unwrap()
        })
        .collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_unit_ball<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let r: f64 = rng.random();
    v.iter().map(|a| a * r / n.max(1e-300)).collect()
}

pub fn random_subspace<R: Rng>(rng: &mut R, d: usize, r: usize) -> SubspaceSpec {
    SubspaceSpec::random(d, r, rng).unwrap()
}

pub fn synthetic(d: usize, rank: usize, lambda0: f64, n: usize, keep: f64, margin: f64, seed: u64) -> (Vec<LabeledExample>, karma::datagen::GroundTruth) {
    let mut cfg = GeneratorConfig::new(d, rank, lambda0, n, seed);
    cfg.mask = MaskSpec::Keep { p: keep };
    cfg.margin = margin;
    generate(&cfg).unwrap()
}

pub fn inputs(data: &[LabeledExample]) -> Vec<ObservedVector> {
    data.iter().map(|e| e.input.clone()).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
