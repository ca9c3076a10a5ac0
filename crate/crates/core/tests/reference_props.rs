mod common;

use karma::kernel::{embed, embedding_inner_product, Sequences};
use karma::reference::{improper_weights, DensePredictorF0, DensePredictorFGamma, SubspaceSpec};
use karma::regularity::check_regularity;
use karma::{gamma_dims, ObservedVector};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// `A (Bᵀ A)⁻¹ Bᵀ`: idempotent, generally not symmetric.
fn oblique_projection(seed: u64, d: usize, r: usize) -> DMatrix<f64> {
    let mut rng = common::rng(seed);
    loop {
        let a = common::random_matrix(&mut rng, d, r);
        let b = common::random_matrix(&mut rng, d, r);
        if let Some(inv) = (b.transpose() * &a).try_inverse() {
            let q = &a * inv * b.transpose();
            if q.amax() < 50.0 {
                return q;
            }
        }
    }
}

/// `Σ_{s ⊆ o, |s| ≤ γ} w_{s_1} Q_{s_1 s_2} ⋯ Q_{s_{l−1} s_l} x_{s_l}` by
/// brute-force enumeration.
fn sequence_expansion(w: &[f64], q: &DMatrix<f64>, gamma: usize, x: &ObservedVector) -> f64 {
    Sequences::new(x.dim(), gamma)
        .filter(|s| s.iter().all(|&i| x.is_observed(i)))
        .map(|s| {
            let mut c = w[s[0]];
            for pair in s.windows(2) {
                c *= q[(pair[0], pair[1])];
            }
            c * x.get(*s.last().unwrap()).unwrap()
        })
        .sum()
}

proptest! {
    #[test]
    fn fgamma_equals_sequence_sum(d in 1usize..=4, r in 1usize..=4, g in 1usize..=3, seed in 0u64..10_000, oblique in any::<bool>()) {
        let r = r.min(d);
        let mut rng = common::rng(seed);
        let q = if oblique {
            oblique_projection(seed, d, r)
        } else {
            common::random_subspace(&mut rng, d, r).complement()
        };
        let w: Vec<f64> = (0..d).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let x = common::random_observed(&mut rng, d, 0.7);
        let f = DensePredictorFGamma::new(&w, q.clone(), g).unwrap().predict(&x).unwrap();
        let s = sequence_expansion(&w, &q, g, &x);
        prop_assert!((f - s).abs() <= 1e-9 * (1.0 + s.abs()), "{f} vs {s}");
    }

    #[test]
    fn improper_weights_reproduce_series(d in 1usize..=4, r in 1usize..=4, g in 1usize..=3, seed in 0u64..10_000) {
        let r = r.min(d);
        let mut rng = common::rng(seed);
        let q = common::random_subspace(&mut rng, d, r).complement();
        let w = common::random_unit_ball(&mut rng, d);
        let x = common::random_observed(&mut rng, d, 0.7);
        let v = improper_weights(&w, &q, g).unwrap();
        let lhs = embedding_inner_product(&v, &embed(&x, g).unwrap()).unwrap();
        let rhs = DensePredictorFGamma::new(&w, q, g).unwrap().predict(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
        let total = gamma_dims(d, g).unwrap().total;
        let wn = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!(v.norm() <= total.sqrt() * wn + 1e-9);
    }

    #[test]
    fn f0_realizes_on_subspace(d in 2usize..=8, r in 1usize..=4, seed in 0u64..10_000) {
        let r = r.min(d);
        let (data, truth) = common::synthetic(d, r, 0.05, 20, 0.8, 0.0, seed);
        let f0 = DensePredictorF0::realizing(&truth.wstar, truth.subspace.clone()).unwrap();
        for (e, t) in data.iter().zip(truth.clean_targets()) {
            let p = f0.predict(&e.input).unwrap();
            prop_assert!((p - t).abs() <= 1e-8, "{p} vs {t}");
        }
    }
}

#[test]
fn f0_rank_two_in_four_dims() {
    let mut rng = common::rng(3);
    let e = common::random_subspace(&mut rng, 4, 2);
    let wstar = vec![0.3, -0.5, 0.1, 0.4];
    let f0 = DensePredictorF0::realizing(&wstar, e.clone()).unwrap();
    let z = nalgebra::DVector::from_vec(vec![0.6, -0.2]);
    let x: Vec<f64> = (e.basis() * z).iter().copied().collect();
    let truth: f64 = x.iter().zip(&wstar).map(|(a, b)| a * b).sum();
    for pattern in [vec![0, 1], vec![1, 3], vec![0, 2, 3], vec![0, 1, 2, 3]] {
        let xo = ObservedVector::from_pattern(&x, &pattern).unwrap();
        assert!((f0.predict(&xo).unwrap() - truth).abs() <= 1e-8);
    }
}

/// Largest gap `|f^γ_{w,I−P_E} − f_{w,P_E}|` over random `w`, `x ∈ E`,
/// against `(1−μ)^γ/μ` with `μ` the smallest positive eigenvalue of
/// `(P_E)_{o,o}` over the sample.
#[test]
fn approximation_bound_with_eigen_lambda() {
    for seed in 0..40u64 {
        let (data, truth) = common::synthetic(6, 2, 0.3, 30, 0.7, 0.0, seed);
        let rep = check_regularity(&common::inputs(&data), Some(&truth.full_vectors), &truth.subspace, 1e-9).unwrap();
        let mu = rep.eigen_lambda;
        assert!((mu - rep.lambda * rep.lambda).abs() < 1e-10);
        let mut rng = common::rng(seed + 1000);
        let w = common::random_unit_ball(&mut rng, 6);
        let f0 = DensePredictorF0::new(&w, truth.subspace.clone()).unwrap();
        for g in 1..=10 {
            let fg = DensePredictorFGamma::complement_of(&w, &truth.subspace, g).unwrap();
            let bound = (1.0 - mu).powi(g as i32) / mu;
            for e in &data {
                let gap = (fg.predict(&e.input).unwrap() - f0.predict(&e.input).unwrap()).abs();
                assert!(gap <= bound + 1e-9, "seed {seed} γ {g}: {gap} > {bound}");
            }
        }
    }
}

/// `E = span((1,1)/√2)`, only coordinate 0 observed. The singular value of
/// `P_o P_E` is `1/√2` while `(P_E)_{o,o} = 1/2`. With `w = e_0`, `x = (1,1)`
/// and `γ = 1` the gap is exactly 1: the eigenvalue bound `(1−½)/½ = 1` is
/// tight and the singular-value reading `(1−1/√2)/(1/√2) ≈ 0.414` fails.
#[test]
fn approximation_bound_needs_eigenvalue_not_singular_value() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e = SubspaceSpec::from_columns(2, &[vec![s, s]]).unwrap();
    let x = ObservedVector::new(2, vec![0], vec![1.0]).unwrap();
    let rep = check_regularity(std::slice::from_ref(&x), Some(&[vec![1.0, 1.0]]), &e, 1e-9).unwrap();
    assert!(rep.is_regular());
    assert!((rep.lambda - s).abs() < 1e-12);
    assert!((rep.eigen_lambda - 0.5).abs() < 1e-12);

    let w = [1.0, 0.0];
    let f0 = DensePredictorF0::new(&w, e.clone()).unwrap().predict(&x).unwrap();
    let f1 = DensePredictorFGamma::complement_of(&w, &e, 1).unwrap().predict(&x).unwrap();
    let gap = (f1 - f0).abs();
    assert!((gap - 1.0).abs() < 1e-12);
    let eigen_bound = (1.0 - rep.eigen_lambda) / rep.eigen_lambda;
    let singular_bound = (1.0 - rep.lambda) / rep.lambda;
    assert!(gap <= eigen_bound + 1e-9);
    assert!(gap > singular_bound + 0.5);
}

#[test]
fn improper_weights_simple_cases() {
    let w = [0.2, -0.7, 0.4];
    let q = DMatrix::zeros(3, 3);
    let v = improper_weights(&w, &q, 2).unwrap();
    assert_eq!(&v.coords()[..3], &w);
    assert!(v.coords()[3..].iter().all(|&c| c == 0.0));
    let v1 = improper_weights(&w, &DMatrix::identity(3, 3), 1).unwrap();
    assert_eq!(v1.coords(), &w);
}

/// A restricted projection with two unit singular values; an SVD stopped at
/// the default tolerance misplaces the third one by about 4e-4 here.
#[test]
fn f0_with_repeated_unit_singular_values() {
    let (data, truth) = common::synthetic(7, 3, 0.05, 20, 0.8, 0.0, 1867);
    let f0 = DensePredictorF0::realizing(&truth.wstar, truth.subspace.clone()).unwrap();
    for (e, t) in data.iter().zip(truth.clean_targets()) {
        assert!((f0.predict(&e.input).unwrap() - t).abs() <= 1e-10);
    }
}
