//! The missing-data kernel and its explicit feature map.
//!
//! Coordinates of the feature space are indexed by the non-empty sequences
//! `s = (s_1, …, s_l)` over `{0, …, d−1}` with `l ≤ γ`. A partially observed
//! vector `x_o` maps to `x_{s_l}` on every sequence whose elements are all
//! observed and to 0 elsewhere. Two such vectors then share one coordinate
//! per sequence over their common observed set that ends in a given index,
//! which gives the closed form
//!
//! ```text
//! k_γ(a, b) = (1 + m + m² + … + m^{γ−1}) · Σ_{k ∈ o_a ∩ o_b} a_k b_k,   m = |o_a ∩ o_b|
//! ```
//!
//! [`kernel`] evaluates that in `O(|o_a| + |o_b|)`. [`embed`] materializes
//! the feature map itself for small `Γ` and is only meant as a test oracle.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dims::{gamma_dims, GammaDims};
use crate::error::{Error, Result};
use crate::observed::{common_dim, ObservedVector};

/// Default ceiling on `Γ` for explicit embeddings.
pub const DEFAULT_EMBED_CAP: usize = 1_000_000;

/// `Σ_{l=0}^{γ−1} m^l`, evaluated by Horner's rule.
///
/// Equals `(m^γ − 1)/(m − 1)` for `m ≥ 2` and `γ` for `m = 1`, without the
/// removable singularity. Saturates to `+∞` like the closed form would.
pub fn overlap_factor(m: usize, gamma: usize) -> f64 {
    let m = m as f64;
    let mut acc = 0.0;
    for _ in 0..gamma {
        acc = acc * m + 1.0;
    }
    acc
}

/// `k_γ(a, b) = φ_γ(a) · φ_γ(b)`.
pub fn kernel(a: &ObservedVector, b: &ObservedVector, gamma: usize) -> Result<f64> {
    check_gamma(gamma)?;
    let (m, dot) = a.overlap(b)?;
    Ok(raw_kernel(m, dot, gamma))
}

#[inline]
fn raw_kernel(m: usize, dot: f64, gamma: usize) -> f64 {
    if m == 0 {
        0.0
    } else {
        overlap_factor(m, gamma) * dot
    }
}

fn check_gamma(gamma: usize) -> Result<()> {
    if gamma == 0 {
        Err(Error::param("gamma must be at least 1"))
    } else {
        Ok(())
    }
}

/// Kernel configuration: depth and whether to use the cosine-normalized form
/// `k(a,b)/√(k(a,a) k(b,b))`. Normalization is off unless asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingDataKernel {
    pub gamma: usize,
    #[serde(default)]
    pub normalized: bool,
}

impl MissingDataKernel {
    pub fn new(gamma: usize) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self {
            gamma,
            normalized: false,
        })
    }

    pub fn normalized(gamma: usize) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self {
            gamma,
            normalized: true,
        })
    }

    pub fn eval(&self, a: &ObservedVector, b: &ObservedVector) -> Result<f64> {
        a.check_dim(b.dim())?;
        Ok(self.eval_unchecked(a, b))
    }

    /// Assumes equal dimensions.
    pub(crate) fn eval_unchecked(&self, a: &ObservedVector, b: &ObservedVector) -> f64 {
        let (m, dot) = a.overlap_unchecked(b);
        let k = raw_kernel(m, dot, self.gamma);
        if !self.normalized || k == 0.0 {
            return k;
        }
        let na = self.self_similarity_raw(a);
        let nb = self.self_similarity_raw(b);
        k / (na * nb).sqrt()
    }

    fn self_similarity_raw(&self, x: &ObservedVector) -> f64 {
        raw_kernel(x.n_observed(), x.values().iter().map(|v| v * v).sum(), self.gamma)
    }

    /// `k(x, x) = ‖φ(x)‖²`.
    pub fn self_similarity(&self, x: &ObservedVector) -> f64 {
        let k = self.self_similarity_raw(x);
        if self.normalized && k > 0.0 {
            1.0
        } else {
            k
        }
    }
}

/// Dense Gram matrix `G_ij = k_γ(x_i, x_j)`.
pub fn gram(examples: &[ObservedVector], gamma: usize) -> Result<DMatrix<f64>> {
    gram_with(examples, &MissingDataKernel::new(gamma)?)
}

/// Gram matrix for an arbitrary kernel configuration. Rows are filled in
/// parallel; every entry is computed independently, so the result does not
/// depend on the thread count.
pub fn gram_with(examples: &[ObservedVector], kernel: &MissingDataKernel) -> Result<DMatrix<f64>> {
    common_dim(examples)?;
    let n = examples.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| kernel.eval_unchecked(&examples[i], &examples[j]))
                .collect()
        })
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let j = i + offset;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// A vector of `R^Γ` with coordinates indexed by sequences.
///
/// Sequences are ordered by length, then lexicographically, so the
/// coordinate of `s` of length `l` sits at `d + … + d^{l−1} + Σ s_i d^{l−i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitEmbedding {
    dims: GammaDims,
    coords: Vec<f64>,
}

impl ExplicitEmbedding {
    pub fn zeros(d: usize, gamma: usize, cap: usize) -> Result<Self> {
        let dims = gamma_dims(d, gamma)?;
        let len = dims
            .as_usize()
            .filter(|&n| n <= cap)
            .ok_or(Error::EmbeddingTooLarge {
                total: dims.total,
                cap,
            })?;
        Ok(Self {
            dims,
            coords: vec![0.0; len],
        })
    }

    pub fn dims(&self) -> GammaDims {
        self.dims
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    /// Coordinate of sequence `seq`; `None` for an invalid sequence.
    pub fn coord(&self, seq: &[usize]) -> Option<f64> {
        sequence_index(self.dims.d, self.dims.gamma, seq).map(|i| self.coords[i])
    }

    pub fn set(&mut self, seq: &[usize], value: f64) -> Result<()> {
        let i = sequence_index(self.dims.d, self.dims.gamma, seq)
            .ok_or_else(|| Error::param(format!("sequence {seq:?} is not a coordinate")))?;
        self.coords[i] = value;
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Sequences in coordinate order paired with their values.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        Sequences::new(self.dims.d, self.dims.gamma).zip(self.coords.iter().copied())
    }

    pub fn add_scaled(&mut self, other: &ExplicitEmbedding, factor: f64) -> Result<()> {
        self.check_dims(other)?;
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.coords.iter_mut().for_each(|c| *c *= factor);
    }

    fn check_dims(&self, other: &ExplicitEmbedding) -> Result<()> {
        if self.dims.d != other.dims.d {
            return Err(Error::DimensionMismatch {
                expected: self.dims.d,
                found: other.dims.d,
            });
        }
        if self.dims.gamma != other.dims.gamma {
            return Err(Error::param(format!(
                "embedding depths differ: {} vs {}",
                self.dims.gamma, other.dims.gamma
            )));
        }
        Ok(())
    }
}

/// Position of `seq` in the length-then-lexicographic coordinate order.
pub fn sequence_index(d: usize, gamma: usize, seq: &[usize]) -> Option<usize> {
    let len = seq.len();
    if len == 0 || len > gamma || seq.iter().any(|&s| s >= d) {
        return None;
    }
    let mut offset = 0usize;
    let mut block = 1usize;
    for _ in 1..len {
        block = block.checked_mul(d)?;
        offset = offset.checked_add(block)?;
    }
    let within = seq
        .iter()
        .try_fold(0usize, |acc, &s| acc.checked_mul(d)?.checked_add(s))?;
    offset.checked_add(within)
}

/// All sequences of length 1..=gamma over `0..d`, in coordinate order.
#[derive(Debug, Clone)]
pub struct Sequences {
    d: usize,
    gamma: usize,
    current: Vec<usize>,
    done: bool,
}

impl Sequences {
    pub fn new(d: usize, gamma: usize) -> Self {
        Self {
            d,
            gamma,
            current: Vec::new(),
            done: d == 0 || gamma == 0,
        }
    }
}

impl Iterator for Sequences {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.current.is_empty() {
            self.current.push(0);
            return Some(self.current.clone());
        }
        // odometer increment; on wrap, move to the next length
        let mut pos = self.current.len();
        while pos > 0 {
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.d {
                return Some(self.current.clone());
            }
            self.current[pos] = 0;
        }
        if self.current.len() == self.gamma {
            self.done = true;
            return None;
        }
        self.current = vec![0; self.current.len() + 1];
        Some(self.current.clone())
    }
}

/// Materializes `φ_γ(x)` with the default cap on `Γ`.
pub fn embed(x: &ObservedVector, gamma: usize) -> Result<ExplicitEmbedding> {
    embed_with_cap(x, gamma, DEFAULT_EMBED_CAP)
}

pub fn embed_with_cap(x: &ObservedVector, gamma: usize, cap: usize) -> Result<ExplicitEmbedding> {
    let mut out = ExplicitEmbedding::zeros(x.dim(), gamma, cap)?;
    let d = x.dim();
    let obs = x.indices();
    if obs.is_empty() {
        return Ok(out);
    }
    let mut offset = 0usize;
    let mut block = 1usize;
    for len in 1..=gamma {
        block *= d;
        // enumerate sequences over `obs` of length `len` with a mixed-radix counter
        let mut digits = vec![0usize; len];
        loop {
            let within = digits.iter().fold(0usize, |acc, &k| acc * d + obs[k]);
            out.coords[offset + within] = x.values()[digits[len - 1]];
            let mut pos = len;
            let mut carried = true;
            while pos > 0 && carried {
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < obs.len() {
                    carried = false;
                } else {
                    digits[pos] = 0;
                }
            }
            if carried {
                break;
            }
        }
        offset += block;
    }
    Ok(out)
}

/// Number of coordinates of `φ_γ(x)` that are structurally non-zero:
/// `|o| + |o|² + … + |o|^γ`.
pub fn embedding_support_size(x: &ObservedVector, gamma: usize) -> f64 {
    let m = x.n_observed() as f64;
    m * overlap_factor(x.n_observed(), gamma)
}

pub fn embedding_inner_product(a: &ExplicitEmbedding, b: &ExplicitEmbedding) -> Result<f64> {
    a.check_dims(b)?;
    Ok(a.coords.iter().zip(&b.coords).map(|(x, y)| x * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(d: usize, idx: &[usize], vals: &[f64]) -> ObservedVector {
        ObservedVector::new(d, idx.to_vec(), vals.to_vec()).unwrap()
    }

    #[test]
    fn factor_geometric_sum() {
        assert_eq!(overlap_factor(0, 3), 1.0);
        assert_eq!(overlap_factor(1, 5), 5.0);
        assert_eq!(overlap_factor(2, 3), 7.0);
        assert_eq!(overlap_factor(4, 1), 1.0);
        assert!(overlap_factor(1000, 200).is_infinite());
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let a = ov(4, &[0, 1], &[1.0, 2.0]);
        let b = ov(4, &[2, 3], &[3.0, 4.0]);
        assert_eq!(kernel(&a, &b, 3).unwrap(), 0.0);
    }

    #[test]
    fn single_overlap_uses_gamma_factor() {
        let a = ov(3, &[0, 1], &[0.9, 0.5]);
        let b = ov(3, &[1, 2], &[0.4, -0.7]);
        let k = kernel(&a, &b, 2).unwrap();
        assert!((k - 0.4).abs() < 1e-15);
        let via_embedding =
            embedding_inner_product(&embed(&a, 2).unwrap(), &embed(&b, 2).unwrap()).unwrap();
        assert!((k - via_embedding).abs() < 1e-15);
    }

    #[test]
    fn two_overlaps_factor_seven() {
        // S = 0.2*0.3 + 0.1*0.4 = 0.1
        let a = ov(4, &[0, 1, 3], &[0.2, 0.1, 5.0]);
        let b = ov(4, &[0, 1, 2], &[0.3, 0.4, -1.0]);
        let k = kernel(&a, &b, 3).unwrap();
        assert!((k - 0.7).abs() < 1e-15);
        let via_embedding =
            embedding_inner_product(&embed(&a, 3).unwrap(), &embed(&b, 3).unwrap()).unwrap();
        assert!((k - via_embedding).abs() < 1e-14);
    }

    #[test]
    fn gamma_one_is_zero_imputation() {
        let a = ov(5, &[0, 2, 4], &[1.0, -2.0, 0.5]);
        let b = ov(5, &[1, 2, 4], &[3.0, 0.25, 4.0]);
        let dense: f64 = a
            .zero_imputed()
            .iter()
            .zip(b.zero_imputed())
            .map(|(x, y)| x * y)
            .sum();
        assert_eq!(kernel(&a, &b, 1).unwrap(), dense);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = ov(3, &[0], &[1.0]);
        let b = ov(4, &[0], &[1.0]);
        assert!(kernel(&a, &b, 1).is_err());
        assert!(gram(&[a, b], 1).is_err());
    }

    #[test]
    fn sequence_order() {
        let seqs: Vec<_> = Sequences::new(2, 2).collect();
        assert_eq!(
            seqs,
            vec![
                vec![0],
                vec![1],
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![1, 1]
            ]
        );
        for (i, s) in Sequences::new(3, 3).enumerate() {
            assert_eq!(sequence_index(3, 3, &s), Some(i));
        }
        assert_eq!(Sequences::new(3, 3).count(), 39);
        assert_eq!(sequence_index(3, 2, &[0, 0, 0]), None);
        assert_eq!(sequence_index(3, 2, &[3]), None);
    }

    #[test]
    fn embedding_examples() {
        let empty = ov(3, &[], &[]);
        assert!(embed(&empty, 2).unwrap().coords().iter().all(|&c| c == 0.0));

        let e = embed(&ov(2, &[0], &[0.3]), 1).unwrap();
        assert_eq!(e.coords(), &[0.3, 0.0]);

        let e = embed(&ov(2, &[0, 1], &[0.3, -0.2]), 2).unwrap();
        assert_eq!(e.coords().len(), 6);
        assert_eq!(e.coord(&[1, 0]), Some(0.3));
        assert_eq!(e.coord(&[0, 1]), Some(-0.2));
        assert_eq!(e.coords(), &[0.3, -0.2, 0.3, -0.2, 0.3, -0.2]);
    }

    #[test]
    fn embedding_support_matches_count() {
        let x = ov(4, &[0, 2, 3], &[1.0, 2.0, 3.0]);
        let e = embed(&x, 3).unwrap();
        let nonzero = e.coords().iter().filter(|&&c| c != 0.0).count();
        assert_eq!(nonzero as f64, embedding_support_size(&x, 3));
        assert_eq!(nonzero, 3 + 9 + 27);
    }

    #[test]
    fn cap_is_enforced() {
        let x = ov(10, &[0], &[1.0]);
        match embed_with_cap(&x, 3, 1000) {
            Err(Error::EmbeddingTooLarge { total, cap }) => {
                assert_eq!(total, 1110.0);
                assert_eq!(cap, 1000);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn normalized_kernel_has_unit_diagonal() {
        let k = MissingDataKernel::normalized(3).unwrap();
        let a = ov(4, &[0, 1, 3], &[0.2, -0.4, 0.9]);
        let b = ov(4, &[1, 3], &[1.5, 0.1]);
        assert!((k.eval(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(k.eval(&a, &b).unwrap().abs() <= 1.0 + 1e-15);
        let empty = ov(4, &[], &[]);
        assert_eq!(k.eval(&a, &empty).unwrap(), 0.0);
        assert_eq!(k.self_similarity(&empty), 0.0);
    }

    #[test]
    fn gram_small_cases() {
        let a = ov(3, &[0, 1], &[0.5, 0.5]);
        let g = gram(std::slice::from_ref(&a), 2).unwrap();
        assert_eq!(g.shape(), (1, 1));
        assert_eq!(g[(0, 0)], kernel(&a, &a, 2).unwrap());
        let b = ov(3, &[2], &[1.0]);
        let g = gram(&[a, b], 2).unwrap();
        assert_eq!(g[(0, 1)], 0.0);
        assert_eq!(g[(1, 0)], 0.0);
    }
}
