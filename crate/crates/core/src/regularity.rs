//! Certifies λ-regularity of a sample with respect to a candidate subspace.
//!
//! A sample is λ-regular for `E` when, for every example,
//!
//! 1. `‖P_o x‖ ≤ 1`,
//! 2. `x ∈ E`,
//! 3. `ker(P_o P_E) = ker(P_E)`, equivalently `rank(P_o P_E) = rank(P_E)`,
//! 4. every positive singular value of `P_o P_E` is at least λ.
//!
//! Conditions 3 and 4 depend only on the observation pattern, so they are
//! evaluated once per distinct pattern. Condition 2 needs the unmasked
//! vectors and is reported as unchecked without them.
//!
//! The report carries two spectral quantities. `lambda` is the smallest
//! positive singular value of `P_o P_E` over all patterns. `eigen_lambda`
//! is the smallest positive eigenvalue of `Q_{o,o} = P_o P_E P_oᵀ`, which is
//! `lambda²`; it is the quantity that controls the truncated-series error in
//! [`crate::reference::DensePredictorFGamma`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    column_space, column_space_symmetric, min_positive_eigenvalue, numerical_rank,
    numerical_rank_symmetric, rank_threshold, restrict, select_cols,
    select_rows, singular_values, subspace_gap,
};
use crate::observed::{common_dim, ObservedVector};
use crate::reference::SubspaceSpec;

/// An observation pattern and how many examples share it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCount {
    pub pattern: Vec<usize>,
    pub count: usize,
}

/// Deduplicated observation patterns in lexicographic order.
pub fn distinct_patterns(data: &[ObservedVector]) -> Vec<PatternCount> {
    let mut counts: BTreeMap<&[usize], usize> = BTreeMap::new();
    for x in data {
        *counts.entry(x.indices()).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(pattern, count)| PatternCount {
            pattern: pattern.to_vec(),
            count,
        })
        .collect()
}

/// `rank(P_o Q)`, `rank(Q P_oᵀ)` and `rank(P_o Q P_oᵀ)`, each computed from
/// its own SVD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTriple {
    pub rows: usize,
    pub cols: usize,
    pub restricted: usize,
}

impl RankTriple {
    pub fn consistent(&self) -> bool {
        self.rows == self.cols && self.cols == self.restricted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDiagnostics {
    pub pattern: Vec<usize>,
    pub count: usize,
    /// Positive singular values of `P_o P_E`, decreasing.
    pub singular_values: Vec<f64>,
    pub kernel_ok: bool,
    pub min_positive_eigenvalue: Option<f64>,
    pub ranks: RankTriple,
    /// `‖Π_{Im Q_oo} − Π_{Im P_o Q}‖₂`, only when the kernel condition holds.
    pub image_gap: Option<f64>,
}

impl PatternDiagnostics {
    pub fn compute(pattern: &[usize], count: usize, subspace: &SubspaceSpec) -> Result<Self> {
        let d = subspace.dim();
        if let Some(&i) = pattern.iter().find(|&&i| i >= d) {
            return Err(Error::InvalidVector(format!(
                "pattern index {i} out of range for dimension {d}"
            )));
        }
        let q = subspace.projection();
        let po_q = select_rows(q, pattern);
        let sv = singular_values(&po_q);
        let tol = rank_threshold(&sv, pattern.len(), d);
        let positive: Vec<f64> = sv.into_iter().filter(|&s| s > tol).collect();
        let kernel_ok = positive.len() == subspace.rank();

        let q_oo = restrict(q, pattern);
        let eig_tol = pattern.len().max(d) as f64 * f64::EPSILON;
        let min_eig = min_positive_eigenvalue(&q_oo, eig_tol);
        let ranks = RankTriple {
            rows: numerical_rank(&po_q),
            cols: numerical_rank(&select_cols(q, pattern)),
            restricted: numerical_rank_symmetric(&q_oo),
        };
        let image_gap = kernel_ok.then(|| subspace_gap(&column_space_symmetric(&q_oo), &column_space(&po_q)));
        Ok(Self {
            pattern: pattern.to_vec(),
            count,
            singular_values: positive,
            kernel_ok,
            min_positive_eigenvalue: min_eig,
            ranks,
            image_gap,
        })
    }

    /// `λ_o`, the smallest positive singular value; `None` for a pattern
    /// that sees nothing of `E`.
    pub fn lambda(&self) -> Option<f64> {
        self.singular_values.last().copied()
    }
}

/// Positive singular values of `P_o P_E` for a single pattern.
pub fn pattern_singular_values(pattern: &[usize], subspace: &SubspaceSpec) -> Result<Vec<f64>> {
    Ok(PatternDiagnostics::compute(pattern, 1, subspace)?.singular_values)
}

/// Whether `pattern` satisfies the kernel condition and `λ_o ≥ lambda0`.
pub fn pattern_is_regular(pattern: &[usize], subspace: &SubspaceSpec, lambda0: f64) -> Result<bool> {
    let sv = pattern_singular_values(pattern, subspace)?;
    Ok(sv.len() == subspace.rank() && sv.last().is_some_and(|&s| s >= lambda0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SupportCheck {
    Unchecked,
    Passed { max_relative_residual: f64 },
    Failed { max_relative_residual: f64, first_violation: usize },
}

impl SupportCheck {
    /// `None` when no full vectors were supplied.
    pub fn ok(&self) -> Option<bool> {
        match self {
            SupportCheck::Unchecked => None,
            SupportCheck::Passed { .. } => Some(true),
            SupportCheck::Failed { .. } => Some(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub format_version: u32,
    pub n: usize,
    pub d: usize,
    pub rank: usize,
    /// Smallest positive singular value of `P_o P_E` over all patterns; 0
    /// when some pattern violates the kernel condition.
    pub lambda: f64,
    /// Smallest positive eigenvalue of `Q_{o,o}` over all patterns (= λ²); 0
    /// when some pattern violates the kernel condition.
    pub eigen_lambda: f64,
    pub norm_ok: bool,
    pub max_observed_norm: f64,
    pub support: SupportCheck,
    pub kernel_ok: bool,
    pub per_pattern: Vec<PatternDiagnostics>,
}

impl RegularityReport {
    /// All four conditions hold (condition 2 counts only when checked).
    pub fn is_regular(&self) -> bool {
        self.kernel_ok && self.norm_ok && self.support.ok() != Some(false)
    }

    /// Fixed-width text table, one row per pattern.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "n = {}  d = {}  rank = {}\nlambda = {:.17e}\neigen_lambda = {:.17e}\nkernel_ok = {}  norm_ok = {} (max {:.6})  support = {}\n",
            self.n,
            self.d,
            self.rank,
            self.lambda,
            self.eigen_lambda,
            self.kernel_ok,
            self.norm_ok,
            self.max_observed_norm,
            match self.support.ok() {
                None => "unchecked",
                Some(true) => "ok",
                Some(false) => "VIOLATED",
            }
        ));
        out.push_str(&format!(
            "{:<6} {:>6} {:>6} {:>24} {:>9} {:>12}\n",
            "#", "count", "|o|", "lambda_o", "kernel", "image_gap"
        ));
        for (k, p) in self.per_pattern.iter().enumerate() {
            out.push_str(&format!(
                "{:<6} {:>6} {:>6} {:>24} {:>9} {:>12}\n",
                k,
                p.count,
                p.pattern.len(),
                p.lambda().map_or("-".into(), |l| format!("{l:.17e}")),
                if p.kernel_ok { "ok" } else { "DROP" },
                p.image_gap.map_or("-".into(), |g| format!("{g:.3e}")),
            ));
        }
        out
    }
}

/// Checks every regularity condition of `data` against `subspace`.
///
/// `full`, when given, holds the unmasked vectors in the same order as
/// `data` and enables the `x ∈ E` check. `tol` is the slack for the norm
/// condition and the relative residual allowed by the support check.
pub fn check_regularity(
    data: &[ObservedVector],
    full: Option<&[Vec<f64>]>,
    subspace: &SubspaceSpec,
    tol: f64,
) -> Result<RegularityReport> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let d = common_dim(data)?.expect("non-empty");
    if d != subspace.dim() {
        return Err(Error::DimensionMismatch {
            expected: subspace.dim(),
            found: d,
        });
    }

    let max_observed_norm = data.iter().map(|x| x.observed_norm()).fold(0.0, f64::max);
    let norm_ok = max_observed_norm <= 1.0 + tol;

    let support = match full {
        None => SupportCheck::Unchecked,
        Some(full) => support_check(data, full, subspace, tol)?,
    };

    let patterns = distinct_patterns(data);
    let per_pattern = patterns
        .par_iter()
        .map(|p| PatternDiagnostics::compute(&p.pattern, p.count, subspace))
        .collect::<Result<Vec<_>>>()?;

    let kernel_ok = per_pattern.iter().all(|p| p.kernel_ok);
    let (lambda, eigen_lambda) = if kernel_ok {
        let lambda = per_pattern
            .iter()
            .filter_map(|p| p.lambda())
            .fold(f64::INFINITY, f64::min);
        let eigen = per_pattern
            .iter()
            .filter_map(|p| p.min_positive_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        (lambda.min(1.0), eigen.min(1.0))
    } else {
        (0.0, 0.0)
    };

    Ok(RegularityReport {
        format_version: 1,
        n: data.len(),
        d,
        rank: subspace.rank(),
        lambda,
        eigen_lambda,
        norm_ok,
        max_observed_norm,
        support,
        kernel_ok,
        per_pattern,
    })
}

fn support_check(
    data: &[ObservedVector],
    full: &[Vec<f64>],
    subspace: &SubspaceSpec,
    tol: f64,
) -> Result<SupportCheck> {
    if full.len() != data.len() {
        return Err(Error::param(format!(
            "{} full vectors supplied for {} examples",
            full.len(),
            data.len()
        )));
    }
    let mut worst = 0.0f64;
    let mut first_violation = None;
    for (i, x) in full.iter().enumerate() {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let residual = subspace.residual_norm(x)?;
        let relative = if norm > 0.0 { residual / norm } else { 0.0 };
        worst = worst.max(relative);
        if relative > tol && first_violation.is_none() {
            first_violation = Some(i);
        }
    }
    Ok(match first_violation {
        None => SupportCheck::Passed {
            max_relative_residual: worst,
        },
        Some(i) => SupportCheck::Failed {
            max_relative_residual: worst,
            first_violation: i,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ov(d: usize, idx: &[usize]) -> ObservedVector {
        let vals = idx.iter().map(|&i| 0.1 * (i as f64 + 1.0)).collect();
        ObservedVector::new(d, idx.to_vec(), vals).unwrap()
    }

    #[test]
    fn fully_observed_has_lambda_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = SubspaceSpec::random(4, 2, &mut rng).unwrap();
        let data = vec![ov(4, &[0, 1, 2, 3]); 3];
        let r = check_regularity(&data, None, &s, 1e-8).unwrap();
        assert!(r.kernel_ok);
        assert!((r.lambda - 1.0).abs() < 1e-12);
        assert!((r.eigen_lambda - 1.0).abs() < 1e-12);
        assert_eq!(r.support, SupportCheck::Unchecked);
        assert_eq!(r.per_pattern.len(), 1);
    }

    #[test]
    fn orthogonal_pattern_drops_rank() {
        // E = span(e0, e1); observing only {2, 3} sees nothing of E
        let basis = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let s = SubspaceSpec::from_basis(&basis).unwrap();
        let r = check_regularity(&[ov(4, &[2, 3]), ov(4, &[0, 1])], None, &s, 1e-8).unwrap();
        assert!(!r.kernel_ok);
        assert_eq!(r.lambda, 0.0);
        assert_eq!(r.eigen_lambda, 0.0);
        assert!(!r.is_regular());
        let bad = r.per_pattern.iter().find(|p| p.pattern == vec![2, 3]).unwrap();
        assert!(!bad.kernel_ok);
        assert_eq!(bad.lambda(), None);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let s = SubspaceSpec::full(2).unwrap();
        assert!(matches!(check_regularity(&[], None, &s, 1e-8), Err(Error::Empty(_))));
    }

    #[test]
    fn patterns_counted_in_lexicographic_order() {
        let data = vec![ov(4, &[1, 3]), ov(4, &[0, 2]), ov(4, &[0, 1, 2, 3]), ov(4, &[0, 2])];
        let p = distinct_patterns(&data);
        let pats: Vec<_> = p.iter().map(|p| (p.pattern.clone(), p.count)).collect();
        assert_eq!(
            pats,
            vec![(vec![0, 1, 2, 3], 1), (vec![0, 2], 2), (vec![1, 3], 1)]
        );
    }

    #[test]
    fn norm_and_support_checks() {
        let basis = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let s = SubspaceSpec::from_basis(&basis).unwrap();
        let data = vec![
            ObservedVector::dense(&[0.5, 0.0]).unwrap(),
            ObservedVector::dense(&[2.0, 0.0]).unwrap(),
        ];
        let full = vec![vec![0.5, 0.0], vec![2.0, 0.0]];
        let r = check_regularity(&data, Some(&full), &s, 1e-8).unwrap();
        assert!(!r.norm_ok);
        assert_eq!(r.support.ok(), Some(true));
        let off = vec![vec![0.5, 0.0], vec![2.0, 0.5]];
        let r = check_regularity(&data, Some(&off), &s, 1e-8).unwrap();
        assert!(matches!(r.support, SupportCheck::Failed { first_violation: 1, .. }));
    }

    #[test]
    fn eigen_lambda_is_lambda_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = SubspaceSpec::random(6, 2, &mut rng).unwrap();
        let data = vec![ov(6, &[0, 2, 4]), ov(6, &[1, 2, 3, 5]), ov(6, &[0, 5])];
        let r = check_regularity(&data, None, &s, 1e-8).unwrap();
        assert!(r.kernel_ok);
        assert!((r.eigen_lambda - r.lambda * r.lambda).abs() < 1e-12);
        for p in &r.per_pattern {
            assert!(p.ranks.consistent());
            assert!(p.image_gap.unwrap() < 1e-8);
        }
    }
}
