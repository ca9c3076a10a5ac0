//! Vectors with missing coordinates.
//!
//! Missingness is structural: a vector stores the sorted set of observed
//! indices and one value per observed index. There is no sentinel for a
//! missing cell, so NaN never enters the arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `dim`-dimensional real vector of which only `indices` are visible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl ObservedVector {
    pub fn new(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidVector("dimension must be positive".into()));
        }
        if indices.len() != values.len() {
            return Err(Error::InvalidVector(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidVector(format!(
                "indices must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::InvalidVector(format!(
                    "index {last} out of range for dimension {dim}"
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidVector(format!("non-finite value {v}")));
        }
        Ok(Self {
            dim,
            indices,
            values,
        })
    }

    /// Fully observed vector.
    pub fn dense(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), (0..values.len()).collect(), values.to_vec())
    }

    /// Builds a vector from cells where `None` marks a missing entry.
    pub fn from_options(cells: &[Option<f64>]) -> Result<Self> {
        let (indices, values) = cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|v| (i, v)))
            .unzip();
        Self::new(cells.len(), indices, values)
    }

    /// Keeps `full[i]` wherever `mask[i]` is true.
    pub fn from_mask(full: &[f64], mask: &[bool]) -> Result<Self> {
        if full.len() != mask.len() {
            return Err(Error::DimensionMismatch {
                expected: full.len(),
                found: mask.len(),
            });
        }
        let (indices, values) = full
            .iter()
            .zip(mask)
            .enumerate()
            .filter(|(_, (_, &keep))| keep)
            .map(|(i, (&v, _))| (i, v))
            .unzip();
        Self::new(full.len(), indices, values)
    }

    /// Restricts a full vector to a pattern of observed indices.
    pub fn from_pattern(full: &[f64], pattern: &[usize]) -> Result<Self> {
        let values = pattern
            .iter()
            .map(|&i| {
                full.get(i).copied().ok_or_else(|| {
                    Error::InvalidVector(format!(
                        "index {i} out of range for dimension {}",
                        full.len()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(full.len(), pattern.to_vec(), values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Observed indices, strictly increasing.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_observed(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|pos| self.values[pos])
    }

    pub fn is_observed(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// `‖P_o x‖`, the Euclidean norm of the visible part.
    pub fn observed_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute observed value; 0 for an empty vector.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Dense copy with missing coordinates set to zero.
    pub fn zero_imputed(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    /// Dense copy with missing coordinates taken from `fill`.
    pub fn imputed_with(&self, fill: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(fill.len())?;
        let mut out = fill.to_vec();
        for (i, v) in self.iter() {
            out[i] = v;
        }
        Ok(out)
    }

    /// Size of the common observed set and the dot product over it.
    pub fn overlap(&self, other: &ObservedVector) -> Result<(usize, f64)> {
        self.check_dim(other.dim)?;
        Ok(self.overlap_unchecked(other))
    }

    pub(crate) fn overlap_unchecked(&self, other: &ObservedVector) -> (usize, f64) {
        let (a_idx, b_idx) = (&self.indices, &other.indices);
        let (mut i, mut j) = (0, 0);
        let mut count = 0;
        let mut dot = 0.0;
        while i < a_idx.len() && j < b_idx.len() {
            match a_idx[i].cmp(&b_idx[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    dot += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        (count, dot)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            })
        }
    }
}

/// An observed input together with its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub input: ObservedVector,
    pub label: f64,
}

impl LabeledExample {
    pub fn new(input: ObservedVector, label: f64) -> Result<Self> {
        if !label.is_finite() {
            return Err(Error::InvalidVector(format!("non-finite label {label}")));
        }
        Ok(Self { input, label })
    }

    pub fn dim(&self) -> usize {
        self.input.dim()
    }
}

/// Common dimension of a collection, or an error naming the first mismatch.
/// Returns `None` for an empty collection.
pub fn common_dim<'a, I>(vectors: I) -> Result<Option<usize>>
where
    I: IntoIterator<Item = &'a ObservedVector>,
{
    let mut dim = None;
    for v in vectors {
        match dim {
            None => dim = Some(v.dim()),
            Some(d) => v.check_dim(d).map_err(|_| Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            })?,
        }
    }
    Ok(dim)
}
