use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension bookkeeping for the depth-`gamma` embedding of `R^d`.
///
/// `total` is `Γ = d + d² + … + d^γ`, the number of coordinate sequences of
/// length 1 through `gamma`. It overflows integers quickly, so it is kept as
/// a float and `exact` carries the integer value whenever it is exactly
/// representable in an `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaDims {
    pub d: usize,
    pub gamma: usize,
    pub total: f64,
    pub exact: Option<u64>,
}

const F64_EXACT_LIMIT: u128 = 1 << 53;

pub fn gamma_dims(d: usize, gamma: usize) -> Result<GammaDims> {
    if d == 0 || gamma == 0 {
        return Err(Error::param(format!(
            "embedding needs d >= 1 and gamma >= 1, got d = {d}, gamma = {gamma}"
        )));
    }
    let exact = exact_total(d as u128, gamma).filter(|&t| t <= F64_EXACT_LIMIT);
    let total = match exact {
        Some(t) => t as f64,
        None => {
            // (d^{γ+1} − d)/(d − 1) in logs would lose the integer part anyway
            let df = d as f64;
            let mut sum = 0.0;
            let mut term = 1.0;
            for _ in 0..gamma {
                term *= df;
                sum += term;
            }
            sum
        }
    };
    Ok(GammaDims {
        d,
        gamma,
        total,
        exact: exact.map(|t| t as u64),
    })
}

fn exact_total(d: u128, gamma: usize) -> Option<u128> {
    let mut sum: u128 = 0;
    let mut term: u128 = 1;
    for _ in 0..gamma {
        term = term.checked_mul(d)?;
        sum = sum.checked_add(term)?;
    }
    Some(sum)
}

impl GammaDims {
    /// `Γ` as an index bound, when it fits.
    pub fn as_usize(&self) -> Option<usize> {
        self.exact.and_then(|t| usize::try_from(t).ok())
    }

    /// Number of sequences of exactly `len` elements, `d^len`.
    pub fn count_of_length(&self, len: usize) -> Option<usize> {
        self.d.checked_pow(len as u32)
    }
}
