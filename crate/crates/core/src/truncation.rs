//! Finite probability vectors with certified tail mass.

use crate::error::{Error, Result};

/// A pmf on `0..len()` plus an upper bound on the probability mass that the
/// vector does not carry.
///
/// Every stored `probs[k]` is at most the true `P(X = k)` (up to floating
/// rounding); `tail_bound` dominates everything missing, whether it lies
/// beyond the support or was dropped inside it by an upstream truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPmf {
    probs: Vec<f64>,
    tail_bound: f64,
}

impl TruncatedPmf {
    pub fn new(probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty probability vector".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid probability {bad}")));
        }
        if !(tail_bound.is_finite() && tail_bound >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid tail bound {tail_bound}"
            )));
        }
        Ok(Self { probs, tail_bound })
    }

    /// Point mass at `k`.
    pub fn point_mass(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Self {
            probs,
            tail_bound: 0.0,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Largest represented value.
    pub fn max_support(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Stored probability at `k` (zero past the support).
    pub fn get(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn into_parts(self) -> (Vec<f64>, f64) {
        (self.probs, self.tail_bound)
    }
}

/// Bound on `sum_{j > k} j^degree * s(j)` for a nonnegative sequence with
/// `s(j+1) <= rho * s(j)` for every `j >= k`.
///
/// Returns `None` when the envelope is not summable.
pub fn dominated_tail(s_k: f64, rho: f64, k: u64, degree: u32) -> Option<f64> {
    if s_k == 0.0 || rho == 0.0 {
        return Some(0.0);
    }
    let k1 = k as f64 + 1.0;
    let growth = ((k1 + 1.0) / k1).powi(degree as i32);
    let rho_weighted = rho * growth;
    if !(rho_weighted < 1.0) {
        return None;
    }
    Some(s_k * k1.powi(degree as i32) * rho / (1.0 - rho_weighted))
}
