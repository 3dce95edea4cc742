//! Closed-form decoding failure probability of random linear fountain codes.
//!
//! With `n` received rows whose coefficients are uniform over GF(q), the
//! `n x K` matrix has full column rank with probability
//! `prod_{k=1..K} (1 - q^-(n-k+1))`; the failure rate is its complement.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("block size K must be at least 1")]
    BadK,
    #[error("field order q must be at least 2, got {0}")]
    BadQ(u32),
    #[error("overhead {0} gives a negative received count")]
    BadEpsilon(f64),
}

/// A received-symbol count for block size `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadPoint {
    pub k: usize,
    pub n: usize,
    pub epsilon: f64,
}

impl OverheadPoint {
    pub fn from_n(k: usize, n: usize) -> OverheadPoint {
        OverheadPoint { k, n, epsilon: n as f64 / k as f64 - 1.0 }
    }

    /// `n = round(k (1 + epsilon))`. The stored epsilon is the requested one.
    pub fn from_epsilon(k: usize, epsilon: f64) -> Result<OverheadPoint, AnalyticError> {
        let n = received_count(k, epsilon)?;
        Ok(OverheadPoint { k, n, epsilon })
    }
}

/// `round(k (1 + epsilon))`.
pub fn received_count(k: usize, epsilon: f64) -> Result<usize, AnalyticError> {
    let n = (k as f64 * (1.0 + epsilon)).round();
    if !(n >= 0.0) || !n.is_finite() {
        return Err(AnalyticError::BadEpsilon(epsilon));
    }
    Ok(n as usize)
}

/// Probability that `n` uniformly random rows over GF(q) fail to span
/// GF(q)^k. Exactly 1 when `n < k`.
///
/// Accumulates `sum ln(1 - q^-j)` and returns `-expm1` of it, so tiny
/// failure rates keep full relative precision.
pub fn failure_rate(k: usize, n: usize, q: u32) -> Result<f64, AnalyticError> {
    if k < 1 {
        return Err(AnalyticError::BadK);
    }
    if q < 2 {
        return Err(AnalyticError::BadQ(q));
    }
    if n < k {
        return Ok(1.0);
    }
    let ln_q = (q as f64).ln();
    // factor k uses exponent n - k + 1, which runs over n-k+1 ..= n
    let log_success: f64 = (n - k + 1..=n).map(|j| (-(-(j as f64) * ln_q).exp()).ln_1p()).sum();
    Ok(-log_success.exp_m1())
}

/// `(epsilon, n, F)` for each overhead in the grid.
pub fn failure_curve(k: usize, q: u32, epsilon_grid: &[f64]) -> Result<Vec<(f64, usize, f64)>, AnalyticError> {
    epsilon_grid
        .iter()
        .map(|&eps| {
            let n = received_count(k, eps)?;
            Ok((eps, n, failure_rate(k, n, q)?))
        })
        .collect()
}
