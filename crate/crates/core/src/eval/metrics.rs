//! Value error and return targets.

use crate::error::{Error, Result};
use crate::types::{dot, FeatureVector};

/// Truncation tolerance for discounted returns.
pub const RETURN_TRUNCATION: f64 = 1e-8;

/// Mean squared value error, uniformly weighted over the states in `features`.
pub fn msve(w: &[f64], features: &[FeatureVector], v_true: &[f64]) -> Result<f64> {
    if features.len() != v_true.len() {
        return Err(Error::LengthMismatch {
            expected: v_true.len(),
            actual: features.len(),
        });
    }
    let mut total = 0.0;
    for (phi, v) in features.iter().zip(v_true) {
        let err = dot(w, phi)? - v;
        total += err * err;
    }
    Ok(total / v_true.len() as f64)
}

/// Smallest `h` with `γ^h ≤ tol`.
pub fn return_horizon(gamma: f64, tol: f64) -> usize {
    if gamma <= tol {
        return 1;
    }
    if gamma >= 1.0 {
        return usize::MAX;
    }
    let mut h = (tol.ln() / gamma.ln()).ceil().max(1.0) as usize;
    // Guard the float boundary in both directions.
    while h > 1 && gamma.powi((h - 1) as i32) <= tol {
        h -= 1;
    }
    while gamma.powi(h as i32) > tol {
        h += 1;
    }
    h
}

/// `G_t = Σ_{i=1..h} γ^{i−1} R_{t+i}`, where `rewards[k]` is the reward
/// received on the transition out of step `k`.
pub fn true_return(rewards: &[f64], gamma: f64, t: usize, horizon: usize) -> Result<f64> {
    let end = t.checked_add(horizon).filter(|&e| e <= rewards.len());
    let Some(end) = end else {
        return Err(Error::IncompleteReturn {
            t,
            needed: horizon,
            available: rewards.len().saturating_sub(t),
        });
    };
    Ok(rewards[t..end].iter().rev().fold(0.0, |g, r| r + gamma * g))
}

/// Truncated returns for every step of a reward tape in one backward pass.
///
/// `discounts[k]` is the discount applied after `rewards[k]` (zero on
/// terminal transitions). Entry `t` is `None` when the tape ends before
/// either `horizon` rewards or a terminal transition have been seen.
pub fn truncated_returns(rewards: &[f64], discounts: &[f64], horizon: usize) -> Result<Vec<Option<f64>>> {
    if rewards.len() != discounts.len() {
        return Err(Error::LengthMismatch {
            expected: rewards.len(),
            actual: discounts.len(),
        });
    }
    let n = rewards.len();
    // tail[k] = Σ_{i≥k} (Π_{k≤j<i} d_j) r_i over the whole tape.
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = rewards[k] + discounts[k] * tail[k + 1];
    }
    // Prefix counts of terminal discounts and log-sums of the others give the
    // discount product over any window.
    let mut zeros = vec![0usize; n + 1];
    let mut logs = vec![0.0f64; n + 1];
    for k in 0..n {
        let d = discounts[k];
        zeros[k + 1] = zeros[k] + usize::from(d == 0.0);
        logs[k + 1] = logs[k] + if d == 0.0 { 0.0 } else { d.ln() };
    }
    Ok((0..n)
        .map(|t| {
            let end = t.saturating_add(horizon).min(n);
            let terminal_in_window = zeros[end] > zeros[t];
            if terminal_in_window {
                Some(tail[t])
            } else if t.saturating_add(horizon) <= n {
                let product = (logs[end] - logs[t]).exp();
                Some(tail[t] - product * tail[end])
            } else {
                None
            }
        })
        .collect())
}
