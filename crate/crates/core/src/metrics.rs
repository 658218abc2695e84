//! Error metrics and closed-form bound calculators for credit-assignment
//! failure probability, exploration sample complexity, and the online-MLE
//! loss gap.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("relative metric undefined: reference vector has zero norm")]
    ZeroNormTruth,
    #[error("relative metric undefined: edge-level estimate is 0")]
    ZeroEstimate,
    #[error("no correlation decay (gamma must be in (0,1))")]
    NoDecay,
    #[error("argument out of range: {0}")]
    OutOfRange(&'static str),
}

/// One round's record in a game transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub round: u64,
    pub spread_learned: f64,
    pub spread_true: f64,
    pub regret: f64,
    pub cum_avg_regret: f64,
    pub l2_rel_error: f64,
    /// Fraction of edges within 10% relative error.
    pub frac_within_10: f64,
}

/// `||mu_hat - mu|| / ||mu||` (L2).
pub fn relative_l2_error(mu_hat: &[f64], mu_true: &[f64]) -> Result<f64, MetricsError> {
    assert_eq!(mu_hat.len(), mu_true.len());
    let norm: f64 = mu_true.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(MetricsError::ZeroNormTruth);
    }
    let diff: f64 = mu_hat
        .iter()
        .zip(mu_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}

/// Fraction of edges with `|mu_hat - mu| / mu <= p`. Edges with true
/// probability 0 are excluded (relative error undefined there).
pub fn fraction_within(mu_hat: &[f64], mu_true: &[f64], p: f64) -> f64 {
    assert_eq!(mu_hat.len(), mu_true.len());
    assert!(p >= 0.0);
    let mut total = 0usize;
    let mut within = 0usize;
    for (&h, &t) in mu_hat.iter().zip(mu_true) {
        if t == 0.0 {
            continue;
        }
        total += 1;
        if (h - t).abs() / t <= p {
            within += 1;
        }
    }
    if total == 0 {
        return 1.0;
    }
    within as f64 / total as f64
}

/// Exact credit-assignment failure probability for a node whose `K` active
/// parents have true probabilities `p_star`, for the edge at `credited`:
/// `(1/K)(1 - p_i)(1 - prod_{k != i}(1 - p_k)) + (1 - 1/K) p_i`.
pub fn failure_prob_exact(p_star: &[f64], credited: usize) -> f64 {
    let k = p_star.len();
    assert!(k >= 1 && credited < k);
    let p_i = p_star[credited];
    let others: f64 = p_star
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != credited)
        .map(|(_, &p)| 1.0 - p)
        .product();
    (1.0 / k as f64) * (1.0 - p_i) * (1.0 - others) + (1.0 - 1.0 / k as f64) * p_i
}

/// Upper bound on the failure probability from the network-wide extremes:
/// `(1/K)(1 - p_min)(1 - (1 - p_max)^(K-1)) + (1 - 1/K) p_max`.
pub fn failure_prob_bound(k: usize, p_min: f64, p_max: f64) -> f64 {
    assert!(k >= 1);
    assert!((0.0..=1.0).contains(&p_min) && p_min <= p_max && p_max <= 1.0);
    (1.0 / k as f64) * (1.0 - p_min) * (1.0 - (1.0 - p_max).powi(k as i32 - 1))
        + (1.0 - 1.0 / k as f64) * p_max
}

/// Relative error of the node-level mean estimate versus the edge-level
/// one: `rho * |1/mu_E - 2|`.
pub fn node_level_relative_error(mu_e_hat: f64, rho: f64) -> Result<f64, MetricsError> {
    if mu_e_hat <= 0.0 {
        return Err(MetricsError::ZeroEstimate);
    }
    Ok(rho * (1.0 / mu_e_hat - 2.0).abs())
}

/// Minimum cascade count for learning a monitored edge to relative error
/// `epsilon` with probability `1 - delta` under random exploration with
/// edge-level feedback: `ceil(3 gamma |V| ln(1/delta) / (eps^2 p* k))`.
pub fn sample_complexity_bound(
    gamma: f64,
    n_nodes: usize,
    k: usize,
    p_star: f64,
    epsilon: f64,
    delta: f64,
) -> Result<u64, MetricsError> {
    if gamma <= 0.0 {
        return Err(MetricsError::NoDecay);
    }
    if gamma >= 1.0 {
        return Err(MetricsError::OutOfRange("gamma must be < 1"));
    }
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(MetricsError::OutOfRange("epsilon must be in (0,1)"));
    }
    if !(0.0 < delta && delta <= 1.0) {
        return Err(MetricsError::OutOfRange("delta must be in (0,1]"));
    }
    if !(0.0 < p_star && p_star <= 1.0) {
        return Err(MetricsError::OutOfRange("p_star must be in (0,1]"));
    }
    if n_nodes == 0 || k == 0 {
        return Err(MetricsError::OutOfRange("node count and budget must be positive"));
    }
    let c = 3.0 * gamma * n_nodes as f64 * (1.0 / delta).ln()
        / (epsilon * epsilon * p_star * k as f64);
    // Ceiling with a small relative slack so that inputs quoted to ~6
    // significant digits (e.g. delta = 0.367879 for 1/e) don't bump the
    // count by one.
    Ok((c - c * 1e-5).ceil() as u64)
}

/// Online-vs-batch MLE cumulative likelihood gap bound:
/// `d_v theta_max^2 sqrt(T) / 2 + (sqrt(T) - 1/2) G^2`.
pub fn mle_loss_gap_bound(d_v: usize, theta_max: f64, t: u64, g: f64) -> f64 {
    assert!(t >= 1);
    let rt = (t as f64).sqrt();
    d_v as f64 * theta_max * theta_max * rt / 2.0 + (rt - 0.5) * g * g
}

/// The gap bound divided by T; goes to 0 as T grows.
pub fn mle_loss_gap_bound_avg(d_v: usize, theta_max: f64, t: u64, g: f64) -> f64 {
    mle_loss_gap_bound(d_v, theta_max, t, g) / t as f64
}
