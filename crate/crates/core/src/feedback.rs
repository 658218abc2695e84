//! Influence-probability estimators and the three feedback update
//! mechanisms: edge-level frequentist, node-level frequentist with
//! randomized credit assignment, and node-level online maximum likelihood.

use rand::Rng;
use thiserror::Error;

use crate::diffusion::Cascade;
use crate::graph::{EdgeId, Graph};

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("cascade integrity: active non-seed node {node} has no parent active one step earlier")]
    CascadeIntegrity { node: u32 },
    #[error("likelihood singularity at node {node}: successful-parent theta sum is 0")]
    Singular { node: u32 },
    #[error("node {node} is a seed; its activation is exogenous")]
    SeedNode { node: u32 },
    #[error("estimator has no theta vector; construct it in MLE mode")]
    NotMleMode,
}

/// Step-size schedule and clamp box for online MLE.
///
/// `theta_max` defaults to `-ln(1 - 0.99)`, bounding estimable probabilities
/// at 0.99; `theta_min` keeps the log term away from its singularity.
#[derive(Debug, Clone, Copy)]
pub struct MleConfig {
    /// Base step size; round `s` uses `eta0 / sqrt(s)`.
    pub eta0: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        MleConfig {
            eta0: 1.0,
            theta_min: 1e-6,
            theta_max: -(1.0f64 - 0.99).ln(),
        }
    }
}

/// Per-edge estimator state shared by all feedback mechanisms.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    mu_hat: Vec<f64>,
    success_count: Vec<u64>,
    trigger_count: Vec<u64>,
    prior: Option<(f64, f64)>,
    theta: Option<Vec<f64>>,
    round: u64,
}

impl EstimatorState {
    /// Frequentist estimator with all estimates initialized to 0.
    pub fn new(edge_count: usize) -> Self {
        EstimatorState {
            mu_hat: vec![0.0; edge_count],
            success_count: vec![0; edge_count],
            trigger_count: vec![0; edge_count],
            prior: None,
            theta: None,
            round: 0,
        }
    }

    /// Frequentist estimator with Beta(alpha, beta) pseudo-count smoothing.
    pub fn with_prior(edge_count: usize, alpha: f64, beta: f64) -> Self {
        assert!(alpha > 0.0 && beta > 0.0);
        let mut s = EstimatorState::new(edge_count);
        s.prior = Some((alpha, beta));
        s.mu_hat.fill(alpha / (alpha + beta));
        s
    }

    /// Online-MLE estimator; theta starts at the clamp floor (estimates ~0),
    /// or at the prior mean when one is supplied.
    pub fn new_mle(edge_count: usize, cfg: &MleConfig, prior: Option<(f64, f64)>) -> Self {
        let theta0 = match prior {
            Some((a, b)) => (-(1.0 - a / (a + b)).ln()).clamp(cfg.theta_min, cfg.theta_max),
            None => cfg.theta_min,
        };
        let mut s = EstimatorState::new(edge_count);
        s.theta = Some(vec![theta0; edge_count]);
        s.mu_hat.fill(1.0 - (-theta0).exp());
        s
    }

    #[inline]
    pub fn mu_hat(&self, e: EdgeId) -> f64 {
        self.mu_hat[e.index()]
    }

    pub fn mu_hats(&self) -> &[f64] {
        &self.mu_hat
    }

    #[inline]
    pub fn trigger_count(&self, e: EdgeId) -> u64 {
        self.trigger_count[e.index()]
    }

    #[inline]
    pub fn success_count(&self, e: EdgeId) -> u64 {
        self.success_count[e.index()]
    }

    pub fn theta(&self, e: EdgeId) -> Option<f64> {
        self.theta.as_ref().map(|t| t[e.index()])
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// The bandit loop sets the current CMAB round before dispatching updates.
    pub fn set_round(&mut self, s: u64) {
        self.round = s;
    }

    #[cfg(test)]
    pub(crate) fn force_counts(&mut self, e: EdgeId, triggers: u64, successes: u64) {
        assert!(successes <= triggers);
        self.trigger_count[e.index()] = triggers;
        self.success_count[e.index()] = successes;
        self.refresh_mu(e);
    }

    fn refresh_mu(&mut self, e: EdgeId) {
        let i = e.index();
        self.mu_hat[i] = match self.prior {
            Some((a, b)) => {
                (self.success_count[i] as f64 + a) / (self.trigger_count[i] as f64 + a + b)
            }
            None => {
                if self.trigger_count[i] > 0 {
                    self.success_count[i] as f64 / self.trigger_count[i] as f64
                } else {
                    0.0
                }
            }
        };
    }

    /// Edge-level frequentist update: count every attempted edge, successes
    /// from the ground-truth live status.
    pub fn update_edge_level(&mut self, cascade: &Cascade) {
        for &e in cascade.attempted() {
            self.trigger_count[e.index()] += 1;
            if cascade.live_status(e) == Some(true) {
                self.success_count[e.index()] += 1;
            }
            self.refresh_mu(e);
        }
    }

    /// Node-level frequentist update: same counting as edge level but with
    /// rewards inferred by [`assign_node_level_credit`].
    pub fn update_node_level_frequentist<R: Rng>(
        &mut self,
        g: &Graph,
        cascade: &Cascade,
        rng: &mut R,
    ) -> Result<(), FeedbackError> {
        let credit = assign_node_level_credit(g, cascade, rng)?;
        for (e, reward) in credit {
            self.trigger_count[e.index()] += 1;
            if reward {
                self.success_count[e.index()] += 1;
            }
            self.refresh_mu(e);
        }
        Ok(())
    }

    /// One online-MLE round: a single gradient step per relevant node on the
    /// observed cascade, with step size `eta0 / sqrt(round)`.
    ///
    /// Trigger counts are still maintained (attempts are observable from node
    /// times alone) so CUCB and strategic exploration can run in MLE mode.
    pub fn update_node_level_mle(
        &mut self,
        g: &Graph,
        cascade: &Cascade,
        cfg: &MleConfig,
    ) -> Result<(), FeedbackError> {
        if self.theta.is_none() {
            return Err(FeedbackError::NotMleMode);
        }
        for &e in cascade.attempted() {
            self.trigger_count[e.index()] += 1;
        }
        for v in 0..g.node_count() as u32 {
            if cascade.activation_time(v) == Some(0) {
                continue; // seed; exogenous activation
            }
            let has_observed_parent = g
                .in_edges(v)
                .iter()
                .any(|&e| cascade.is_active(g.source(e)));
            if !has_observed_parent {
                continue;
            }
            self.mle_gradient_step(g, cascade, v, cfg)?;
        }
        Ok(())
    }

    /// One clamped gradient step on node `v`'s per-cascade likelihood.
    pub fn mle_gradient_step(
        &mut self,
        g: &Graph,
        cascade: &Cascade,
        v: u32,
        cfg: &MleConfig,
    ) -> Result<(), FeedbackError> {
        let in_edges = g.in_edges(v).to_vec();
        let theta_vec = self.theta.as_mut().ok_or(FeedbackError::NotMleMode)?;
        let theta_slice: Vec<f64> = in_edges.iter().map(|&e| theta_vec[e.index()]).collect();
        let grad = node_likelihood_grad(g, cascade, v, &theta_slice)?;
        let s = self.round.max(1);
        let eta = cfg.eta0 / (s as f64).sqrt();
        for (j, &e) in in_edges.iter().enumerate() {
            // theta <- theta - eta * grad(-L) = theta + eta * grad(L)
            let updated = (theta_vec[e.index()] + eta * grad[j]).clamp(cfg.theta_min, cfg.theta_max);
            theta_vec[e.index()] = updated;
            self.mu_hat[e.index()] = 1.0 - (-updated).exp();
        }
        Ok(())
    }
}

/// How an in-edge of node `v` enters `v`'s cascade likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeTerm {
    /// Source attempted and failed: contributes `-theta`.
    Failure,
    /// Source activated one step before `v`: inside the success log term.
    Success,
    /// Source inactive, or activated too late to have attempted `v`.
    None,
}

fn classify_in_edges(g: &Graph, cascade: &Cascade, v: u32) -> Result<Vec<EdgeTerm>, FeedbackError> {
    if cascade.activation_time(v) == Some(0) {
        return Err(FeedbackError::SeedNode { node: v });
    }
    let t_v = cascade.activation_time(v);
    let terms = g
        .in_edges(v)
        .iter()
        .map(|&e| {
            let u = g.source(e);
            match (cascade.activation_time(u), t_v) {
                (None, _) => EdgeTerm::None,
                (Some(t_u), Some(t_v)) => {
                    if t_u + 2 <= t_v {
                        EdgeTerm::Failure
                    } else if t_u + 1 == t_v {
                        EdgeTerm::Success
                    } else {
                        EdgeTerm::None
                    }
                }
                // v never activated: every active parent's attempt failed.
                (Some(_), None) => EdgeTerm::Failure,
            }
        })
        .collect();
    Ok(terms)
}

/// Per-cascade log-likelihood of node `v` given `theta` values for its
/// in-edges (parallel to `g.in_edges(v)`):
/// `-sum(failure thetas) + ln(1 - exp(-sum(success thetas)))`,
/// the log term present only when `v` activated.
pub fn node_likelihood(
    g: &Graph,
    cascade: &Cascade,
    v: u32,
    theta: &[f64],
) -> Result<f64, FeedbackError> {
    let terms = classify_in_edges(g, cascade, v)?;
    assert_eq!(theta.len(), terms.len());
    let mut fail_sum = 0.0;
    let mut succ_sum = 0.0;
    let mut any_success = false;
    for (term, &th) in terms.iter().zip(theta) {
        match term {
            EdgeTerm::Failure => fail_sum += th,
            EdgeTerm::Success => {
                succ_sum += th;
                any_success = true;
            }
            EdgeTerm::None => {}
        }
    }
    let mut ll = -fail_sum;
    if cascade.is_active(v) {
        if !any_success || succ_sum <= 0.0 {
            return Err(FeedbackError::Singular { node: v });
        }
        ll += (1.0 - (-succ_sum).exp()).ln();
    }
    Ok(ll)
}

/// Analytic gradient of [`node_likelihood`] w.r.t. each theta component.
pub fn node_likelihood_grad(
    g: &Graph,
    cascade: &Cascade,
    v: u32,
    theta: &[f64],
) -> Result<Vec<f64>, FeedbackError> {
    let terms = classify_in_edges(g, cascade, v)?;
    assert_eq!(theta.len(), terms.len());
    let succ_sum: f64 = terms
        .iter()
        .zip(theta)
        .filter(|(t, _)| **t == EdgeTerm::Success)
        .map(|(_, &th)| th)
        .sum();
    let success_grad = if cascade.is_active(v) && terms.contains(&EdgeTerm::Success) {
        if succ_sum <= 0.0 {
            return Err(FeedbackError::Singular { node: v });
        }
        let e = (-succ_sum).exp();
        e / (1.0 - e)
    } else {
        0.0
    };
    Ok(terms
        .iter()
        .map(|t| match t {
            EdgeTerm::Failure => -1.0,
            EdgeTerm::Success => success_grad,
            EdgeTerm::None => 0.0,
        })
        .collect())
}

/// Randomized credit assignment from node activation times alone.
///
/// For each non-seed active node, exactly one edge from a uniformly chosen
/// active parent gets reward 1; every other attempted edge gets reward 0.
/// Never reads the cascade's ground-truth edge statuses.
pub fn assign_node_level_credit<R: Rng>(
    g: &Graph,
    cascade: &Cascade,
    rng: &mut R,
) -> Result<Vec<(EdgeId, bool)>, FeedbackError> {
    let mut reward = vec![false; g.edge_count()];
    for v in 0..g.node_count() as u32 {
        let t_v = match cascade.activation_time(v) {
            Some(t) if t > 0 => t,
            _ => continue,
        };
        let active_parents: Vec<EdgeId> = g
            .in_edges(v)
            .iter()
            .copied()
            .filter(|&e| cascade.activation_time(g.source(e)) == Some(t_v - 1))
            .collect();
        if active_parents.is_empty() {
            return Err(FeedbackError::CascadeIntegrity { node: v });
        }
        let credited = active_parents[rng.gen_range(0..active_parents.len())];
        reward[credited.index()] = true;
    }
    Ok(cascade
        .attempted()
        .iter()
        .map(|&e| (e, reward[e.index()]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{simulate_cascade, PossibleWorld};
    use crate::graph::Graph;
    use crate::rng::RngStream;

    fn single_edge_cascade(live: bool) -> (Graph, Cascade) {
        let g = Graph::from_edges(2, &[(0, 1, 0.5)]).unwrap();
        let w = PossibleWorld::from_status(vec![live]);
        let c = simulate_cascade(&g, &w, &[0]);
        (g, c)
    }

    #[test]
    fn edge_level_single_live() {
        let (_, c) = single_edge_cascade(true);
        let mut st = EstimatorState::new(1);
        st.update_edge_level(&c);
        assert_eq!(st.mu_hat(EdgeId(0)), 1.0);
        assert_eq!(st.trigger_count(EdgeId(0)), 1);
    }

    #[test]
    fn edge_level_frequency() {
        let mut st = EstimatorState::new(1);
        for live in [true, false, true] {
            let (_, c) = single_edge_cascade(live);
            st.update_edge_level(&c);
        }
        assert!((st.mu_hat(EdgeId(0)) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn prior_smoothing() {
        let mut st = EstimatorState::with_prior(1, 1.0, 9.0);
        assert!((st.mu_hat(EdgeId(0)) - 0.1).abs() < 1e-15);
        let (_, c) = single_edge_cascade(true);
        st.update_edge_level(&c);
        assert!((st.mu_hat(EdgeId(0)) - 2.0 / 11.0).abs() < 1e-15);
    }

    /// Diamond with both parent edges into node 3.
    fn two_parent_cascade() -> (Graph, Cascade) {
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        let w = PossibleWorld::from_status(vec![true; 4]);
        let c = simulate_cascade(&g, &w, &[0]);
        (g, c)
    }

    #[test]
    fn credit_single_parent_certain() {
        let (g, c) = single_edge_cascade(true);
        let mut rng = RngStream::new(0).rng();
        let credit = assign_node_level_credit(&g, &c, &mut rng).unwrap();
        assert_eq!(credit, vec![(EdgeId(0), true)]);
    }

    #[test]
    fn credit_failed_target_zero() {
        let (g, c) = single_edge_cascade(false);
        let mut rng = RngStream::new(0).rng();
        let credit = assign_node_level_credit(&g, &c, &mut rng).unwrap();
        assert_eq!(credit, vec![(EdgeId(0), false)]);
    }

    #[test]
    fn credit_uniform_over_two_parents() {
        let (g, c) = two_parent_cascade();
        let stream = RngStream::new(5);
        let n = 100_000u64;
        let mut credited_13 = 0usize;
        for j in 0..n {
            let mut rng = stream.child(j).rng();
            let credit = assign_node_level_credit(&g, &c, &mut rng).unwrap();
            // edge 2 is (1,3)
            if credit.iter().any(|&(e, r)| e == EdgeId(2) && r) {
                credited_13 += 1;
            }
        }
        let frac = credited_13 as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.005, "frac = {frac}");
    }

    #[test]
    fn node_level_equals_edge_level_with_unique_parents() {
        // chain: every active node has exactly one active parent
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let w = PossibleWorld::from_status(vec![true, false]);
        let c = simulate_cascade(&g, &w, &[0]);
        let mut edge = EstimatorState::new(2);
        edge.update_edge_level(&c);
        let mut node = EstimatorState::new(2);
        node.update_node_level_frequentist(&g, &c, &mut RngStream::new(0).rng()).unwrap();
        assert_eq!(edge, node);
    }

    #[test]
    fn node_level_empty_cascade_noop() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let w = PossibleWorld::from_status(vec![true, true]);
        let c = simulate_cascade(&g, &w, &[]);
        let mut st = EstimatorState::new(2);
        let before = st.clone();
        st.update_node_level_frequentist(&g, &c, &mut RngStream::new(0).rng()).unwrap();
        assert_eq!(st, before);
    }

    #[test]
    fn likelihood_hand_values() {
        // v = node 3 with parents 1 (success, t=1) and 2; build a cascade where
        // node 2 activates at t=0 (seed) so its attempt at t=1 failed, and node 3
        // activates at t=2 via node 1.
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        let w = PossibleWorld::from_status(vec![true, true, false]);
        let c = simulate_cascade(&g, &w, &[0, 2]);
        assert_eq!(c.activation_time(3), Some(2));
        assert_eq!(c.activation_time(2), Some(0));
        // in_edges(3) = [edge1 (1,3) success at t=1, edge2 (2,3) failure (t_u=0 <= t_v-2)]
        let l = node_likelihood(&g, &c, 3, &[2.0f64.ln(), 0.1]).unwrap();
        let expected = -0.1 + 0.5f64.ln();
        assert!((l - expected).abs() < 1e-12, "l = {l}");
        // without the failed parent term
        let l2 = node_likelihood(&g, &c, 3, &[2.0f64.ln(), 0.0]).unwrap();
        assert!((l2 - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn likelihood_limit_large_theta() {
        let (g, c) = single_edge_cascade(true);
        let l = node_likelihood(&g, &c, 1, &[40.0]).unwrap();
        assert!(l > -1e-12 && l <= 0.0, "l = {l}");
    }

    #[test]
    fn gradient_step_hand_value() {
        let (g, c) = single_edge_cascade(true);
        let cfg = MleConfig { eta0: 0.1, ..MleConfig::default() };
        let mut st = EstimatorState::new_mle(1, &cfg, None);
        st.set_round(1); // eta = 0.1
        if let Some(t) = st.theta.as_mut() {
            t[0] = 0.5;
        }
        st.mle_gradient_step(&g, &c, 1, &cfg).unwrap();
        let expected = 0.5 + 0.1 * ((-0.5f64).exp() / (1.0 - (-0.5f64).exp()));
        assert!((st.theta(EdgeId(0)).unwrap() - expected).abs() < 1e-9);
        assert!((st.theta(EdgeId(0)).unwrap() - 0.654149).abs() < 1e-6);
    }

    #[test]
    fn gradient_step_failure_term_linear() {
        let (g, c) = single_edge_cascade(false);
        let cfg = MleConfig { eta0: 0.1, ..MleConfig::default() };
        let mut st = EstimatorState::new_mle(1, &cfg, None);
        st.set_round(1);
        if let Some(t) = st.theta.as_mut() {
            t[0] = 0.5;
        }
        st.mle_gradient_step(&g, &c, 1, &cfg).unwrap();
        assert!((st.theta(EdgeId(0)).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn gradient_step_eta_zero_noop() {
        let (g, c) = single_edge_cascade(true);
        let cfg = MleConfig { eta0: 0.0, ..MleConfig::default() };
        let mut st = EstimatorState::new_mle(1, &cfg, None);
        st.set_round(1);
        if let Some(t) = st.theta.as_mut() {
            t[0] = 0.5;
        }
        st.mle_gradient_step(&g, &c, 1, &cfg).unwrap();
        assert_eq!(st.theta(EdgeId(0)).unwrap(), 0.5);
    }

    #[test]
    fn mle_mode_invariant_mu_from_theta() {
        let cfg = MleConfig::default();
        let st = EstimatorState::new_mle(3, &cfg, Some((1.0, 9.0)));
        for e in 0..3 {
            let th = st.theta(EdgeId(e)).unwrap();
            assert!((st.mu_hat(EdgeId(e)) - (1.0 - (-th).exp())).abs() < 1e-15);
            assert!((st.mu_hat(EdgeId(e)) - 0.1).abs() < 1e-12);
        }
    }
}
