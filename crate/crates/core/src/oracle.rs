//! Influence-maximization oracles: greedy with Monte Carlo spread
//! estimation, reverse-reachable-set max coverage, and the node-weighted
//! value-spread variant used by strategic exploration.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::diffusion::{reachable, sample_world_with};
use crate::graph::Graph;
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("seed budget {k} exceeds node count {nodes}")]
    BudgetExceeded { k: usize, nodes: usize },
}

/// A reverse reachable set: the nodes with a live directed path to `root`
/// in one sampled world.
#[derive(Debug, Clone)]
pub struct RRSet {
    pub root: u32,
    pub members: Vec<u32>,
}

/// Which seed-selection oracle to run and with what sampling budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleConfig {
    /// Greedy marginal-gain selection, spreads estimated with `n_sims`
    /// Monte Carlo worlds per iteration (common random numbers).
    GreedyMc { n_sims: usize },
    /// Max coverage over `n_rr` reverse reachable sets.
    RrSet { n_rr: usize },
}

impl OracleConfig {
    /// MC budget for value-spread selection when this oracle backs
    /// strategic exploration.
    pub(crate) fn value_sims(&self) -> usize {
        match *self {
            OracleConfig::GreedyMc { n_sims } => n_sims,
            OracleConfig::RrSet { .. } => 200,
        }
    }
}

/// Dispatch on the configured oracle kind.
pub fn select_seeds(
    g: &Graph,
    probs: &[f64],
    k: usize,
    cfg: OracleConfig,
    stream: RngStream,
) -> Result<Vec<u32>, OracleError> {
    match cfg {
        OracleConfig::GreedyMc { n_sims } => greedy_select(g, probs, k, n_sims, stream),
        OracleConfig::RrSet { n_rr } => {
            check_budget(g, k)?;
            let sets = rr_generate(g, probs, n_rr, stream);
            Ok(rr_select(&sets, k, g.node_count()))
        }
    }
}

fn check_budget(g: &Graph, k: usize) -> Result<(), OracleError> {
    if k > g.node_count() {
        return Err(OracleError::BudgetExceeded { k, nodes: g.node_count() });
    }
    Ok(())
}

/// Greedy seed selection by maximal marginal MC-estimated spread gain.
/// Ties break to the lowest node id.
pub fn greedy_select(
    g: &Graph,
    probs: &[f64],
    k: usize,
    n_sims: usize,
    stream: RngStream,
) -> Result<Vec<u32>, OracleError> {
    let ones = vec![1.0; g.node_count()];
    value_spread_select(g, probs, &ones, k, n_sims, stream)
}

/// Greedy selection maximizing marginal *value-spread* gain: spread where
/// each activated node contributes `node_value[v]` instead of 1.
///
/// Each greedy iteration shares one batch of sampled worlds across all
/// candidates, so gain comparisons use common random numbers.
pub fn value_spread_select(
    g: &Graph,
    probs: &[f64],
    node_value: &[f64],
    k: usize,
    n_sims: usize,
    stream: RngStream,
) -> Result<Vec<u32>, OracleError> {
    check_budget(g, k)?;
    assert!(n_sims >= 1);
    let n = g.node_count();
    let mut chosen: Vec<u32> = Vec::with_capacity(k);
    for iter in 0..k {
        let iter_stream = stream.child(iter as u64);
        // Per-sim candidate gains, collected in sim order so the final sum
        // does not depend on worker scheduling.
        let per_sim: Vec<Vec<f64>> = (0..n_sims as u64)
            .into_par_iter()
            .map(|j| {
                let mut rng = iter_stream.child(j).rng();
                let world = sample_world_with(g, probs, &mut rng);
                let base = reachable(g, &world, &chosen);
                let mut gains = vec![0.0; n];
                let mut visited = vec![false; n];
                let mut stack: Vec<u32> = Vec::new();
                for v in 0..n as u32 {
                    if base[v as usize] {
                        continue;
                    }
                    // marginal value reached from v over live edges, skipping base
                    visited.iter_mut().for_each(|x| *x = false);
                    visited[v as usize] = true;
                    stack.push(v);
                    let mut gain = node_value[v as usize];
                    while let Some(u) = stack.pop() {
                        for &e in g.out_edges(u) {
                            if world.is_live(e) {
                                let w = g.target(e);
                                if !base[w as usize] && !visited[w as usize] {
                                    visited[w as usize] = true;
                                    gain += node_value[w as usize];
                                    stack.push(w);
                                }
                            }
                        }
                    }
                    gains[v as usize] = gain;
                }
                gains
            })
            .collect();
        let mut totals = vec![0.0f64; n];
        for gains in &per_sim {
            for (t, &x) in totals.iter_mut().zip(gains) {
                *t += x;
            }
        }
        let mut best: Option<(u32, f64)> = None;
        for v in 0..n as u32 {
            if chosen.contains(&v) {
                continue;
            }
            let gain = totals[v as usize];
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((v, gain));
            }
        }
        chosen.push(best.expect("k <= node_count leaves a candidate").0);
    }
    Ok(chosen)
}

/// Greedy selection with a caller-supplied spread estimator; used to swap
/// exact enumeration in for MC in tests.
pub fn greedy_select_with<F>(g: &Graph, k: usize, mut spread: F) -> Result<Vec<u32>, OracleError>
where
    F: FnMut(&[u32]) -> f64,
{
    check_budget(g, k)?;
    let mut chosen: Vec<u32> = Vec::with_capacity(k);
    for _ in 0..k {
        let base = spread(&chosen);
        let mut best: Option<(u32, f64)> = None;
        for v in 0..g.node_count() as u32 {
            if chosen.contains(&v) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(v);
            let gain = spread(&trial) - base;
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((v, gain));
            }
        }
        chosen.push(best.expect("k <= node_count leaves a candidate").0);
    }
    Ok(chosen)
}

/// Generate `n_rr` reverse reachable sets under `probs`: pick a root
/// uniformly at random, then reverse-BFS with lazy edge sampling.
pub fn rr_generate(g: &Graph, probs: &[f64], n_rr: usize, stream: RngStream) -> Vec<RRSet> {
    (0..n_rr as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream.child(j).rng();
            let root = rng.gen_range(0..g.node_count() as u32);
            rr_sample_rooted(g, probs, root, &mut rng)
        })
        .collect()
}

/// One RR set with a fixed root; exposed for estimator checks.
pub fn rr_sample_rooted<R: Rng>(g: &Graph, probs: &[f64], root: u32, rng: &mut R) -> RRSet {
    let mut in_set = vec![false; g.node_count()];
    in_set[root as usize] = true;
    let mut members = vec![root];
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        for &e in g.in_edges(v) {
            let u = g.source(e);
            if !in_set[u as usize] && rng.gen::<f64>() < probs[e.index()] {
                in_set[u as usize] = true;
                members.push(u);
                stack.push(u);
            }
        }
    }
    members.sort_unstable();
    RRSet { root, members }
}

/// Greedy max coverage over the RR multiset: repeatedly pick the node
/// covering the most uncovered sets. Ties break to the lowest node id.
pub fn rr_select(rr_sets: &[RRSet], k: usize, node_count: usize) -> Vec<u32> {
    let mut covered = vec![false; rr_sets.len()];
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k.min(node_count) {
        let mut counts = vec![0usize; node_count];
        for (i, set) in rr_sets.iter().enumerate() {
            if covered[i] {
                continue;
            }
            for &v in &set.members {
                counts[v as usize] += 1;
            }
        }
        let mut best: Option<(u32, usize)> = None;
        for v in 0..node_count as u32 {
            if chosen.contains(&v) {
                continue;
            }
            let c = counts[v as usize];
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((v, c));
            }
        }
        let (pick, _) = match best {
            Some(b) => b,
            None => break,
        };
        chosen.push(pick);
        for (i, set) in rr_sets.iter().enumerate() {
            if !covered[i] && set.members.binary_search(&pick).is_ok() {
                covered[i] = true;
            }
        }
    }
    chosen
}
