//! Independent cascade diffusion: possible worlds, cascade records, and
//! spread estimation (Monte Carlo and exact enumeration).

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{EdgeId, Graph};
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("exact spread enumerates 2^|E| worlds; {edges} edges exceed the cap of {cap}")]
    TooManyEdges { edges: usize, cap: usize },
    #[error("exact spread supports at most 64 nodes, graph has {0}")]
    TooManyNodes(usize),
}

const EXACT_EDGE_CAP: usize = 25;

/// A deterministic world: each edge is live or dead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibleWorld {
    live: Vec<bool>,
}

impl PossibleWorld {
    #[inline]
    pub fn is_live(&self, e: EdgeId) -> bool {
        self.live[e.index()]
    }

    pub fn from_status(live: Vec<bool>) -> Self {
        PossibleWorld { live }
    }
}

/// One round's diffusion record.
///
/// `activation_time` and `seeds` are observable at node level; the ground
/// truth `live_status` of attempted edges is only readable through
/// [`Cascade::live_status`], which node-level feedback must not call.
#[derive(Debug, Clone)]
pub struct Cascade {
    activation_time: Vec<Option<u32>>,
    seeds: Vec<u32>,
    attempted: Vec<EdgeId>,
    live_status: Vec<Option<bool>>,
}

impl Cascade {
    #[inline]
    pub fn activation_time(&self, v: u32) -> Option<u32> {
        self.activation_time[v as usize]
    }

    #[inline]
    pub fn is_active(&self, v: u32) -> bool {
        self.activation_time[v as usize].is_some()
    }

    pub fn seeds(&self) -> &[u32] {
        &self.seeds
    }

    /// Attempted edges (arms triggered this round), in edge-id order.
    pub fn attempted(&self) -> &[EdgeId] {
        &self.attempted
    }

    /// Ground-truth status of an attempted edge. Edge-level feedback only.
    pub fn live_status(&self, e: EdgeId) -> Option<bool> {
        self.live_status[e.index()]
    }

    /// Number of active nodes at the end of the diffusion.
    pub fn spread(&self) -> usize {
        self.activation_time.iter().filter(|t| t.is_some()).count()
    }

    /// Largest activation timestep.
    pub fn horizon(&self) -> u32 {
        self.activation_time.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Debug dump: active nodes with times, then attempted edges with status.
    pub fn dump(&self, g: &Graph) -> String {
        let mut out = String::new();
        for v in 0..g.node_count() as u32 {
            if let Some(t) = self.activation_time(v) {
                out.push_str(&format!("{v} {t}\n"));
            }
        }
        for &e in &self.attempted {
            let (u, v) = g.endpoints(e);
            let status = if self.live_status[e.index()] == Some(true) { "live" } else { "dead" };
            out.push_str(&format!("{u} {v} {status}\n"));
        }
        out
    }
}

/// Sample a full possible world under `probs`.
pub fn sample_world_with<R: Rng>(g: &Graph, probs: &[f64], rng: &mut R) -> PossibleWorld {
    debug_assert_eq!(probs.len(), g.edge_count());
    let live = probs.iter().map(|&p| rng.gen::<f64>() < p).collect();
    PossibleWorld { live }
}

/// Sample a world from the hidden true probabilities.
pub fn sample_world<R: Rng>(g: &Graph, rng: &mut R) -> PossibleWorld {
    sample_world_with(g, g.true_probs(), rng)
}

/// Run the IC process on a fixed world: discrete-timestep BFS over live
/// edges. Every out-edge of an active node is attempted exactly once.
pub fn simulate_cascade(g: &Graph, world: &PossibleWorld, seeds: &[u32]) -> Cascade {
    let n = g.node_count();
    let mut activation_time = vec![None; n];
    let mut seeds_sorted: Vec<u32> = seeds.to_vec();
    seeds_sorted.sort_unstable();
    seeds_sorted.dedup();

    let mut frontier: Vec<u32> = Vec::new();
    for &s in &seeds_sorted {
        activation_time[s as usize] = Some(0);
        frontier.push(s);
    }

    let mut attempted: Vec<EdgeId> = Vec::new();
    let mut live_status = vec![None; g.edge_count()];
    let mut t = 0u32;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &e in g.out_edges(u) {
                attempted.push(e);
                let live = world.is_live(e);
                live_status[e.index()] = Some(live);
                let v = g.target(e);
                if live && activation_time[v as usize].is_none() {
                    activation_time[v as usize] = Some(t + 1);
                    next.push(v);
                }
            }
        }
        t += 1;
        frontier = next;
    }
    attempted.sort_unstable();
    Cascade {
        activation_time,
        seeds: seeds_sorted,
        attempted,
        live_status,
    }
}

/// Forward reachability over live edges only; returns the active-node mask.
pub fn reachable(g: &Graph, world: &PossibleWorld, seeds: &[u32]) -> Vec<bool> {
    let mut active = vec![false; g.node_count()];
    let mut stack: Vec<u32> = Vec::new();
    for &s in seeds {
        if !active[s as usize] {
            active[s as usize] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &e in g.out_edges(u) {
            if world.is_live(e) {
                let v = g.target(e);
                if !active[v as usize] {
                    active[v as usize] = true;
                    stack.push(v);
                }
            }
        }
    }
    active
}

/// One lazily-sampled diffusion: edges are sampled only when attempted.
/// Returns the number of active nodes.
fn lazy_spread_count<R: Rng>(g: &Graph, probs: &[f64], seeds: &[u32], rng: &mut R) -> usize {
    let mut active = vec![false; g.node_count()];
    let mut stack: Vec<u32> = Vec::new();
    let mut count = 0usize;
    for &s in seeds {
        if !active[s as usize] {
            active[s as usize] = true;
            count += 1;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &e in g.out_edges(u) {
            let v = g.target(e);
            if !active[v as usize] && rng.gen::<f64>() < probs[e.index()] {
                active[v as usize] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count
}

/// Monte Carlo spread estimate under `probs` (not necessarily the truth).
///
/// Simulation `j` uses the stream `stream.child(j)`, so parallel and serial
/// runs agree bit-exactly; the reduction is an exact integer sum.
pub fn estimate_spread_mc(
    g: &Graph,
    probs: &[f64],
    seeds: &[u32],
    n_sims: usize,
    stream: RngStream,
) -> f64 {
    assert!(n_sims >= 1);
    let total: usize = (0..n_sims as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream.child(j).rng();
            lazy_spread_count(g, probs, seeds, &mut rng)
        })
        .sum();
    total as f64 / n_sims as f64
}

/// Exact expected spread by enumeration over cascade-relevant edge outcomes.
///
/// Only edges actually attempted along a branch are conditioned on, so the
/// work is bounded by 2^(attempted edges) rather than always 2^|E|.
pub fn exact_spread(g: &Graph, probs: &[f64], seeds: &[u32]) -> Result<f64, DiffusionError> {
    if g.edge_count() > EXACT_EDGE_CAP {
        return Err(DiffusionError::TooManyEdges {
            edges: g.edge_count(),
            cap: EXACT_EDGE_CAP,
        });
    }
    if g.node_count() > 64 {
        return Err(DiffusionError::TooManyNodes(g.node_count()));
    }
    let mut active: u64 = 0;
    let mut pending: Vec<EdgeId> = Vec::new();
    for &s in seeds {
        if active & (1 << s) == 0 {
            active |= 1 << s;
            pending.extend_from_slice(g.out_edges(s));
        }
    }
    let mut acc = 0.0;
    branch(g, probs, active, pending, 1.0, &mut acc);
    Ok(acc)
}

fn branch(g: &Graph, probs: &[f64], mut active: u64, mut pending: Vec<EdgeId>, mut w: f64, acc: &mut f64) {
    while let Some(e) = pending.pop() {
        let v = g.target(e);
        if active & (1 << v) != 0 {
            continue;
        }
        let p = probs[e.index()];
        if p <= 0.0 {
            continue;
        }
        if p < 1.0 {
            branch(g, probs, active, pending.clone(), w * (1.0 - p), acc);
            w *= p;
        }
        active |= 1 << v;
        pending.extend_from_slice(g.out_edges(v));
    }
    *acc += w * active.count_ones() as f64;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3(p0: f64, p1: f64) -> Graph {
        Graph::from_edges(3, &[(0, 1, p0), (1, 2, p1)]).unwrap()
    }

    #[test]
    fn world_extremes() {
        let g = path3(1.0, 1.0);
        let mut rng = RngStream::new(0).rng();
        let w = sample_world(&g, &mut rng);
        assert!(w.is_live(EdgeId(0)) && w.is_live(EdgeId(1)));
        let g0 = path3(0.0, 0.0);
        let w0 = sample_world(&g0, &mut rng);
        assert!(!w0.is_live(EdgeId(0)) && !w0.is_live(EdgeId(1)));
    }

    #[test]
    fn world_live_fraction() {
        let g = Graph::from_edges(2, &[(0, 1, 0.5)]).unwrap();
        let stream = RngStream::new(42);
        let n = 100_000u64;
        let live = (0..n)
            .filter(|&j| sample_world(&g, &mut stream.child(j).rng()).is_live(EdgeId(0)))
            .count();
        let frac = live as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.005, "frac = {frac}");
    }

    #[test]
    fn cascade_chain_all_live() {
        let g = path3(1.0, 1.0);
        let w = PossibleWorld::from_status(vec![true, true]);
        let c = simulate_cascade(&g, &w, &[0]);
        assert_eq!(c.activation_time(0), Some(0));
        assert_eq!(c.activation_time(1), Some(1));
        assert_eq!(c.activation_time(2), Some(2));
        assert_eq!(c.attempted(), &[EdgeId(0), EdgeId(1)]);
        assert_eq!(c.live_status(EdgeId(0)), Some(true));
        assert_eq!(c.live_status(EdgeId(1)), Some(true));
    }

    #[test]
    fn cascade_dead_edge_blocks() {
        let g = path3(1.0, 1.0);
        let w = PossibleWorld::from_status(vec![false, true]);
        let c = simulate_cascade(&g, &w, &[0]);
        assert_eq!(c.spread(), 1);
        assert_eq!(c.attempted(), &[EdgeId(0)]);
        assert_eq!(c.live_status(EdgeId(0)), Some(false));
        assert_eq!(c.live_status(EdgeId(1)), None);
    }

    #[test]
    fn cascade_diamond() {
        // 0->1, 0->2, 1->3, 2->3 all live
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        let w = PossibleWorld::from_status(vec![true; 4]);
        let c = simulate_cascade(&g, &w, &[0]);
        assert_eq!(c.activation_time(3), Some(2));
        assert_eq!(c.activation_time(1), Some(1));
        assert_eq!(c.activation_time(2), Some(1));
        assert_eq!(c.attempted().len(), 4);
    }

    #[test]
    fn exact_path_half() {
        let g = path3(0.5, 0.5);
        let sigma = exact_spread(&g, g.true_probs(), &[0]).unwrap();
        assert!((sigma - 1.75).abs() < 1e-12);
    }

    #[test]
    fn exact_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1, 0.3)]).unwrap();
        let sigma = exact_spread(&g, g.true_probs(), &[0]).unwrap();
        assert!((sigma - 1.3).abs() < 1e-12);
    }

    #[test]
    fn exact_empty_seeds() {
        let g = path3(0.5, 0.5);
        assert_eq!(exact_spread(&g, g.true_probs(), &[]).unwrap(), 0.0);
    }

    #[test]
    fn exact_edge_cap() {
        let triples: Vec<(u32, u32, f64)> = (0..26).map(|i| (i, i + 1, 0.5)).collect();
        let g = Graph::from_edges(27, &triples).unwrap();
        assert!(matches!(
            exact_spread(&g, g.true_probs(), &[0]),
            Err(DiffusionError::TooManyEdges { .. })
        ));
    }

    #[test]
    fn mc_matches_exact_on_path() {
        let g = path3(0.5, 0.5);
        let est = estimate_spread_mc(&g, g.true_probs(), &[0], 100_000, RngStream::new(1));
        assert!((est - 1.75).abs() < 0.01, "est = {est}");
    }

    #[test]
    fn mc_all_seeds_is_node_count() {
        let g = path3(0.5, 0.5);
        let est = estimate_spread_mc(&g, g.true_probs(), &[0, 1, 2], 10, RngStream::new(1));
        assert_eq!(est, 3.0);
    }

    #[test]
    fn mc_zero_probs_is_seed_count() {
        let g = path3(0.0, 0.0);
        let est = estimate_spread_mc(&g, g.true_probs(), &[0], 10, RngStream::new(1));
        assert_eq!(est, 1.0);
    }

    #[test]
    fn mc_deterministic() {
        let g = path3(0.5, 0.5);
        let a = estimate_spread_mc(&g, g.true_probs(), &[0], 1000, RngStream::new(9));
        let b = estimate_spread_mc(&g, g.true_probs(), &[0], 1000, RngStream::new(9));
        assert_eq!(a, b);
    }
}
