//! Shared fixtures for the benchmark suite.

use imbandits::{Graph, RngStream};
use rand::Rng;

/// Random directed graph with roughly `avg_out_degree` out-edges per node,
/// weighted-cascade probabilities.
pub fn random_graph(nodes: u32, avg_out_degree: usize, seed: u64) -> Graph {
    let mut rng = RngStream::new(seed).rng();
    let mut triples = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for u in 0..nodes {
        for _ in 0..avg_out_degree {
            let v = rng.gen_range(0..nodes);
            if v != u && seen.insert((u, v)) {
                triples.push((u, v, 0.0));
            }
        }
    }
    Graph::from_edges(nodes as usize, &triples)
        .expect("generated edges are valid")
        .assign_weighted_cascade()
}
