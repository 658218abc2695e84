//! Directed graph with per-edge influence probabilities.
//!
//! Nodes carry dense ids; edges are identified by their position in load
//! order so per-edge arrays (estimates, trigger counts, world bitmaps) index
//! directly by [`EdgeId`].

use thiserror::Error;

/// Dense index of one directed edge; one base arm of the bandit game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: malformed edge line {text:?}")]
    Parse { line: usize, text: String },
    #[error("line {line}: probability {value} outside [0,1]")]
    ProbRange { line: usize, value: f64 },
    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: u64, v: u64 },
    #[error("line {line}: self-loop at node {u}")]
    SelfLoop { line: usize, u: u64 },
    #[error("no correlation decay: some node's incoming probability sum is >= 1")]
    NoDecay,
    #[error("probability {0} outside [0,1]")]
    BadProbability(f64),
}

/// Immutable directed graph `G = (V, E, P)`.
///
/// `true_prob` holds the hidden environment probabilities; learners only see
/// them through sampled cascades.
#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(u32, u32)>,
    true_prob: Vec<f64>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    /// Original label of each dense node id, in ascending label order.
    node_labels: Vec<u64>,
}

impl Graph {
    /// Build a graph from a list of `(u, v, p)` triples with dense node ids.
    pub fn from_edges(node_count: usize, triples: &[(u32, u32, f64)]) -> Result<Graph, GraphError> {
        let mut g = Graph {
            node_count,
            edges: Vec::with_capacity(triples.len()),
            true_prob: Vec::with_capacity(triples.len()),
            out_adj: vec![Vec::new(); node_count],
            in_adj: vec![Vec::new(); node_count],
            node_labels: (0..node_count as u64).collect(),
        };
        let mut seen = std::collections::HashSet::new();
        for (i, &(u, v, p)) in triples.iter().enumerate() {
            if u == v {
                return Err(GraphError::SelfLoop { line: i + 1, u: u as u64 });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(GraphError::ProbRange { line: i + 1, value: p });
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge {
                    line: i + 1,
                    u: u as u64,
                    v: v as u64,
                });
            }
            let id = EdgeId(i as u32);
            g.edges.push((u, v));
            g.true_prob.push(p);
            g.out_adj[u as usize].push(id);
            g.in_adj[v as usize].push(id);
        }
        Ok(g)
    }

    /// Parse an edge-list text: lines `u v` or `u v p`, `#` comments.
    ///
    /// Sparse node labels are remapped to dense ids in ascending label order;
    /// the original labels are kept in [`Graph::node_labels`]. Edges without a
    /// probability get `default_prob` if given, else 0 pending assignment.
    pub fn load_edge_list(text: &str, default_prob: Option<f64>) -> Result<Graph, GraphError> {
        let mut raw: Vec<(u64, u64, f64, usize)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_num = lineno + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut it = body.split_whitespace();
            let parse_err = || GraphError::Parse {
                line: line_num,
                text: line.to_string(),
            };
            let u: u64 = it.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
            let v: u64 = it.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
            let p = match it.next() {
                Some(tok) => {
                    let p: f64 = tok.parse().map_err(|_| parse_err())?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(GraphError::ProbRange { line: line_num, value: p });
                    }
                    p
                }
                None => default_prob.unwrap_or(0.0),
            };
            if it.next().is_some() {
                return Err(parse_err());
            }
            if u == v {
                return Err(GraphError::SelfLoop { line: line_num, u });
            }
            raw.push((u, v, p, line_num));
        }

        let mut labels: Vec<u64> = raw.iter().flat_map(|&(u, v, _, _)| [u, v]).collect();
        labels.sort_unstable();
        labels.dedup();
        let index_of = |label: u64| labels.binary_search(&label).unwrap() as u32;

        let mut seen = std::collections::HashSet::new();
        let mut triples = Vec::with_capacity(raw.len());
        for &(u, v, p, line) in &raw {
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge { line, u, v });
            }
            triples.push((index_of(u), index_of(v), p));
        }
        let mut g = Graph::from_edges(labels.len(), &triples)?;
        g.node_labels = labels;
        Ok(g)
    }

    /// Render back to edge-list text; probabilities print in shortest
    /// round-trip form, so load ∘ serialize is exact.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {}\n",
                self.node_labels[u as usize], self.node_labels[v as usize], self.true_prob[i]
            ));
        }
        out
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    /// `(source, target)` of an edge, dense node ids.
    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (u32, u32) {
        self.edges[e.index()]
    }

    #[inline]
    pub fn source(&self, e: EdgeId) -> u32 {
        self.edges[e.index()].0
    }

    #[inline]
    pub fn target(&self, e: EdgeId) -> u32 {
        self.edges[e.index()].1
    }

    #[inline]
    pub fn out_edges(&self, u: u32) -> &[EdgeId] {
        &self.out_adj[u as usize]
    }

    #[inline]
    pub fn in_edges(&self, v: u32) -> &[EdgeId] {
        &self.in_adj[v as usize]
    }

    #[inline]
    pub fn true_prob(&self, e: EdgeId) -> f64 {
        self.true_prob[e.index()]
    }

    pub fn true_probs(&self) -> &[f64] {
        &self.true_prob
    }

    pub fn node_labels(&self) -> &[u64] {
        &self.node_labels
    }

    /// Weighted cascade assignment: `p(u,v) = 1 / in-degree(v)`.
    pub fn assign_weighted_cascade(mut self) -> Graph {
        for e in 0..self.edges.len() {
            let v = self.edges[e].1;
            self.true_prob[e] = 1.0 / self.in_adj[v as usize].len() as f64;
        }
        self
    }

    /// Set every edge to the same probability.
    pub fn assign_constant(mut self, p: f64) -> Result<Graph, GraphError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::BadProbability(p));
        }
        self.true_prob.fill(p);
        Ok(self)
    }

    /// Multiply every probability by `factor` in (0,1]; used to make the
    /// correlation-decay bound non-degenerate (weighted-cascade in-sums
    /// are exactly 1 otherwise).
    pub fn scale_probs(mut self, factor: f64) -> Result<Graph, GraphError> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(GraphError::BadProbability(factor));
        }
        for p in &mut self.true_prob {
            *p *= factor;
        }
        Ok(self)
    }

    /// Correlation decay γ = 1 − max over nodes of the incoming probability
    /// sum. Errors when some node's incoming sum reaches 1 (no valid γ).
    pub fn correlation_decay(&self) -> Result<f64, GraphError> {
        let mut max_in_sum = 0.0f64;
        for v in 0..self.node_count {
            let s: f64 = self.in_adj[v].iter().map(|&e| self.true_prob[e.index()]).sum();
            max_in_sum = max_in_sum.max(s);
        }
        if max_in_sum >= 1.0 {
            return Err(GraphError::NoDecay);
        }
        Ok(1.0 - max_in_sum)
    }
}
