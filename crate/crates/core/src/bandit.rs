//! The CMAB game loop: seed-selection strategies, superarm play, feedback
//! dispatch, and regret accounting.

use rand::Rng;
use thiserror::Error;

use crate::diffusion::{sample_world, simulate_cascade};
use crate::feedback::{EstimatorState, FeedbackError, MleConfig};
use crate::graph::Graph;
use crate::metrics::{fraction_within, relative_l2_error, MetricsRow};
use crate::oracle::{select_seeds, value_spread_select, OracleConfig, OracleError};
use crate::rng::RngStream;

// Stream tags inside one game; keeps the world sequence identical across
// feedback mechanisms and strategies.
const STREAM_WORLD: u64 = 0;
const STREAM_STRATEGY: u64 = 1;
const STREAM_CREDIT: u64 = 2;
const STREAM_BENCHMARK: u64 = 3;

#[derive(Debug, Error)]
pub enum BanditError {
    #[error("invalid strategy config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyKind {
    Cucb,
    EpsilonGreedy { omega: f64 },
    InitialExploration { zeta: f64 },
    PureExploitation,
    RandomExploration,
    StrategicExploration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMode {
    EdgeLevel,
    NodeLevelFrequentist,
    NodeLevelMle,
}

#[derive(Debug, Clone, Copy)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub feedback: FeedbackMode,
    pub k: usize,
    pub rounds: u64,
    pub prior: Option<(f64, f64)>,
    pub mle: MleConfig,
}

impl StrategyConfig {
    pub fn validate(&self, g: &Graph) -> Result<(), BanditError> {
        if self.k == 0 || self.k > g.node_count() {
            return Err(BanditError::InvalidConfig(format!(
                "budget k={} must be in 1..={}",
                self.k,
                g.node_count()
            )));
        }
        if self.rounds == 0 {
            return Err(BanditError::InvalidConfig("rounds must be >= 1".into()));
        }
        match self.kind {
            StrategyKind::EpsilonGreedy { omega } if omega <= 0.0 => {
                return Err(BanditError::InvalidConfig("omega must be positive".into()));
            }
            StrategyKind::InitialExploration { zeta } if !(0.0..=1.0).contains(&zeta) => {
                return Err(BanditError::InvalidConfig("zeta must lie in [0,1]".into()));
            }
            _ => {}
        }
        if let Some((a, b)) = self.prior {
            if a <= 0.0 || b <= 0.0 {
                return Err(BanditError::InvalidConfig("prior parameters must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub seeds: Vec<u32>,
    pub superarm_size: usize,
    pub metrics: MetricsRow,
}

#[derive(Debug, Clone)]
pub struct GameResult {
    pub rounds: Vec<RoundRecord>,
    pub benchmark_seeds: Vec<u32>,
    pub estimator: EstimatorState,
}

/// Pick `k` distinct nodes uniformly at random (partial Fisher-Yates).
pub fn explore<R: Rng>(g: &Graph, k: usize, rng: &mut R) -> Vec<u32> {
    let n = g.node_count();
    assert!(k <= n);
    let mut pool: Vec<u32> = (0..n as u32).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// Oracle seed set under the estimator's current means.
pub fn exploit(
    g: &Graph,
    estimator: &EstimatorState,
    oracle_cfg: OracleConfig,
    k: usize,
    stream: RngStream,
) -> Result<Vec<u32>, BanditError> {
    Ok(select_seeds(g, estimator.mu_hats(), k, oracle_cfg, stream)?)
}

/// CUCB adjusted means: `mu_hat + sqrt(3 ln s / (2 T_i))`, capped at 1;
/// untriggered arms are optimistically set to 1.
pub fn cucb_adjust(estimator: &EstimatorState, s: u64) -> Vec<f64> {
    assert!(s >= 1);
    let ln_s = (s as f64).ln();
    estimator
        .mu_hats()
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let t = estimator.trigger_count(crate::graph::EdgeId(i as u32));
            if t == 0 {
                1.0
            } else {
                (mu + (3.0 * ln_s / (2.0 * t as f64)).sqrt()).min(1.0)
            }
        })
        .collect()
}

/// Exploration value of a node: `sum over out-edges of 1 / (T_i + 1)`.
pub fn node_value(estimator: &EstimatorState, g: &Graph, u: u32) -> f64 {
    g.out_edges(u)
        .iter()
        .map(|&e| 1.0 / (estimator.trigger_count(e) as f64 + 1.0))
        .sum()
}

/// Seed set for round `s` under the configured strategy.
#[allow(clippy::too_many_arguments)]
pub fn choose_superarm(
    kind: StrategyKind,
    s: u64,
    total_rounds: u64,
    g: &Graph,
    estimator: &EstimatorState,
    oracle_cfg: OracleConfig,
    k: usize,
    stream: RngStream,
) -> Result<Vec<u32>, BanditError> {
    match kind {
        StrategyKind::Cucb => {
            let adjusted = cucb_adjust(estimator, s);
            Ok(select_seeds(g, &adjusted, k, oracle_cfg, stream)?)
        }
        StrategyKind::EpsilonGreedy { omega } => {
            let eps = (omega / s as f64).min(1.0);
            let mut rng = stream.child(0).rng();
            if rng.gen::<f64>() < eps {
                Ok(explore(g, k, &mut rng))
            } else {
                exploit(g, estimator, oracle_cfg, k, stream.child(1))
            }
        }
        StrategyKind::InitialExploration { zeta } => {
            if s as f64 <= zeta * total_rounds as f64 {
                Ok(explore(g, k, &mut stream.child(0).rng()))
            } else {
                exploit(g, estimator, oracle_cfg, k, stream.child(1))
            }
        }
        StrategyKind::PureExploitation => exploit(g, estimator, oracle_cfg, k, stream),
        StrategyKind::RandomExploration => Ok(explore(g, k, &mut stream.rng())),
        StrategyKind::StrategicExploration => {
            let values: Vec<f64> =
                (0..g.node_count() as u32).map(|u| node_value(estimator, g, u)).collect();
            Ok(value_spread_select(
                g,
                estimator.mu_hats(),
                &values,
                k,
                oracle_cfg.value_sims(),
                stream,
            )?)
        }
    }
}

fn make_estimator(g: &Graph, cfg: &StrategyConfig) -> EstimatorState {
    match (cfg.feedback, cfg.prior) {
        (FeedbackMode::NodeLevelMle, prior) => EstimatorState::new_mle(g.edge_count(), &cfg.mle, prior),
        (_, Some((a, b))) => EstimatorState::with_prior(g.edge_count(), a, b),
        (_, None) => EstimatorState::new(g.edge_count()),
    }
}

/// Play one full CMAB game.
///
/// The benchmark seed set is computed once up front by the oracle on the
/// true probabilities; each round samples one true world and evaluates both
/// the learned and benchmark seed sets on it, so regret is their realized
/// spread difference. Fully deterministic given `master_seed`.
pub fn run_game(
    g: &Graph,
    strategy: &StrategyConfig,
    oracle_cfg: OracleConfig,
    master_seed: u64,
) -> Result<GameResult, BanditError> {
    strategy.validate(g)?;
    let root = RngStream::new(master_seed);
    let benchmark_seeds = select_seeds(
        g,
        g.true_probs(),
        strategy.k,
        oracle_cfg,
        root.child(STREAM_BENCHMARK),
    )?;

    let mut estimator = make_estimator(g, strategy);
    let mut rounds = Vec::with_capacity(strategy.rounds as usize);
    let mut cum_regret = 0.0;
    for s in 1..=strategy.rounds {
        estimator.set_round(s);
        let seeds = choose_superarm(
            strategy.kind,
            s,
            strategy.rounds,
            g,
            &estimator,
            oracle_cfg,
            strategy.k,
            root.child(STREAM_STRATEGY).child(s),
        )?;
        let superarm_size: usize = seeds.iter().map(|&u| g.out_edges(u).len()).sum();

        let world = sample_world(g, &mut root.child(STREAM_WORLD).child(s).rng());
        let cascade = simulate_cascade(g, &world, &seeds);
        let spread_learned = cascade.spread() as f64;

        match strategy.feedback {
            FeedbackMode::EdgeLevel => estimator.update_edge_level(&cascade),
            FeedbackMode::NodeLevelFrequentist => {
                let mut rng = root.child(STREAM_CREDIT).child(s).rng();
                estimator.update_node_level_frequentist(g, &cascade, &mut rng)?;
            }
            FeedbackMode::NodeLevelMle => {
                estimator.update_node_level_mle(g, &cascade, &strategy.mle)?;
            }
        }

        let bench_cascade = simulate_cascade(g, &world, &benchmark_seeds);
        let spread_true = bench_cascade.spread() as f64;
        let regret = spread_true - spread_learned;
        cum_regret += regret;

        let l2 = relative_l2_error(estimator.mu_hats(), g.true_probs())?;
        let frac10 = fraction_within(estimator.mu_hats(), g.true_probs(), 0.1);
        rounds.push(RoundRecord {
            seeds,
            superarm_size,
            metrics: MetricsRow {
                round: s,
                spread_learned,
                spread_true,
                regret,
                cum_avg_regret: cum_regret / s as f64,
                l2_rel_error: l2,
                frac_within_10: frac10,
            },
        });
    }
    Ok(GameResult {
        rounds,
        benchmark_seeds,
        estimator,
    })
}
