//! Experiment runner and bound calculators.
//!
//! `imbandits run` plays the bandit game across seeds and emits per-round
//! metrics as CSV; `imbandits bounds` exposes the closed-form calculators.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use imbandits::bandit::run_game;
use imbandits::metrics::{
    failure_prob_bound, fraction_within, mle_loss_gap_bound, sample_complexity_bound,
};
use imbandits::{
    FeedbackMode, GameResult, Graph, MleConfig, OracleConfig, RngStream, StrategyConfig,
    StrategyKind,
};

#[derive(Parser)]
#[command(name = "imbandits", about = "Influence maximization bandit experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a bandit experiment and write per-round metrics as CSV.
    Run(RunArgs),
    /// Closed-form bound calculators.
    Bounds {
        #[command(subcommand)]
        which: BoundsCmd,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Edge-list file: lines "u v" or "u v p", '#' comments.
    #[arg(long)]
    graph: PathBuf,
    /// Probability assignment: wc | const:<p> | file
    #[arg(long, default_value = "wc")]
    assign: String,
    /// Strategy: cucb | eg | ie | pe | re | se
    #[arg(long)]
    algo: String,
    /// Feedback mechanism: el | nlf | nlml
    #[arg(long, default_value = "el")]
    feedback: String,
    /// Seed budget per round.
    #[arg(long)]
    k: usize,
    /// Number of CMAB rounds.
    #[arg(long)]
    rounds: u64,
    /// Epsilon-greedy exploration parameter (epsilon_s = omega / s).
    #[arg(long, default_value_t = 5.0)]
    omega: f64,
    /// Initial-exploration fraction of rounds spent exploring.
    #[arg(long, default_value_t = 0.2)]
    zeta: f64,
    /// Beta prior pseudo-counts "alpha,beta".
    #[arg(long)]
    prior: Option<String>,
    /// Oracle: greedy:<n_sims> | rr:<n_rr>
    #[arg(long, default_value = "rr:10000")]
    oracle: String,
    /// Number of independent runs (each with a derived master seed).
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also sweep the fraction-within threshold p over 5%..50% into
    /// <out>.roc.csv, computed on the final estimates.
    #[arg(long, default_value_t = false)]
    roc: bool,
    /// Scale all true probabilities by this factor in (0,1].
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Credit-assignment failure probability upper bound.
    FailureProb {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        pmin: f64,
        #[arg(long)]
        pmax: f64,
    },
    /// Cascades needed for edge-level random exploration.
    SampleComplexity {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        pstar: f64,
    },
    /// Online-vs-batch MLE cumulative likelihood gap bound.
    MleGap {
        #[arg(long)]
        dv: usize,
        #[arg(long)]
        thetamax: f64,
        #[arg(long = "T")]
        t: u64,
        #[arg(long = "G")]
        g: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => match run_experiment(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(Failure::Config(msg)) => {
                eprintln!("error: {msg}");
                eprintln!("run `imbandits run --help` for usage");
                ExitCode::from(2)
            }
            Err(Failure::Io(err)) => {
                eprintln!("I/O error: {err}");
                ExitCode::from(1)
            }
        },
        Cmd::Bounds { which } => match run_bounds(which) {
            Ok(value) => {
                println!("{}", format_sig(value, 6));
                ExitCode::SUCCESS
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn parse_strategy(args: &RunArgs) -> Result<StrategyKind, Failure> {
    Ok(match args.algo.as_str() {
        "cucb" => StrategyKind::Cucb,
        "eg" => StrategyKind::EpsilonGreedy { omega: args.omega },
        "ie" => StrategyKind::InitialExploration { zeta: args.zeta },
        "pe" => StrategyKind::PureExploitation,
        "re" => StrategyKind::RandomExploration,
        "se" => StrategyKind::StrategicExploration,
        other => return config_err(format!("unknown --algo value {other:?} (expected cucb|eg|ie|pe|re|se)")),
    })
}

fn parse_feedback(s: &str) -> Result<FeedbackMode, Failure> {
    Ok(match s {
        "el" => FeedbackMode::EdgeLevel,
        "nlf" => FeedbackMode::NodeLevelFrequentist,
        "nlml" => FeedbackMode::NodeLevelMle,
        other => return config_err(format!("unknown --feedback value {other:?} (expected el|nlf|nlml)")),
    })
}

fn parse_oracle(s: &str) -> Result<OracleConfig, Failure> {
    let bad = || Failure::Config(format!("unknown --oracle value {s:?} (expected greedy:<sims> or rr:<n>)"));
    let (kind, count) = s.split_once(':').ok_or_else(bad)?;
    let n: usize = count.parse().map_err(|_| bad())?;
    if n == 0 {
        return config_err("oracle sample count must be >= 1");
    }
    match kind {
        "greedy" => Ok(OracleConfig::GreedyMc { n_sims: n }),
        "rr" => Ok(OracleConfig::RrSet { n_rr: n }),
        _ => Err(bad()),
    }
}

fn parse_prior(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Config(format!("invalid --prior {s:?} (expected \"alpha,beta\")"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let alpha: f64 = a.trim().parse().map_err(|_| bad())?;
    let beta: f64 = b.trim().parse().map_err(|_| bad())?;
    if alpha <= 0.0 || beta <= 0.0 {
        return config_err("prior parameters must be positive");
    }
    Ok((alpha, beta))
}

fn load_graph(args: &RunArgs) -> Result<Graph, Failure> {
    let text = std::fs::read_to_string(&args.graph)?;
    let g = Graph::load_edge_list(&text, None).map_err(|e| Failure::Config(e.to_string()))?;
    let g = match args.assign.as_str() {
        "wc" => g.assign_weighted_cascade(),
        "file" => g,
        other => match other.strip_prefix("const:") {
            Some(p) => {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Failure::Config(format!("invalid constant probability in {other:?}")))?;
                g.assign_constant(p).map_err(|e| Failure::Config(e.to_string()))?
            }
            None => return config_err(format!("unknown --assign value {other:?} (expected wc|const:<p>|file)")),
        },
    };
    match args.scale {
        Some(f) => g.scale_probs(f).map_err(|e| Failure::Config(e.to_string())),
        None => Ok(g),
    }
}

fn run_experiment(args: &RunArgs) -> Result<(), Failure> {
    if args.seeds == 0 {
        return config_err("--seeds must be >= 1");
    }
    let g = load_graph(args)?;
    let strategy = StrategyConfig {
        kind: parse_strategy(args)?,
        feedback: parse_feedback(&args.feedback)?,
        k: args.k,
        rounds: args.rounds,
        prior: match &args.prior {
            Some(s) => Some(parse_prior(s)?),
            None => None,
        },
        mle: MleConfig::default(),
    };
    let oracle = parse_oracle(&args.oracle)?;
    strategy.validate(&g).map_err(|e| Failure::Config(e.to_string()))?;

    let root = RngStream::new(args.master_seed);
    let mut results: Vec<GameResult> = Vec::with_capacity(args.seeds);
    for i in 0..args.seeds {
        let r = run_game(&g, &strategy, oracle, root.child(i as u64).as_u64())
            .map_err(|e| Failure::Config(e.to_string()))?;
        results.push(r);
    }

    write_csv(&args.out, args, &results)?;
    if args.roc {
        write_roc(&roc_path(&args.out), &g, &results)?;
    }
    Ok(())
}

const CSV_HEADER: &str =
    "seed,round,algo,feedback,k,spread_learned,spread_true,regret,cum_avg_regret,l2_rel_error,frac_within_10";

fn write_csv(path: &Path, args: &RunArgs, results: &[GameResult]) -> Result<(), Failure> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, r) in results.iter().enumerate() {
        for rec in &r.rounds {
            let m = &rec.metrics;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                i,
                m.round,
                args.algo,
                args.feedback,
                args.k,
                m.spread_learned,
                m.spread_true,
                m.regret,
                m.cum_avg_regret,
                m.l2_rel_error,
                m.frac_within_10,
            ));
        }
    }
    // summary block: per-round means across seeds
    let rounds = results[0].rounds.len();
    let n = results.len() as f64;
    for s in 0..rounds {
        let mean = |f: &dyn Fn(&imbandits::MetricsRow) -> f64| -> f64 {
            results.iter().map(|r| f(&r.rounds[s].metrics)).sum::<f64>() / n
        };
        out.push_str(&format!(
            "mean,{},{},{},{},{},{},{},{},{},{}\n",
            s + 1,
            args.algo,
            args.feedback,
            args.k,
            mean(&|m| m.spread_learned),
            mean(&|m| m.spread_true),
            mean(&|m| m.regret),
            mean(&|m| m.cum_avg_regret),
            mean(&|m| m.l2_rel_error),
            mean(&|m| m.frac_within_10),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn roc_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".roc.csv");
    out.with_file_name(name)
}

fn write_roc(path: &Path, g: &Graph, results: &[GameResult]) -> Result<(), Failure> {
    let mut out = String::from("p,fraction_within\n");
    for step in 1..=10 {
        let p = step as f64 / 20.0;
        let mean: f64 = results
            .iter()
            .map(|r| fraction_within(r.estimator.mu_hats(), g.true_probs(), p))
            .sum::<f64>()
            / results.len() as f64;
        out.push_str(&format!("{p},{mean}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn run_bounds(cmd: BoundsCmd) -> Result<f64, String> {
    match cmd {
        BoundsCmd::FailureProb { k, pmin, pmax } => {
            if k < 1 {
                return Err("k must be >= 1".into());
            }
            if !(0.0..=1.0).contains(&pmin) || !(0.0..=1.0).contains(&pmax) || pmin > pmax {
                return Err("require 0 <= pmin <= pmax <= 1".into());
            }
            Ok(failure_prob_bound(k, pmin, pmax))
        }
        BoundsCmd::SampleComplexity { gamma, nodes, k, delta, eps, pstar } => {
            sample_complexity_bound(gamma, nodes, k, pstar, eps, delta)
                .map(|c| c as f64)
                .map_err(|e| e.to_string())
        }
        BoundsCmd::MleGap { dv, thetamax, t, g } => {
            if t < 1 {
                return Err("T must be >= 1".into());
            }
            if thetamax < 0.0 || g < 0.0 {
                return Err("thetamax and G must be non-negative".into());
            }
            Ok(mle_loss_gap_bound(dv, thetamax, t, g))
        }
    }
}

/// Round to `digits` significant digits and print shortest.
fn format_sig(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    format!("{}", (x * factor).round() / factor)
}
