//! Named self-check suites with fixed seeds and JSON reports.

use std::str::FromStr;

use serde::Serialize;

use crate::baseline::{baseline_grid, pass_bound};
use crate::fixtures::{make_peeling_adversary, oracle_corpus, random_digraph};
use crate::graph::BipartiteGraph;
use crate::grid::{ceil_threshold, log_step, GuessGrid, Thresholds};
use crate::harness::{run_engine, Engine, ExperimentConfig};
use crate::ingest::IngestStats;
use crate::mpc::{misclassification_rate, run_mpc, MpcParams};
use crate::oracle::exact_densest;
use crate::peel::{iteration_bound, peel, peel_grid_cells, peel_unguarded, best_cell};
use crate::stream::run_stream_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SmallOracle,
    SamplingLemma,
    Adversary,
    Determinism,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small-oracle" => Ok(Suite::SmallOracle),
            "sampling-lemma" => Ok(Suite::SamplingLemma),
            "adversary" => Ok(Suite::Adversary),
            "determinism" => Ok(Suite::Determinism),
            _ => Err(format!(
                "unknown suite {s:?}; use small-oracle, sampling-lemma, adversary or determinism"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn run_suite(suite: Suite) -> SuiteReport {
    let checks = match suite {
        Suite::SmallOracle => small_oracle(200),
        Suite::SamplingLemma => sampling_lemma(),
        Suite::Adversary => adversary(),
        Suite::Determinism => determinism(),
    };
    SuiteReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Approximation properties on the seeded oracle corpus.
pub fn small_oracle(count: usize) -> Vec<Check> {
    let eps = 0.2;
    let (mut peel_bad, mut base_bad, mut stream_bad, mut stream_empty, mut mpc_bad, mut mpc_runs) =
        (0, 0, 0, 0, 0, 0);
    let corpus = oracle_corpus(count);
    for inst in &corpus {
        let g = inst.graph.to_bipartite();
        let (_, rho) = exact_densest(&g).expect("corpus fits the oracle");
        let grid = GuessGrid::new(g.n(), eps).expect("valid epsilon");

        let cells = peel_grid_cells(&g, &grid);
        let p = best_cell(&cells).map_or(0.0, |c| c.density.value);
        peel_bad += (p < rho.value / (2.0 * (1.0 + eps).powi(3))) as usize;

        let b = baseline_grid(&g, eps).expect("valid epsilon");
        base_bad += (b.best_density.value < rho.value / (2.0 + eps + 0.01)) as usize;

        let s = run_stream_grid(inst.n, inst.graph.pairs(), &grid);
        let bound = rho.value / (16.0 * (1.0 + eps).powi(2) * log_step(g.n() as f64, eps));
        match s.selection {
            Some(_) => stream_bad += (s.density.value < bound) as usize,
            None => stream_empty += 1,
        }

        for seed in 0..5 {
            let params = MpcParams::new(g.n(), eps, 0.5, seed).expect("valid parameters");
            let r = run_mpc(&g, &grid, &params, false);
            mpc_bad += (r.density.value < rho.value / (2.0 * (1.0 + eps).powi(6))) as usize;
            mpc_runs += 1;
        }
    }
    let n = corpus.len();
    vec![
        check("peel-grid", peel_bad == 0, format!("{peel_bad}/{n} below bound")),
        check("baseline", base_bad == 0, format!("{base_bad}/{n} below bound")),
        check(
            "stream-selected",
            stream_bad == 0,
            format!("{stream_bad}/{n} selections below bound; {stream_empty}/{n} without any selection"),
        ),
        check(
            "mpc",
            (mpc_bad as f64) <= 0.05 * mpc_runs as f64,
            format!("{mpc_bad}/{mpc_runs} runs below bound"),
        ),
    ]
}

/// Left degrees straddle `k` by a factor `1+ε`; returns the crafted graph.
pub fn separated_degree_graph(side: usize, k: f64, epsilon: f64) -> BipartiteGraph {
    let low = ceil_threshold(k / (1.0 + epsilon)) as usize - 1;
    let high = ceil_threshold((1.0 + epsilon) * k) as usize + 1;
    let pairs: Vec<(u32, u32)> = (0..side)
        .flat_map(|u| {
            let d = if u < side / 2 { low } else { high };
            (0..d).map(move |i| (u as u32, ((u + i) % side) as u32))
        })
        .collect();
    BipartiteGraph::from_edges(side, pairs.iter().copied())
}

/// Misclassification rate over 1000 seeds against `2/n² + 3σ`.
pub fn sampling_lemma() -> Vec<Check> {
    let (k, eps, trials) = (64.0, 0.5, 1000);
    let g = separated_degree_graph(512, k, eps);
    let n = g.n() as f64;
    let params = MpcParams::new(g.n(), eps, 0.5, 0).expect("valid parameters");
    let p = params.sampling_probability(k);
    let rate = misclassification_rate(&g, k, p, trials, 0x5a);
    let q = 2.0 / (n * n);
    let limit = q + 3.0 * (q * (1.0 - q) / trials as f64).sqrt();
    vec![check(
        "misclassification",
        rate <= limit,
        format!("rate {rate} limit {limit} p {p}"),
    )]
}

pub fn adversary() -> Vec<Check> {
    let el = make_peeling_adversary(5, 200).expect("valid size");
    let g = el.to_bipartite();
    let th = Thresholds::new(4.0, 1.0, 0.2).expect("valid thresholds");
    let guarded = peel(&g, &th).iterations;
    let (_, unguarded) = peel_unguarded(&g, &th);
    let bound = 2 * log_step(g.n() as f64, 0.2).ceil() as usize;
    let grid = GuessGrid::new(g.n(), 0.2).expect("valid epsilon");
    let grid_max = peel_grid_cells(&g, &grid).iter().map(|c| c.iterations).max().unwrap_or(0);
    let base = baseline_grid(&g, 0.2).expect("valid epsilon").passes;
    vec![
        check("guarded", guarded <= bound, format!("{guarded} iterations, bound {bound}")),
        check("unguarded", unguarded >= 150, format!("{unguarded} iterations")),
        check(
            "grid",
            grid_max <= iteration_bound(g.n(), 0.2),
            format!("{grid_max} iterations, bound {}", iteration_bound(g.n(), 0.2)),
        ),
        check(
            "baseline-passes",
            base <= pass_bound(g.n(), 0.2),
            format!("{base} passes, bound {}", pass_bound(g.n(), 0.2)),
        ),
    ]
}

/// Runs every engine twice on the same input and compares the CSV bytes
/// (timing files excluded, being wall-clock measurements).
pub fn determinism() -> Vec<Check> {
    let el = random_digraph(12, 0.35, 0xd5);
    Engine::ALL
        .iter()
        .map(|&e| {
            let render = || -> Result<Vec<Vec<u8>>, String> {
                let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
                let mut cfg = ExperimentConfig::new(e, "", dir.path());
                cfg.seed = 11;
                if e.needs_delta() {
                    cfg.delta = Some(0.5);
                }
                let out = run_engine(&cfg, &el, IngestStats::default()).map_err(|e| e.to_string())?;
                crate::harness::write_outputs(dir.path(), &out).map_err(|e| e.to_string())?;
                ["density.csv", "summary.csv", "rounds.csv"]
                    .iter()
                    .map(|f| std::fs::read(dir.path().join(f)).or_else(|_| Ok(Vec::new())))
                    .collect()
            };
            match (render(), render()) {
                (Ok(a), Ok(b)) => check(e.name(), a == b, "csv bytes compared".into()),
                (Err(x), _) | (_, Err(x)) => check(e.name(), false, x),
            }
        })
        .collect()
}
