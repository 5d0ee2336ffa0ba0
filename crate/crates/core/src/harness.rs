//! Experiment runner: loads an edge list, runs one engine and writes CSV.
//!
//! Files written to the output directory:
//!
//! * `density.csv`: `z_squared,density,engine,epsilon`, one row per ratio guess
//! * `summary.csv`: one row describing the run
//! * `rounds.csv`: MPC engines only
//! * `timing.csv`: streaming engines only; wall-clock, so not reproducible
//!
//! Every density written is recounted from the reported vertex pair.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::baseline::{baseline_peel, baseline_peel_streaming, ratio_guesses, BaselineResult};
use crate::error::GraphError;
use crate::graph::{density, recount_densities, DensityValue, DirectedEdgeList, VertexPair};
use crate::grid::GuessGrid;
use crate::ingest::{load_edges, order_stream, IngestError, IngestStats, ParseOptions, StreamOrder};
use crate::mpc::{run_mpc, MpcParams, RoundCosts};
use crate::oracle::exact_densest;
use crate::peel::peel_grid_cells;
use crate::stream::{select_largest_density_guess, LevelSizeMode, StreamGrid};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Stream,
    Mpc,
    BaselineStream,
    BaselineMpc,
    BasePeel,
    Exact,
}

impl Engine {
    pub const ALL: [Engine; 6] = [
        Engine::Stream,
        Engine::Mpc,
        Engine::BaselineStream,
        Engine::BaselineMpc,
        Engine::BasePeel,
        Engine::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Stream => "stream",
            Engine::Mpc => "mpc",
            Engine::BaselineStream => "baseline-stream",
            Engine::BaselineMpc => "baseline-mpc",
            Engine::BasePeel => "base-peel",
            Engine::Exact => "exact",
        }
    }

    pub fn needs_delta(self) -> bool {
        matches!(self, Engine::Mpc | Engine::BaselineMpc)
    }

    pub fn is_streaming(self) -> bool {
        matches!(self, Engine::Stream | Engine::BaselineStream)
    }

    pub fn default_epsilon(self) -> f64 {
        if self.needs_delta() {
            0.6
        } else {
            0.2
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown engine {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub order: StreamOrder,
    pub batch_size: usize,
    pub seed: u64,
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub parse: ParseOptions,
    pub cache_dir: Option<PathBuf>,
    /// Timing repetitions; each edge reports its fastest time.
    pub timing_repeats: usize,
    /// Upper bound on streaming state; larger grids are split into groups of
    /// ratio guesses, each group making its own pass.
    pub max_state_bytes: usize,
    pub round_costs: RoundCosts,
}

impl ExperimentConfig {
    pub fn new(engine: Engine, input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            engine,
            epsilon: engine.default_epsilon(),
            delta: None,
            order: StreamOrder::File,
            batch_size: 10_000,
            seed: 0,
            input: input.into(),
            out_dir: out_dir.into(),
            parse: ParseOptions::default(),
            cache_dir: None,
            timing_repeats: 1,
            max_state_bytes: 4 << 30,
            round_costs: RoundCosts::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut errs = Vec::new();
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            errs.push(format!("epsilon must be positive (got {})", self.epsilon));
        }
        if self.engine == Engine::Mpc && self.epsilon >= 1.0 {
            errs.push(format!("epsilon must be below 1 for mpc (got {})", self.epsilon));
        }
        match (self.engine.needs_delta(), self.delta) {
            (true, None) => errs.push(format!("delta is required for engine {}", self.engine)),
            (true, Some(d)) if !(d > 0.0 && d < 1.0) => {
                errs.push(format!("delta must lie in (0, 1) (got {d})"))
            }
            (false, Some(_)) => errs.push(format!("delta does not apply to engine {}", self.engine)),
            _ => {}
        }
        if self.batch_size == 0 {
            errs.push("batch size must be positive".into());
        }
        if self.timing_repeats == 0 {
            errs.push("timing repeats must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(errs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub z_squared: f64,
    pub density: f64,
    pub engine: Engine,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundsRow {
    #[serde(rename = "guess_D")]
    pub guess_d: Option<f64>,
    pub guess_z: f64,
    pub phase: usize,
    pub rounds: u64,
    pub s_size: usize,
    pub t_size: usize,
    pub f1: usize,
    pub f2: usize,
    pub early_return: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub batch_index: usize,
    pub nanos_per_edge_max: u64,
    pub nanos_per_edge_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub engine: Engine,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub order: String,
    pub n: usize,
    pub m: usize,
    pub duplicates: usize,
    pub self_loops: usize,
    /// The engine's own choice of output.
    pub density: f64,
    pub s_size: usize,
    pub t_size: usize,
    /// Largest value in `density.csv`.
    pub max_density_over_z: f64,
    /// `passes`, `rounds`, `iterations` or `none`.
    pub cost_kind: &'static str,
    pub cost: u64,
    pub guesses: usize,
    pub max_cell_updates_per_edge: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutput {
    pub density_rows: Vec<DensityRow>,
    pub rounds_rows: Option<Vec<RoundsRow>>,
    pub timing_rows: Option<Vec<TimingRow>>,
    pub pair: VertexPair,
    pub summary: RunSummary,
}

/// Loads, orders, runs and writes. Returns the summary.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    cfg.validate()?;
    let (el, stats, _) = load_edges(&cfg.input, cfg.parse, cfg.cache_dir.as_deref())?;
    let el = order_stream(el, cfg.order)?;
    let out = run_engine(cfg, &el, stats)?;
    write_outputs(&cfg.out_dir, &out)?;
    Ok(out.summary)
}

/// Runs the configured engine on an already ordered edge list.
pub fn run_engine(
    cfg: &ExperimentConfig,
    el: &DirectedEdgeList,
    stats: IngestStats,
) -> Result<EngineOutput, HarnessError> {
    cfg.validate()?;
    let mut out = match cfg.engine {
        Engine::Stream => run_stream_engine(cfg, el)?,
        Engine::Mpc => run_mpc_engine(cfg, el)?,
        Engine::BaselineStream | Engine::BaselineMpc => run_baseline_engine(cfg, el)?,
        Engine::BasePeel => run_peel_engine(cfg, el)?,
        Engine::Exact => run_exact_engine(cfg, el)?,
    };
    out.summary.duplicates = stats.duplicates;
    out.summary.self_loops = stats.self_loops;
    out.summary.max_density_over_z = out
        .density_rows
        .iter()
        .map(|r| r.density)
        .fold(0.0, f64::max);
    Ok(out)
}

fn summary(cfg: &ExperimentConfig, el: &DirectedEdgeList, pair: &VertexPair, d: DensityValue) -> RunSummary {
    RunSummary {
        engine: cfg.engine,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        order: cfg.order.to_string(),
        n: el.n_vertices,
        m: el.len(),
        duplicates: 0,
        self_loops: 0,
        density: d.value,
        s_size: pair.s.len(),
        t_size: pair.t.len(),
        max_density_over_z: 0.0,
        cost_kind: "none",
        cost: 0,
        guesses: 0,
        max_cell_updates_per_edge: 0,
    }
}

fn row(cfg: &ExperimentConfig, z_squared: f64, density: f64) -> DensityRow {
    DensityRow {
        z_squared,
        density,
        engine: cfg.engine,
        epsilon: cfg.epsilon,
    }
}

/// Per-edge times folded into batches.
pub fn timing_rows(per_edge: &[u64], batch_size: usize) -> Vec<TimingRow> {
    per_edge
        .chunks(batch_size.max(1))
        .enumerate()
        .map(|(i, c)| TimingRow {
            batch_index: i,
            nanos_per_edge_max: c.iter().copied().max().unwrap_or(0),
            nanos_per_edge_mean: c.iter().sum::<u64>() as f64 / c.len() as f64,
        })
        .collect()
}

fn run_stream_engine(cfg: &ExperimentConfig, el: &DirectedEdgeList) -> Result<EngineOutput, HarnessError> {
    let n = el.n_vertices;
    let grid = GuessGrid::new(2 * n, cfg.epsilon)?;
    let per_cell = (16 * n).max(1);
    let cells_budget = (cfg.max_state_bytes / per_cell).max(1);
    let z_per_group = (cells_budget / grid.d_count()).clamp(1, grid.z_count());

    let mut per_edge = vec![0u64; el.len()];
    let mut picks: Vec<(usize, Option<(crate::grid::GridCell, VertexPair)>)> = Vec::new();
    let mut max_updates = 0u64;

    let z_all: Vec<usize> = (0..grid.z_count()).collect();
    for zs in z_all.chunks(z_per_group) {
        let cells: Vec<_> = grid.cells().into_iter().filter(|c| zs.contains(&c.z_index)).collect();
        let mut fastest = vec![u64::MAX; el.len()];
        let mut kept = None;
        for _ in 0..cfg.timing_repeats {
            let mut sg = StreamGrid::for_cells(n, &grid, cells.clone());
            for (i, (u, v)) in el.pairs().enumerate() {
                let t0 = Instant::now();
                sg.update(u, v);
                let dt = t0.elapsed().as_nanos() as u64;
                fastest[i] = fastest[i].min(dt);
            }
            kept.get_or_insert(sg);
        }
        let sg = kept.expect("at least one repetition");
        per_edge.iter_mut().zip(&fastest).for_each(|(a, b)| *a += b);
        max_updates += sg.work().max_cell_updates_per_edge;
        for (z, sel) in sg.per_ratio_selections(LevelSizeMode::Materialized) {
            picks.push((z, sel.map(|s| (s.cell, s.pair))));
        }
    }
    picks.sort_by_key(|p| p.0);

    let pairs: Vec<VertexPair> = picks
        .iter()
        .map(|(_, p)| p.as_ref().map(|x| x.1.clone()).unwrap_or_default())
        .collect();
    let densities = recount_densities(n, el.pairs(), &pairs);
    let zv = grid.z_values();
    let density_rows = picks
        .iter()
        .zip(&densities)
        .map(|((z, _), d)| row(cfg, zv[*z] * zv[*z], d.value))
        .collect();

    let cells: Vec<_> = picks.iter().filter_map(|p| p.1.as_ref().map(|x| x.0)).collect();
    let idx: Vec<usize> = picks.iter().enumerate().filter(|p| p.1 .1.is_some()).map(|p| p.0).collect();
    let levels = vec![Some(0); cells.len()];
    let chosen = select_largest_density_guess(&cells, &levels).map(|i| idx[i]);
    let (pair, d) = match chosen {
        Some(i) => (pairs[i].clone(), densities[i]),
        None => (VertexPair::empty(), DensityValue::zero()),
    };
    let mut s = summary(cfg, el, &pair, d);
    s.cost_kind = "passes";
    s.cost = 1;
    s.guesses = grid.len();
    s.max_cell_updates_per_edge = max_updates;
    Ok(EngineOutput {
        density_rows,
        rounds_rows: None,
        timing_rows: Some(timing_rows(&per_edge, cfg.batch_size)),
        pair,
        summary: s,
    })
}

fn run_mpc_engine(cfg: &ExperimentConfig, el: &DirectedEdgeList) -> Result<EngineOutput, HarnessError> {
    let g = el.to_bipartite();
    let grid = GuessGrid::new(g.n(), cfg.epsilon)?;
    let params = MpcParams::new(g.n(), cfg.epsilon, cfg.delta.unwrap_or(0.5), cfg.seed)?
        .with_costs(cfg.round_costs);
    let run = run_mpc(&g, &grid, &params, false);

    let zv = grid.z_values();
    let mut per_z = vec![0.0f64; grid.z_count()];
    let mut rounds_rows = Vec::new();
    for led in &run.ledger.cells {
        if let Some(p) = led.potential_pair() {
            let d = density(&g, &p.clone().normalized()).value;
            per_z[led.cell.z_index] = per_z[led.cell.z_index].max(d);
        }
        for ph in &led.phases {
            rounds_rows.push(RoundsRow {
                guess_d: Some(led.cell.density_guess),
                guess_z: led.cell.ratio_guess,
                phase: ph.phase,
                rounds: ph.rounds,
                s_size: ph.s_size,
                t_size: ph.t_size,
                f1: ph.f1,
                f2: ph.f2,
                early_return: ph.early_return,
            });
        }
    }
    let density_rows = per_z
        .iter()
        .enumerate()
        .map(|(z, &d)| row(cfg, zv[z] * zv[z], d))
        .collect();
    let mut s = summary(cfg, el, &run.pair, run.density);
    s.cost_kind = "rounds";
    s.cost = run.ledger.rounds_total;
    s.guesses = grid.len();
    Ok(EngineOutput {
        density_rows,
        rounds_rows: Some(rounds_rows),
        timing_rows: None,
        pair: run.pair,
        summary: s,
    })
}

/// One timed pass of the streaming baseline: every arc updates the degree
/// counters of every ratio guess.
fn time_baseline_pass(el: &DirectedEdgeList, guesses: usize) -> Vec<u64> {
    let n = el.n_vertices;
    let mut deg = vec![0u64; 2 * n * guesses];
    el.pairs()
        .map(|(u, v)| {
            let t0 = Instant::now();
            let (u, v) = (u as usize * guesses, (n + v as usize) * guesses);
            for c in 0..guesses {
                deg[u + c] += 1;
                deg[v + c] += 1;
            }
            t0.elapsed().as_nanos() as u64
        })
        .collect()
}

fn run_baseline_engine(cfg: &ExperimentConfig, el: &DirectedEdgeList) -> Result<EngineOutput, HarnessError> {
    crate::grid::check_epsilon(cfg.epsilon)?;
    let g = el.to_bipartite();
    let cs = ratio_guesses(g.n(), cfg.epsilon);
    let streaming = cfg.engine == Engine::BaselineStream;
    let results: Vec<BaselineResult> = if streaming {
        cs.iter()
            .map(|&c| baseline_peel_streaming(el.n_vertices, el.pairs(), cfg.epsilon, c))
            .collect()
    } else {
        use rayon::prelude::*;
        cs.par_iter().map(|&c| baseline_peel(&g, cfg.epsilon, c)).collect()
    };

    let mut best: Option<&BaselineResult> = None;
    for r in &results {
        if best.is_none_or(|b| r.best_density.cmp_exact(&b.best_density).is_gt()) {
            best = Some(r);
        }
    }
    let (pair, d) = best
        .map(|b| (b.best_pair.clone(), density(&g, &b.best_pair)))
        .unwrap_or((VertexPair::empty(), DensityValue::zero()));
    let density_rows = results
        .iter()
        .map(|r| row(cfg, r.ratio_guess, density(&g, &r.best_pair).value))
        .collect();
    let passes = results.iter().map(|r| r.passes).max().unwrap_or(0);

    let mut s = summary(cfg, el, &pair, d);
    s.guesses = cs.len();
    let (rounds_rows, timing) = if streaming {
        s.cost_kind = "passes";
        s.cost = passes as u64;
        s.max_cell_updates_per_edge = cs.len() as u64;
        let mut fastest = vec![u64::MAX; el.len()];
        for _ in 0..cfg.timing_repeats {
            for (a, b) in fastest.iter_mut().zip(time_baseline_pass(el, cs.len())) {
                *a = (*a).min(b);
            }
        }
        (None, Some(timing_rows(&fastest, cfg.batch_size)))
    } else {
        s.cost_kind = "rounds";
        s.cost = cfg.round_costs.baseline_rounds(passes);
        let rows = results
            .iter()
            .map(|r| RoundsRow {
                guess_d: None,
                guess_z: r.ratio_guess.sqrt(),
                phase: 0,
                rounds: cfg.round_costs.baseline_rounds(r.passes),
                s_size: r.best_pair.s.len(),
                t_size: r.best_pair.t.len(),
                f1: 0,
                f2: 0,
                early_return: false,
            })
            .collect();
        (Some(rows), None)
    };
    Ok(EngineOutput {
        density_rows,
        rounds_rows,
        timing_rows: timing,
        pair,
        summary: s,
    })
}

fn run_peel_engine(cfg: &ExperimentConfig, el: &DirectedEdgeList) -> Result<EngineOutput, HarnessError> {
    let g = el.to_bipartite();
    let grid = GuessGrid::new(g.n(), cfg.epsilon)?;
    let cells = peel_grid_cells(&g, &grid);
    let zv = grid.z_values();
    let mut per_z = vec![0.0f64; grid.z_count()];
    for c in &cells {
        per_z[c.cell.z_index] = per_z[c.cell.z_index].max(c.density.value);
    }
    let (pair, d) = crate::peel::best_cell(&cells)
        .map(|c| (c.pair.clone(), c.density))
        .unwrap_or((VertexPair::empty(), DensityValue::zero()));
    let mut s = summary(cfg, el, &pair, d);
    s.cost_kind = "iterations";
    s.cost = cells.iter().map(|c| c.iterations as u64).max().unwrap_or(0);
    s.guesses = grid.len();
    Ok(EngineOutput {
        density_rows: per_z
            .iter()
            .enumerate()
            .map(|(z, &d)| row(cfg, zv[z] * zv[z], d))
            .collect(),
        rounds_rows: None,
        timing_rows: None,
        pair,
        summary: s,
    })
}

fn run_exact_engine(cfg: &ExperimentConfig, el: &DirectedEdgeList) -> Result<EngineOutput, HarnessError> {
    let g = el.to_bipartite();
    let (pair, d) = exact_densest(&g)?;
    let ratio = if pair.t.is_empty() {
        0.0
    } else {
        pair.s.len() as f64 / pair.t.len() as f64
    };
    let rows = vec![row(cfg, ratio, density(&g, &pair).value)];
    let s = summary(cfg, el, &pair, d);
    Ok(EngineOutput {
        density_rows: rows,
        rounds_rows: None,
        timing_rows: None,
        pair,
        summary: s,
    })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let wrap = |source| HarnessError::Output {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for r in rows {
        w.serialize(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| wrap(e.into()))
}

pub fn write_outputs(out_dir: &Path, out: &EngineOutput) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::Output {
        path: out_dir.to_path_buf(),
        source: e.into(),
    })?;
    write_csv(&out_dir.join("density.csv"), &out.density_rows)?;
    write_csv(&out_dir.join("summary.csv"), std::slice::from_ref(&out.summary))?;
    if let Some(r) = &out.rounds_rows {
        write_csv(&out_dir.join("rounds.csv"), r)?;
    }
    if let Some(t) = &out.timing_rows {
        write_csv(&out_dir.join("timing.csv"), t)?;
    }
    Ok(())
}
