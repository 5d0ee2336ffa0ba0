//! Centralized simulation of the sublinear-memory MPC algorithm.
//!
//! A phase freezes high-degree vertices, then runs `t` peeling steps in which
//! degrees are estimated from independent edge samples. Phases are chained on
//! the induced subgraph of the previous output. Any early return yields a
//! potential pair; the answer is the densest potential pair over all guesses.
//!
//! Peeling runs directly on the sampled graphs. The per-machine memory claim is
//! checked separately by [`audit_neighborhoods`], which measures the `t`-hop
//! balls that graph exponentiation would gather.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::GraphError;
use crate::graph::{density, BipartiteGraph, DensityValue, VertexId, VertexPair};
use crate::grid::{at_least, ceil_threshold, exceeds, log_step, GridCell, GuessGrid, Thresholds};

/// Round cost model. The constants are configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundCosts {
    /// Rounds per phase on top of the `⌈log₂ max(2, t)⌉` exponentiation steps.
    pub phase_overhead: u64,
    /// Rounds per baseline peeling iteration.
    pub baseline_per_iteration: u64,
    /// Extra rounds at the end of a baseline run.
    pub baseline_final: u64,
}

impl Default for RoundCosts {
    fn default() -> Self {
        Self {
            phase_overhead: 3,
            baseline_per_iteration: 1,
            baseline_final: 1,
        }
    }
}

impl RoundCosts {
    pub fn phase_rounds(&self, t: usize) -> u64 {
        let t = t.max(2) as u64;
        (64 - (t - 1).leading_zeros()) as u64 + self.phase_overhead
    }

    pub fn baseline_rounds(&self, iterations: usize) -> u64 {
        iterations as u64 * self.baseline_per_iteration + self.baseline_final
    }
}

/// Parameters shared by every phase of a run. All are computed from the
/// original bipartite vertex count and stay fixed across phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpcParams {
    pub epsilon: f64,
    pub delta: f64,
    pub n_at_start: usize,
    pub alpha: f64,
    pub t: usize,
    pub invocations: usize,
    pub machine_memory: u64,
    pub rng_seed: u64,
    pub costs: RoundCosts,
}

impl MpcParams {
    pub fn new(n: usize, epsilon: f64, delta: f64, rng_seed: u64) -> Result<Self, GraphError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(GraphError::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(GraphError::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        let log_n = log_step(n as f64, epsilon);
        let root = (delta * log_n).sqrt();
        Ok(Self {
            epsilon,
            delta,
            n_at_start: n,
            alpha: (1.0 + epsilon).powf(log_n.sqrt()),
            t: ((root / 2.0).floor() as usize).max(1),
            invocations: ((16.0 * root / delta).ceil() as usize).max(1),
            machine_memory: (n.max(1) as f64).powf(delta).ceil() as u64,
            rng_seed,
            costs: RoundCosts::default(),
        })
    }

    pub fn with_costs(mut self, costs: RoundCosts) -> Self {
        self.costs = costs;
        self
    }

    fn ln_n(&self) -> f64 {
        (self.n_at_start as f64).ln()
    }

    /// `min(1, 18 ln n / (ε² k))`; 1 when `n < 2`.
    pub fn sampling_probability(&self, k: f64) -> f64 {
        if self.n_at_start < 2 {
            return 1.0;
        }
        (18.0 * self.ln_n() / (self.epsilon * self.epsilon * k)).min(1.0)
    }

    pub fn p1(&self, th: &Thresholds) -> f64 {
        self.sampling_probability(th.k_s())
    }

    pub fn p2(&self, th: &Thresholds) -> f64 {
        self.sampling_probability(th.k_t())
    }

    /// `(36 ln n / ε² · α)^t`
    pub fn neighborhood_bound(&self) -> f64 {
        (36.0 * self.ln_n() / (self.epsilon * self.epsilon) * self.alpha).powi(self.t as i32)
    }

    pub fn phase_rounds(&self) -> u64 {
        self.costs.phase_rounds(self.t)
    }
}

/// Keeps every edge independently with probability `p`, in edge order.
pub fn sample_edges<R: Rng>(g: &BipartiteGraph, p: f64, rng: &mut R) -> BipartiteGraph {
    let p = p.clamp(0.0, 1.0);
    if p >= 1.0 {
        return g.clone();
    }
    let kept: Vec<(VertexId, VertexId)> = g.edges().filter(|_| rng.gen_bool(p)).collect();
    BipartiteGraph::from_edges(g.side_len(), kept.iter().copied())
}

/// Largest `t`-hop ball, counted in vertices, over every vertex of `g`
/// (left and right copies alike).
pub fn audit_neighborhoods(g: &BipartiteGraph, t: usize) -> usize {
    let n = g.side_len();
    let mut seen = vec![usize::MAX; 2 * n];
    let mut queue = VecDeque::new();
    let mut peak = 0;
    for start in 0..2 * n {
        seen[start] = start;
        queue.clear();
        queue.push_back((start, 0usize));
        let mut size = 1;
        while let Some((x, depth)) = queue.pop_front() {
            if depth == t {
                continue;
            }
            let next: Box<dyn Iterator<Item = usize>> = if x < n {
                Box::new(g.left_neighbors(x as VertexId).iter().map(|&v| n + v as usize))
            } else {
                Box::new(g.right_neighbors((x - n) as VertexId).iter().map(|&u| u as usize))
            };
            for y in next {
                if seen[y] != start {
                    seen[y] = start;
                    size += 1;
                    queue.push_back((y, depth + 1));
                }
            }
        }
        peak = peak.max(size);
    }
    peak
}

/// One row of the round ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub phase: usize,
    pub rounds: u64,
    /// Sizes at phase start.
    pub s_size: usize,
    pub t_size: usize,
    pub f1: usize,
    pub f2: usize,
    pub steps: usize,
    pub early_return: bool,
    pub potential_pair: Option<VertexPair>,
    pub peak_neighborhood: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellLedger {
    pub cell: GridCell,
    pub phases: Vec<PhaseRecord>,
}

impl CellLedger {
    pub fn rounds(&self) -> u64 {
        self.phases.iter().map(|p| p.rounds).sum()
    }

    pub fn potential_pair(&self) -> Option<&VertexPair> {
        self.phases.iter().find_map(|p| p.potential_pair.as_ref())
    }
}

/// Round and memory accounting for a whole run. Cells run in parallel, so
/// the run costs as many rounds as its deepest cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLedger {
    pub rounds_total: u64,
    pub deepest_cell: Option<usize>,
    pub cells: Vec<CellLedger>,
    pub peak_neighborhood_size: Option<usize>,
    pub peak_machine_words: Option<u64>,
}

/// Outcome of one invocation of the phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub pair: VertexPair,
    pub early: bool,
    pub rounds: u64,
    pub f1: usize,
    pub f2: usize,
    pub steps: usize,
    pub peak_neighborhood: Option<usize>,
}

/// Runs one phase on the subgraph of `g` induced by `pair`.
pub fn mpc_phase<R: Rng>(
    g: &BipartiteGraph,
    pair: &VertexPair,
    th: &Thresholds,
    params: &MpcParams,
    rng: &mut R,
    audit: bool,
) -> PhaseOutcome {
    let n = g.side_len();
    let mut alive_s = vec![false; n];
    let mut alive_t = vec![false; n];
    pair.s.iter().for_each(|&u| alive_s[u as usize] = true);
    pair.t.iter().for_each(|&v| alive_t[v as usize] = true);

    let edges: Vec<(VertexId, VertexId)> = g
        .edges()
        .filter(|&(u, v)| alive_s[u as usize] && alive_t[v as usize])
        .collect();
    let mut deg_s = vec![0u64; n];
    let mut deg_t = vec![0u64; n];
    for &(u, v) in &edges {
        deg_s[u as usize] += 1;
        deg_t[v as usize] += 1;
    }

    let frozen_s: Vec<bool> = (0..n)
        .map(|u| alive_s[u] && exceeds(deg_s[u], th.k_s() * params.alpha))
        .collect();
    let frozen_t: Vec<bool> = (0..n)
        .map(|v| alive_t[v] && exceeds(deg_t[v], th.k_t() * params.alpha))
        .collect();
    let f1 = frozen_s.iter().filter(|&&f| f).count();
    let f2 = frozen_t.iter().filter(|&&f| f).count();

    let rounds = params.phase_rounds();
    let (mut s_size, mut t_size) = (pair.s.len(), pair.t.len());
    let outcome = |alive_s: &[bool], alive_t: &[bool], early: bool, steps: usize, peak| PhaseOutcome {
        pair: VertexPair::from_masks(alive_s, alive_t),
        early,
        rounds,
        f1,
        f2,
        steps,
        peak_neighborhood: peak,
    };

    let root = ((s_size * t_size) as f64).sqrt();
    let z = th.ratio_guess;
    if at_least(f1 as f64, z * root / params.alpha) || at_least(f2 as f64, root / (z * params.alpha)) {
        return outcome(&alive_s, &alive_t, true, 0, None);
    }

    // edges with both endpoints frozen are ignored for the whole phase
    let edges: Vec<(VertexId, VertexId)> = edges
        .into_iter()
        .filter(|&(u, v)| !(frozen_s[u as usize] && frozen_t[v as usize]))
        .collect();
    let (p1, p2) = (params.p1(th), params.p2(th));
    let cut_s = ceil_threshold(p1 * th.k_s());
    let cut_t = ceil_threshold(p2 * th.k_t());
    let slack = th.slack_fraction();
    let mut peak: Option<usize> = None;
    let mut sd_s = vec![0u64; n];
    let mut sd_t = vec![0u64; n];

    for step in 0..params.t {
        sd_s.iter_mut().for_each(|d| *d = 0);
        sd_t.iter_mut().for_each(|d| *d = 0);
        let live = |&&(u, v): &&(VertexId, VertexId)| alive_s[u as usize] && alive_t[v as usize];
        let mut g1_audit = Vec::new();
        for &(u, v) in edges.iter().filter(live) {
            if p1 >= 1.0 || rng.gen_bool(p1) {
                sd_s[u as usize] += 1;
                if audit && !frozen_s[u as usize] && !frozen_t[v as usize] {
                    g1_audit.push((u, v));
                }
            }
        }
        for &(_, v) in edges.iter().filter(live) {
            if p2 >= 1.0 || rng.gen_bool(p2) {
                sd_t[v as usize] += 1;
            }
        }
        if audit {
            let sampled = BipartiteGraph::from_edges(n, g1_audit.iter().copied());
            let ball = audit_neighborhoods(&sampled, params.t);
            peak = Some(peak.map_or(ball, |p| p.max(ball)));
        }

        let a: Vec<usize> = (0..n)
            .filter(|&u| alive_s[u] && !frozen_s[u] && sd_s[u] < cut_s)
            .collect();
        let b: Vec<usize> = (0..n)
            .filter(|&v| alive_t[v] && !frozen_t[v] && sd_t[v] < cut_t)
            .collect();

        if th.source_heavy(s_size, t_size) && at_least(slack * s_size as f64 - f1 as f64, a.len() as f64) {
            return outcome(&alive_s, &alive_t, true, step + 1, peak);
        }
        if th.target_heavy(s_size, t_size) && at_least(slack * t_size as f64 - f2 as f64, b.len() as f64) {
            return outcome(&alive_s, &alive_t, true, step + 1, peak);
        }
        a.iter().for_each(|&u| alive_s[u] = false);
        b.iter().for_each(|&v| alive_t[v] = false);
        s_size -= a.len();
        t_size -= b.len();
    }
    outcome(&alive_s, &alive_t, false, params.t, peak)
}

/// `splitmix64` finalizer, used to derive independent per-cell seeds.
pub fn mix_seed(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn cell_seed(master: u64, cell: &GridCell) -> u64 {
    mix_seed(mix_seed(master) ^ ((cell.d_index as u64) << 32 | cell.z_index as u64))
}

/// Chains phases for one guess, stopping at the first early return (a later
/// phase would start from the same pair and return it again) or when the
/// invocation budget runs out.
pub fn run_cell(g: &BipartiteGraph, cell: GridCell, th: &Thresholds, params: &MpcParams, audit: bool) -> CellLedger {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(params.rng_seed, &cell));
    let mut pair = g.full_pair();
    let mut phases = Vec::new();
    for phase in 0..params.invocations {
        let out = mpc_phase(g, &pair, th, params, &mut rng, audit);
        phases.push(PhaseRecord {
            phase,
            rounds: out.rounds,
            s_size: pair.s.len(),
            t_size: pair.t.len(),
            f1: out.f1,
            f2: out.f2,
            steps: out.steps,
            early_return: out.early,
            potential_pair: out.early.then(|| out.pair.clone()),
            peak_neighborhood: out.peak_neighborhood,
        });
        if out.early {
            break;
        }
        pair = out.pair;
    }
    CellLedger { cell, phases }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcRun {
    pub pair: VertexPair,
    pub density: DensityValue,
    pub ledger: RoundLedger,
}

/// Every guess of `grid` in parallel; the densest potential pair wins, first
/// in grid order on ties.
pub fn run_mpc(g: &BipartiteGraph, grid: &GuessGrid, params: &MpcParams, audit: bool) -> MpcRun {
    let cells = grid.cells();
    let ledgers: Vec<CellLedger> = cells
        .par_iter()
        .map(|c| run_cell(g, *c, &grid.thresholds(c), params, audit))
        .collect();

    let mut best: Option<(VertexPair, DensityValue)> = None;
    for led in &ledgers {
        if let Some(p) = led.potential_pair() {
            let p = p.clone().normalized();
            if p.is_empty() {
                continue;
            }
            let d = density(g, &p);
            if best.as_ref().is_none_or(|(_, b)| d.cmp_exact(b).is_gt()) {
                best = Some((p, d));
            }
        }
    }
    let deepest = (0..ledgers.len()).max_by_key(|&i| (ledgers[i].rounds(), std::cmp::Reverse(i)));
    let peak = ledgers
        .iter()
        .flat_map(|l| l.phases.iter().filter_map(|p| p.peak_neighborhood))
        .max();
    let (pair, density) = best.unwrap_or((VertexPair::empty(), DensityValue::zero()));
    MpcRun {
        pair,
        density,
        ledger: RoundLedger {
            rounds_total: deepest.map_or(0, |i| ledgers[i].rounds()),
            deepest_cell: deepest,
            peak_neighborhood_size: peak,
            peak_machine_words: peak.map(|_| params.machine_memory),
            cells: ledgers,
        },
    }
}

/// Fraction of `trials` in which some left vertex of `g` is misclassified by
/// a `p`-sample against threshold `k`: a vertex of degree below `k` whose
/// sampled degree reaches `p k`, or a vertex of degree at least `k` whose
/// sampled degree is at most `p k`.
pub fn misclassification_rate(g: &BipartiteGraph, k: f64, p: f64, trials: usize, seed: u64) -> f64 {
    let n = g.side_len();
    let target = p * k;
    let mut bad = 0usize;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ trial as u64));
        let mut sd = vec![0u64; n];
        for (u, _) in g.edges() {
            if rng.gen_bool(p) {
                sd[u as usize] += 1;
            }
        }
        let wrong = (0..n as VertexId).any(|u| {
            let d = g.left_degree(u) as f64;
            let s = sd[u as usize] as f64;
            if d == 0.0 {
                false
            } else if d < k {
                s >= target
            } else {
                s <= target
            }
        });
        bad += wrong as usize;
    }
    bad as f64 / trials.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bidirected_clique, random_digraph};
    use crate::graph::DirectedEdgeList;
    use crate::oracle::exact_densest;
    use crate::peel::peel_grid;
    use proptest::prelude::*;

    fn path_graph(len: usize) -> BipartiteGraph {
        // L0 - R1 - L2 - R3 - ...
        let pairs: Vec<(VertexId, VertexId)> = (0..len)
            .map(|i| {
                let (a, b) = (i as VertexId, i as VertexId + 1);
                if i % 2 == 0 { (a, b) } else { (b, a) }
            })
            .collect();
        BipartiteGraph::from_edges(len + 1, pairs.iter().copied())
    }

    #[test]
    fn parameters_for_k4() {
        let p = MpcParams::new(8, 0.2, 0.5, 1).unwrap();
        let log_n = 8f64.ln() / 1.2f64.ln();
        assert!((p.alpha - 1.2f64.powf(log_n.sqrt())).abs() < 1e-12);
        assert!(p.alpha > 1.8 && p.alpha < 1.9);
        assert_eq!(p.t, 1);
        assert_eq!(p.invocations, (16.0 * (0.5 * log_n).sqrt() / 0.5).ceil() as usize);
        let th = Thresholds::new(3.0, 1.0, 0.2).unwrap();
        assert_eq!(p.p1(&th), 1.0);
        assert!(MpcParams::new(8, 1.0, 0.5, 1).is_err());
        assert!(MpcParams::new(8, 0.2, 0.0, 1).is_err());
    }

    #[test]
    fn round_costs() {
        let c = RoundCosts::default();
        assert_eq!(c.phase_rounds(1), 4);
        assert_eq!(c.phase_rounds(2), 4);
        assert_eq!(c.phase_rounds(3), 5);
        assert_eq!(c.phase_rounds(4), 5);
        assert_eq!(c.phase_rounds(5), 6);
        assert_eq!(c.baseline_rounds(7), 8);
    }

    #[test]
    fn sampling_extremes() {
        let g = random_digraph(20, 0.3, 4).to_bipartite();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_edges(&g, 1.0, &mut rng), g);
        assert_eq!(sample_edges(&g, 0.0, &mut rng).m(), 0);
        let a = sample_edges(&g, 0.4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_edges(&g, 0.4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_count_is_binomial() {
        let pairs: Vec<(VertexId, VertexId)> = (0..100_000u32).map(|i| (i % 300, (i / 300) % 300)).collect();
        let g = BipartiteGraph::from_edges(300, pairs.iter().copied());
        let sigma = (100_000f64 * 0.25).sqrt();
        for seed in 0..5 {
            let kept = sample_edges(&g, 0.5, &mut ChaCha8Rng::seed_from_u64(seed)).m() as f64;
            assert!((kept - 50_000.0).abs() <= 5.0 * sigma, "{kept}");
        }
    }

    #[test]
    fn k4_returns_full_pair_early() {
        let g = bidirected_clique(4).to_bipartite();
        let params = MpcParams::new(8, 0.2, 0.5, 7).unwrap();
        let th = Thresholds::new(3.0, 1.0, 0.2).unwrap();
        let out = mpc_phase(&g, &g.full_pair(), &th, &params, &mut ChaCha8Rng::seed_from_u64(0), false);
        assert!(out.early);
        assert_eq!(out.pair, g.full_pair());
        // α < 2 here, so every vertex (degree 3 > 1.5 α) is frozen
        assert_eq!((out.f1, out.f2), (4, 4));
    }

    #[test]
    fn k4_without_freezing_returns_at_first_step() {
        let g = bidirected_clique(4).to_bipartite();
        let mut params = MpcParams::new(8, 0.2, 0.5, 7).unwrap();
        params.alpha = 2.5;
        let th = Thresholds::new(3.0, 1.0, 0.2).unwrap();
        let out = mpc_phase(&g, &g.full_pair(), &th, &params, &mut ChaCha8Rng::seed_from_u64(0), false);
        assert_eq!((out.f1, out.f2, out.steps), (0, 0, 1));
        assert!(out.early);
        assert_eq!(out.pair, g.full_pair());
    }

    #[test]
    fn star_hub_is_frozen() {
        // hub 0 -> 1..=12; D = 2, z = 0.5 gives k_S α ≈ 4.3 < 12
        let el = DirectedEdgeList::from_pairs(13, (1..13).map(|v| (0, v)).collect::<Vec<_>>());
        let g = el.to_bipartite();
        let params = MpcParams::new(g.n(), 0.2, 0.5, 1).unwrap();
        let th = Thresholds::new(2.0, 0.5, 0.2).unwrap();
        let pair = VertexPair::new(vec![0], (1..13).collect());
        let out = mpc_phase(&g, &pair, &th, &params, &mut ChaCha8Rng::seed_from_u64(0), false);
        assert_eq!(out.f1, 1);
        assert!(1.0 >= 0.5 * (12f64).sqrt() / params.alpha);
        assert!(out.early);
        assert_eq!(out.steps, 0);
        assert_eq!(out.pair, pair);
    }

    #[test]
    fn empty_graph_returns_immediately() {
        let g = BipartiteGraph::empty(4);
        let params = MpcParams::new(8, 0.2, 0.5, 1).unwrap();
        let th = Thresholds::new(1.0, 1.0, 0.2).unwrap();
        let out = mpc_phase(&g, &VertexPair::empty(), &th, &params, &mut ChaCha8Rng::seed_from_u64(0), false);
        assert!(out.early);
        assert!(out.pair.is_empty());
        assert_eq!((out.f1, out.f2), (0, 0));
    }

    #[test]
    fn run_on_k4() {
        let g = bidirected_clique(4).to_bipartite();
        let grid = GuessGrid::new(g.n(), 0.2).unwrap();
        let params = MpcParams::new(g.n(), 0.2, 0.5, 3).unwrap();
        let run = run_mpc(&g, &grid, &params, false);
        assert_eq!(run.density.value, 3.0);
        let deepest = &run.ledger.cells[run.ledger.deepest_cell.unwrap()];
        assert_eq!(run.ledger.rounds_total, deepest.rounds());
        assert!(run.ledger.cells.iter().all(|c| c.rounds() <= run.ledger.rounds_total));
    }

    #[test]
    fn run_on_gnp_against_peeling() {
        let el = random_digraph(100, 0.1, 17);
        let g = el.to_bipartite();
        let grid = GuessGrid::new(g.n(), 0.6).unwrap();
        let params = MpcParams::new(g.n(), 0.6, 0.6, 5).unwrap();
        let run = run_mpc(&g, &grid, &params, false);
        let (_, reference) = peel_grid(&g, &grid);
        assert!(run.density.value >= reference.value / (2.0 * 1.6f64.powi(6)));
    }

    #[test]
    fn path_neighborhoods() {
        assert_eq!(audit_neighborhoods(&path_graph(10), 2), 5);
        assert_eq!(audit_neighborhoods(&path_graph(10), 0), 1);
        assert_eq!(audit_neighborhoods(&BipartiteGraph::empty(5), 3), 1);
    }

    #[test]
    fn audited_balls_respect_bound() {
        let g = random_digraph(60, 0.2, 8).to_bipartite();
        let grid = GuessGrid::new(g.n(), 0.5).unwrap();
        let params = MpcParams::new(g.n(), 0.5, 0.5, 2).unwrap();
        let run = run_mpc(&g, &grid, &params, true);
        let peak = run.ledger.peak_neighborhood_size.unwrap();
        assert!(peak as f64 <= params.neighborhood_bound());
    }

    #[test]
    fn sampling_lemma_on_separated_degrees() {
        // left degrees 200 or 450 around k = 300; p = 18 ln n / (ε² k) < 1
        let (eps, k) = (0.5, 300.0);
        let side = 10u32;
        let pairs: Vec<(VertexId, VertexId)> = (0..side)
            .flat_map(|u| {
                let d = if u % 2 == 0 { 200 } else { 450 };
                (0..d).map(move |i| (u, i % side))
            })
            .collect();
        let g = BipartiteGraph::from_edges(side as usize, pairs.iter().copied());
        let params = MpcParams::new(g.n(), eps, 0.5, 0).unwrap();
        let p = params.sampling_probability(k);
        assert!(p < 1.0);
        let rate = misclassification_rate(&g, k, p, 1000, 42);
        let n = g.n() as f64;
        let q = 2.0 / (n * n);
        let sigma = (q * (1.0 - q) / 1000.0).sqrt();
        assert!(rate <= q + 3.0 * sigma, "rate {rate}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn phase_invariants(n in 2usize..30, prob in 0.05f64..0.8, seed in any::<u64>(),
                            d_exp in 0i32..10, z_exp in -3i32..4) {
            let g = random_digraph(n, prob, seed).to_bipartite();
            let params = MpcParams::new(g.n(), 0.3, 0.5, seed).unwrap();
            let th = Thresholds::new(1.3f64.powi(d_exp), 1.3f64.powi(z_exp), 0.3).unwrap();
            let full = g.full_pair();
            let out = mpc_phase(&g, &full, &th, &params, &mut ChaCha8Rng::seed_from_u64(seed), false);
            // frozen vertices are never removed, so they are still present
            let frozen_s = (0..n as u32).filter(|&u| exceeds(g.left_degree(u) as u64, th.k_s() * params.alpha));
            for u in frozen_s {
                prop_assert!(out.pair.s.contains(&u));
            }
            prop_assert_eq!(out.f1, (0..n as u32).filter(|&u| exceeds(g.left_degree(u) as u64, th.k_s() * params.alpha)).count());
            prop_assert!(out.pair.s.iter().all(|u| full.s.contains(u)));
            prop_assert!(out.steps <= params.t);
        }

        #[test]
        fn runs_are_reproducible(n in 2usize..14, prob in 0.1f64..0.9, seed in any::<u64>()) {
            let g = random_digraph(n, prob, seed).to_bipartite();
            let grid = GuessGrid::new(g.n(), 0.2).unwrap();
            let params = MpcParams::new(g.n(), 0.2, 0.5, seed).unwrap();
            let a = run_mpc(&g, &grid, &params, false);
            let b = run_mpc(&g, &grid, &params, false);
            prop_assert_eq!(&a, &b);
            let rounds: u64 = a.ledger.cells[a.ledger.deepest_cell.unwrap()].phases.iter().map(|p| p.rounds).sum();
            prop_assert_eq!(a.ledger.rounds_total, rounds);
            let (_, rho) = exact_densest(&g).unwrap();
            prop_assert!(a.density.cmp_exact(&rho).is_le());
        }
    }
}
