//! Fixed-threshold peeling with early stopping, and its guess-grid wrapper.
//!
//! Each iteration computes `A = {v ∈ S : deg(v) < k_S}` and
//! `B = {v ∈ T : deg(v) < k_T}` on the current induced subgraph. The pair is
//! accepted as soon as the heavier side would shrink by less than a `1 + ε`
//! factor; otherwise `A` and `B` are removed together. Degrees are maintained
//! by decrementing on deletion, and `A`, `B` for the next iteration are exactly
//! the survivors whose degree crossed the threshold, so one run costs
//! `O(n + m)` in total.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{density, BipartiteGraph, DensityValue, VertexId, VertexPair};
use crate::grid::{at_least, GridCell, GuessGrid, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopRule {
    /// `|S| >= z²|T|` and `|A| <= ε/(1+ε) |S|`
    SourceSide,
    /// `|S| <= z²|T|` and `|B| <= ε/(1+ε) |T|`
    TargetSide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeelOutcome {
    pub pair: VertexPair,
    pub iterations: usize,
    pub stop: StopRule,
    /// `(|S|, |T|)` at the start of each iteration.
    pub sizes: Vec<(usize, usize)>,
}

struct PeelState<'g> {
    g: &'g BipartiteGraph,
    k_s: u64,
    k_t: u64,
    alive_s: Vec<bool>,
    alive_t: Vec<bool>,
    deg_s: Vec<u64>,
    deg_t: Vec<u64>,
    size_s: usize,
    size_t: usize,
    low_s: Vec<VertexId>,
    low_t: Vec<VertexId>,
}

impl<'g> PeelState<'g> {
    fn new(g: &'g BipartiteGraph, k_s: u64, k_t: u64) -> Self {
        let n = g.side_len();
        let deg_s: Vec<u64> = (0..n as VertexId).map(|u| g.left_degree(u) as u64).collect();
        let deg_t: Vec<u64> = (0..n as VertexId).map(|v| g.right_degree(v) as u64).collect();
        let low_s = (0..n as VertexId).filter(|&u| deg_s[u as usize] < k_s).collect();
        let low_t = (0..n as VertexId).filter(|&v| deg_t[v as usize] < k_t).collect();
        Self {
            g,
            k_s,
            k_t,
            alive_s: vec![true; n],
            alive_t: vec![true; n],
            deg_s,
            deg_t,
            size_s: n,
            size_t: n,
            low_s,
            low_t,
        }
    }

    /// Removes the current `A` and `B` simultaneously and collects the next ones.
    fn remove_low(&mut self) {
        let a = std::mem::take(&mut self.low_s);
        let b = std::mem::take(&mut self.low_t);
        for &u in &a {
            self.alive_s[u as usize] = false;
        }
        for &v in &b {
            self.alive_t[v as usize] = false;
        }
        self.size_s -= a.len();
        self.size_t -= b.len();
        for &u in &a {
            for &v in self.g.left_neighbors(u) {
                let v = v as usize;
                if self.alive_t[v] {
                    if self.deg_t[v] == self.k_t {
                        self.low_t.push(v as VertexId);
                    }
                    self.deg_t[v] -= 1;
                }
            }
        }
        for &v in &b {
            for &u in self.g.right_neighbors(v) {
                let u = u as usize;
                if self.alive_s[u] {
                    if self.deg_s[u] == self.k_s {
                        self.low_s.push(u as VertexId);
                    }
                    self.deg_s[u] -= 1;
                }
            }
        }
    }

    fn pair(&self) -> VertexPair {
        VertexPair::from_masks(&self.alive_s, &self.alive_t)
    }
}

/// Runs fixed-threshold peeling with the two stopping rules. The source-side
/// rule is tested first. When both sides are exhausted the source-side rule
/// fires on `(∅, ∅)`.
pub fn peel(g: &BipartiteGraph, th: &Thresholds) -> PeelOutcome {
    let mut st = PeelState::new(g, th.k_s_ceil(), th.k_t_ceil());
    let frac = th.slack_fraction();
    let mut sizes = Vec::new();
    loop {
        sizes.push((st.size_s, st.size_t));
        let stop = if th.source_heavy(st.size_s, st.size_t)
            && at_least(frac * st.size_s as f64, st.low_s.len() as f64)
        {
            Some(StopRule::SourceSide)
        } else if th.target_heavy(st.size_s, st.size_t)
            && at_least(frac * st.size_t as f64, st.low_t.len() as f64)
        {
            Some(StopRule::TargetSide)
        } else {
            None
        };
        if let Some(stop) = stop {
            return PeelOutcome {
                pair: st.pair(),
                iterations: sizes.len(),
                stop,
                sizes,
            };
        }
        st.remove_low();
    }
}

/// Peeling with the same thresholds but no stopping rule: runs to the fixed
/// point. Returns the surviving pair and the number of iterations that
/// removed at least one vertex.
pub fn peel_unguarded(g: &BipartiteGraph, th: &Thresholds) -> (VertexPair, usize) {
    let mut st = PeelState::new(g, th.k_s_ceil(), th.k_t_ceil());
    let mut iterations = 0;
    while !(st.low_s.is_empty() && st.low_t.is_empty()) {
        st.remove_low();
        iterations += 1;
    }
    (st.pair(), iterations)
}

/// `2⌈log_{1+ε} n⌉ + 1`
pub fn iteration_bound(n: usize, epsilon: f64) -> usize {
    2 * crate::grid::log_step(n as f64, epsilon).ceil() as usize + 1
}

/// Result of one grid cell, with the density recounted on the input graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: GridCell,
    pub pair: VertexPair,
    pub density: DensityValue,
    pub iterations: usize,
}

/// Runs [`peel`] on every cell of the grid (in parallel), in grid order.
pub fn peel_grid_cells(g: &BipartiteGraph, grid: &GuessGrid) -> Vec<CellResult> {
    grid.cells()
        .into_par_iter()
        .map(|cell| {
            let out = peel(g, &grid.thresholds(&cell));
            let pair = out.pair.normalized();
            let density = density(g, &pair);
            CellResult {
                cell,
                pair,
                density,
                iterations: out.iterations,
            }
        })
        .collect()
}

/// Densest output over the grid; ties go to the earlier cell.
pub fn best_cell(cells: &[CellResult]) -> Option<&CellResult> {
    let mut best: Option<&CellResult> = None;
    for c in cells {
        if c.pair.is_empty() {
            continue;
        }
        if best.map_or(true, |b| c.density.cmp_exact(&b.density) == Ordering::Greater) {
            best = Some(c);
        }
    }
    best
}

pub fn peel_grid(g: &BipartiteGraph, grid: &GuessGrid) -> (VertexPair, DensityValue) {
    let cells = peel_grid_cells(g, grid);
    match best_cell(&cells) {
        Some(c) => (c.pair.clone(), c.density),
        None => (VertexPair::empty(), DensityValue::zero()),
    }
}
