//! Multi-pass average-degree peeling for directed density.
//!
//! For a ratio guess `c`, each pass removes from the side that is too large
//! relative to `c` every vertex whose degree is at most `(1+ε)` times that
//! side's average degree, and remembers the densest pair seen. Sweeping `c`
//! over powers of `1+ε` gives a `(2+ε)`-approximation in `O(log n)` passes.

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{density, BipartiteGraph, DensityValue, VertexId, VertexPair};
use crate::grid::{at_least, ceil_log_step, check_epsilon, power};
use crate::error::GraphError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineResult {
    pub best_pair: VertexPair,
    pub best_density: DensityValue,
    /// Peeling passes; for the sweep, the largest over all guesses.
    pub passes: usize,
    pub ratio_guess: f64,
}

/// `2⌈log_{1+ε} n⌉ + 2`
pub fn pass_bound(n: usize, epsilon: f64) -> usize {
    2 * ceil_log_step(n.max(1) as f64, epsilon) as usize + 2
}

/// Which side one pass peels and which vertices go.
fn choose_removal(
    deg_s: &[u64],
    deg_t: &[u64],
    alive_s: &[bool],
    alive_t: &[bool],
    s_size: usize,
    t_size: usize,
    edges: u64,
    epsilon: f64,
    c: f64,
) -> (bool, Vec<usize>) {
    let from_s = at_least(s_size as f64, c * t_size as f64);
    let (deg, alive, size) = if from_s {
        (deg_s, alive_s, s_size)
    } else {
        (deg_t, alive_t, t_size)
    };
    let cut = (1.0 + epsilon) * edges as f64 / size as f64;
    let doomed = (0..deg.len())
        .filter(|&x| alive[x] && at_least(cut, deg[x] as f64))
        .collect();
    (from_s, doomed)
}

/// In-memory peeling for one ratio guess `c`.
pub fn baseline_peel(g: &BipartiteGraph, epsilon: f64, c: f64) -> BaselineResult {
    let n = g.side_len();
    let mut alive_s = vec![true; n];
    let mut alive_t = vec![true; n];
    let mut deg_s: Vec<u64> = (0..n as VertexId).map(|u| g.left_degree(u) as u64).collect();
    let mut deg_t: Vec<u64> = (0..n as VertexId).map(|v| g.right_degree(v) as u64).collect();
    let (mut s_size, mut t_size, mut edges) = (n, n, g.m() as u64);

    let mut best = (VertexPair::empty(), DensityValue::zero());
    let mut passes = 0;
    while s_size > 0 && t_size > 0 {
        let current = DensityValue::from_counts(edges, s_size, t_size);
        if current.cmp_exact(&best.1).is_gt() {
            best = (VertexPair::from_masks(&alive_s, &alive_t), current);
        }
        passes += 1;
        let (from_s, doomed) =
            choose_removal(&deg_s, &deg_t, &alive_s, &alive_t, s_size, t_size, edges, epsilon, c);
        if from_s {
            for &u in &doomed {
                alive_s[u] = false;
                for &v in g.left_neighbors(u as VertexId) {
                    if alive_t[v as usize] {
                        deg_t[v as usize] -= 1;
                        edges -= 1;
                    }
                }
            }
            s_size -= doomed.len();
        } else {
            for &v in &doomed {
                alive_t[v] = false;
                for &u in g.right_neighbors(v as VertexId) {
                    if alive_s[u as usize] {
                        deg_s[u as usize] -= 1;
                        edges -= 1;
                    }
                }
            }
            t_size -= doomed.len();
        }
    }
    BaselineResult {
        best_pair: best.0,
        best_density: best.1,
        passes,
        ratio_guess: c,
    }
}

/// The same peeling, reading the edge sequence once per pass and keeping only
/// per-vertex state between passes.
pub fn baseline_peel_streaming<I>(n_vertices: usize, edges: I, epsilon: f64, c: f64) -> BaselineResult
where
    I: IntoIterator<Item = (VertexId, VertexId)> + Clone,
{
    let n = n_vertices;
    let mut alive_s = vec![true; n];
    let mut alive_t = vec![true; n];
    let (mut s_size, mut t_size) = (n, n);
    let mut best = (VertexPair::empty(), DensityValue::zero());
    let mut passes = 0;
    while s_size > 0 && t_size > 0 {
        passes += 1;
        let mut deg_s = vec![0u64; n];
        let mut deg_t = vec![0u64; n];
        let mut m = 0u64;
        for (u, v) in edges.clone() {
            if alive_s[u as usize] && alive_t[v as usize] {
                deg_s[u as usize] += 1;
                deg_t[v as usize] += 1;
                m += 1;
            }
        }
        let current = DensityValue::from_counts(m, s_size, t_size);
        if current.cmp_exact(&best.1).is_gt() {
            best = (VertexPair::from_masks(&alive_s, &alive_t), current);
        }
        let (from_s, doomed) =
            choose_removal(&deg_s, &deg_t, &alive_s, &alive_t, s_size, t_size, m, epsilon, c);
        let (alive, size) = if from_s {
            (&mut alive_s, &mut s_size)
        } else {
            (&mut alive_t, &mut t_size)
        };
        doomed.iter().for_each(|&x| alive[x] = false);
        *size -= doomed.len();
    }
    BaselineResult {
        best_pair: best.0,
        best_density: best.1,
        passes,
        ratio_guess: c,
    }
}

/// Ratio guesses `(1+ε)^j` for `|j| <= ⌈log_{1+ε} n⌉`, ascending.
pub fn ratio_guesses(n: usize, epsilon: f64) -> Vec<f64> {
    let j = ceil_log_step(n.max(1) as f64, epsilon);
    (-j..=j).map(|e| power(1.0 + epsilon, e)).collect()
}

/// Densest result over the `c` sweep (first in ascending `c` on ties).
pub fn baseline_grid(g: &BipartiteGraph, epsilon: f64) -> Result<BaselineResult, GraphError> {
    check_epsilon(epsilon)?;
    let results: Vec<BaselineResult> = ratio_guesses(g.n(), epsilon)
        .into_par_iter()
        .map(|c| baseline_peel(g, epsilon, c))
        .collect();
    let passes = results.iter().map(|r| r.passes).max().unwrap_or(0);
    let mut best = results[0].clone();
    for r in &results[1..] {
        if r.best_density.cmp_exact(&best.best_density).is_gt() {
            best = r.clone();
        }
    }
    best.passes = passes;
    debug_assert_eq!(density(g, &best.best_pair), best.best_density);
    Ok(best)
}
