//! Exact directed densest subgraph by enumeration, for desk-scale checks.

use std::cmp::Ordering;

use crate::error::GraphError;
use crate::graph::{BipartiteGraph, DensityValue, VertexId, VertexPair};

pub const DEFAULT_SIDE_CAP: usize = 14;

pub fn exact_densest(g: &BipartiteGraph) -> Result<(VertexPair, DensityValue), GraphError> {
    exact_densest_with_cap(g, DEFAULT_SIDE_CAP)
}

/// Returns an optimal `(S, T)` over all non-empty subset pairs.
///
/// Every source set `S` is enumerated; for a fixed `S` and a fixed `|T| = t`
/// the best `T` is the `t` right vertices with the most edges from `S`, so
/// the inner maximisation is exact without enumerating `T`. Ties are broken
/// towards the smallest `(S mask, T mask)` pair, comparing `S` first.
pub fn exact_densest_with_cap(
    g: &BipartiteGraph,
    cap: usize,
) -> Result<(VertexPair, DensityValue), GraphError> {
    let n = g.side_len();
    if n > cap || n > 30 {
        return Err(GraphError::SizeCapExceeded { cap, side: n });
    }
    if n == 0 {
        return Ok((VertexPair::empty(), DensityValue::zero()));
    }

    // rows[u][v] = multiplicity of edge u -> v
    let mut rows = vec![vec![0u64; n]; n];
    for (u, v) in g.edges() {
        rows[u as usize][v as usize] += 1;
    }

    let mut best: Option<(DensityValue, u32, u32)> = None;
    let mut counts = vec![0u64; n];
    let mut order: Vec<usize> = (0..n).collect();

    for s_mask in 1u32..(1u32 << n) {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut bits = s_mask;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for (c, &r) in counts.iter_mut().zip(&rows[u]) {
                *c += r;
            }
        }
        let s_size = s_mask.count_ones() as usize;
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));

        let mut sum = 0u64;
        let mut t_mask = 0u32;
        for (i, &v) in order.iter().enumerate() {
            sum += counts[v];
            t_mask |= 1 << v;
            let cand = DensityValue::from_counts(sum, s_size, i + 1);
            let replace = match &best {
                None => true,
                Some((b, bs, bt)) => match cand.cmp_exact(b) {
                    Ordering::Greater => true,
                    Ordering::Equal => (s_mask, t_mask) < (*bs, *bt),
                    Ordering::Less => false,
                },
            };
            if replace {
                best = Some((cand, s_mask, t_mask));
            }
        }
    }

    let (value, s_mask, t_mask) = best.expect("n > 0 gives at least one candidate");
    let pair = VertexPair::new(mask_members(s_mask), mask_members(t_mask));
    Ok((pair, value))
}

fn mask_members(mask: u32) -> Vec<VertexId> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}
