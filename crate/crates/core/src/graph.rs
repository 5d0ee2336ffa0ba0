//! Directed edge lists, their bipartite representation, and density evaluation.
//!
//! A directed graph on `V` is viewed as an undirected bipartite graph whose left
//! side and right side are both copies of `V`; the directed edge `u -> v` becomes
//! the undirected edge `left(u) -- right(v)`. Parallel edges are kept, so all
//! counts are multigraph counts.

use std::cmp::Ordering;

use serde::Serialize;

/// Dense vertex identifier, valid on either side of a [`BipartiteGraph`].
pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DirectedEdge {
    pub source: VertexId,
    pub target: VertexId,
    pub timestamp: Option<u64>,
}

impl DirectedEdge {
    pub fn new(source: VertexId, target: VertexId) -> Self {
        Self {
            source,
            target,
            timestamp: None,
        }
    }

    pub fn with_timestamp(source: VertexId, target: VertexId, timestamp: u64) -> Self {
        Self {
            source,
            target,
            timestamp: Some(timestamp),
        }
    }
}

/// An ordered sequence of directed edges over the dense vertex range
/// `0..n_vertices`. The order is the stream order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DirectedEdgeList {
    pub edges: Vec<DirectedEdge>,
    pub n_vertices: usize,
}

impl DirectedEdgeList {
    /// Builds a list from `(source, target)` pairs. `n_vertices` is raised to
    /// cover every endpoint.
    pub fn from_pairs<I>(n_vertices: usize, pairs: I) -> Self
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let edges: Vec<DirectedEdge> = pairs
            .into_iter()
            .map(|(u, v)| DirectedEdge::new(u, v))
            .collect();
        let needed = edges
            .iter()
            .map(|e| e.source.max(e.target) as usize + 1)
            .max()
            .unwrap_or(0);
        Self {
            edges,
            n_vertices: n_vertices.max(needed),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + Clone + '_ {
        self.edges.iter().map(|e| (e.source, e.target))
    }

    pub fn has_timestamps(&self) -> bool {
        self.edges.iter().all(|e| e.timestamp.is_some())
    }

    pub fn to_bipartite(&self) -> BipartiteGraph {
        BipartiteGraph::from_edges(self.n_vertices, self.pairs())
    }

    /// Keeps only edges with both endpoints in `vertices` and relabels them
    /// densely in the order given.
    pub fn restrict(&self, vertices: &[VertexId]) -> DirectedEdgeList {
        let mut relabel = vec![u32::MAX; self.n_vertices];
        for (i, &v) in vertices.iter().enumerate() {
            relabel[v as usize] = i as u32;
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let (a, b) = (relabel[e.source as usize], relabel[e.target as usize]);
                (a != u32::MAX && b != u32::MAX).then_some(DirectedEdge {
                    source: a,
                    target: b,
                    timestamp: e.timestamp,
                })
            })
            .collect();
        DirectedEdgeList {
            edges,
            n_vertices: vertices.len(),
        }
    }
}

/// Immutable bipartite multigraph in CSR form. Both sides have `side_len()`
/// vertices; `n()` is the total `|S| + |T|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    side_len: usize,
    left_offsets: Vec<usize>,
    left_adj: Vec<VertexId>,
    right_offsets: Vec<usize>,
    right_adj: Vec<VertexId>,
}

impl BipartiteGraph {
    /// Builds the CSR form with a counting sort, so each adjacency list keeps
    /// the input edge order.
    pub fn from_edges<I>(side_len: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
        I::IntoIter: Clone,
    {
        let iter = edges.into_iter();
        let mut left_offsets = vec![0usize; side_len + 1];
        let mut right_offsets = vec![0usize; side_len + 1];
        for (u, v) in iter.clone() {
            assert!(
                (u as usize) < side_len && (v as usize) < side_len,
                "edge ({u}, {v}) out of range for side length {side_len}"
            );
            left_offsets[u as usize + 1] += 1;
            right_offsets[v as usize + 1] += 1;
        }
        for i in 0..side_len {
            left_offsets[i + 1] += left_offsets[i];
            right_offsets[i + 1] += right_offsets[i];
        }
        let m = left_offsets[side_len];
        let mut left_adj = vec![0; m];
        let mut right_adj = vec![0; m];
        let mut lpos = left_offsets.clone();
        let mut rpos = right_offsets.clone();
        for (u, v) in iter {
            left_adj[lpos[u as usize]] = v;
            lpos[u as usize] += 1;
            right_adj[rpos[v as usize]] = u;
            rpos[v as usize] += 1;
        }
        Self {
            side_len,
            left_offsets,
            left_adj,
            right_offsets,
            right_adj,
        }
    }

    pub fn empty(side_len: usize) -> Self {
        Self::from_edges(side_len, std::iter::empty())
    }

    /// Vertices per side (the directed graph's vertex count).
    pub fn side_len(&self) -> usize {
        self.side_len
    }

    /// Total vertex count `|S| + |T|`.
    pub fn n(&self) -> usize {
        2 * self.side_len
    }

    pub fn m(&self) -> usize {
        self.left_adj.len()
    }

    pub fn left_degree(&self, u: VertexId) -> usize {
        let u = u as usize;
        self.left_offsets[u + 1] - self.left_offsets[u]
    }

    pub fn right_degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.right_offsets[v + 1] - self.right_offsets[v]
    }

    pub fn left_neighbors(&self, u: VertexId) -> &[VertexId] {
        let u = u as usize;
        &self.left_adj[self.left_offsets[u]..self.left_offsets[u + 1]]
    }

    pub fn right_neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.right_adj[self.right_offsets[v]..self.right_offsets[v + 1]]
    }

    /// All edges as `(left, right)` in CSR order (left-major). This is the
    /// enumeration order used by edge sampling.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + Clone + '_ {
        (0..self.side_len as VertexId)
            .flat_map(move |u| self.left_neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn full_pair(&self) -> VertexPair {
        let all: Vec<VertexId> = (0..self.side_len as VertexId).collect();
        VertexPair {
            s: all.clone(),
            t: all,
        }
    }
}

/// A pair `(S, T)` of left and right vertex sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct VertexPair {
    pub s: Vec<VertexId>,
    pub t: Vec<VertexId>,
}

impl VertexPair {
    pub fn new(mut s: Vec<VertexId>, mut t: Vec<VertexId>) -> Self {
        s.sort_unstable();
        s.dedup();
        t.sort_unstable();
        t.dedup();
        Self { s, t }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Collects the indices whose mask entry is set.
    pub fn from_masks(s_mask: &[bool], t_mask: &[bool]) -> Self {
        let pick = |mask: &[bool]| {
            mask.iter()
                .enumerate()
                .filter_map(|(i, &on)| on.then_some(i as VertexId))
                .collect()
        };
        Self {
            s: pick(s_mask),
            t: pick(t_mask),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty() && self.t.is_empty()
    }

    pub fn has_empty_side(&self) -> bool {
        self.s.is_empty() || self.t.is_empty()
    }

    /// Collapses a pair with exactly one empty side to `(∅, ∅)`.
    pub fn normalized(self) -> Self {
        if self.has_empty_side() {
            Self::empty()
        } else {
            self
        }
    }
}

/// `|E(S,T)| / sqrt(|S| |T|)` together with the counts it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityValue {
    pub value: f64,
    pub edge_count: u64,
    pub s_size: usize,
    pub t_size: usize,
}

impl DensityValue {
    pub fn from_counts(edge_count: u64, s_size: usize, t_size: usize) -> Self {
        let value = if s_size == 0 || t_size == 0 {
            0.0
        } else {
            edge_count as f64 / ((s_size as f64) * (t_size as f64)).sqrt()
        };
        Self {
            value,
            edge_count,
            s_size,
            t_size,
        }
    }

    pub fn zero() -> Self {
        Self::from_counts(0, 0, 0)
    }

    /// Exact comparison of `e1/sqrt(a1)` against `e2/sqrt(a2)` through
    /// `e1² a2` vs `e2² a1` in 128-bit integers.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        let lhs_zero = self.s_size == 0 || self.t_size == 0 || self.edge_count == 0;
        let rhs_zero = other.s_size == 0 || other.t_size == 0 || other.edge_count == 0;
        match (lhs_zero, rhs_zero) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => {
                let a1 = self.s_size as u128 * self.t_size as u128;
                let a2 = other.s_size as u128 * other.t_size as u128;
                let e1 = self.edge_count as u128;
                let e2 = other.edge_count as u128;
                (e1 * e1 * a2).cmp(&(e2 * e2 * a1))
            }
        }
    }
}

/// Counts `|E(S, T)|` with multiplicity and returns the density of `pair`.
pub fn density(g: &BipartiteGraph, pair: &VertexPair) -> DensityValue {
    if pair.has_empty_side() {
        return DensityValue::from_counts(0, pair.s.len(), pair.t.len());
    }
    let mut in_t = vec![false; g.side_len()];
    for &v in &pair.t {
        in_t[v as usize] = true;
    }
    let edges: u64 = pair
        .s
        .iter()
        .map(|&u| {
            g.left_neighbors(u)
                .iter()
                .filter(|&&v| in_t[v as usize])
                .count() as u64
        })
        .sum();
    DensityValue::from_counts(edges, pair.s.len(), pair.t.len())
}

/// Recounts the densities of several pairs in one sequential pass over an
/// edge stream. Used for reporting streaming results, which cannot keep the
/// edges themselves.
pub fn recount_densities<I>(side_len: usize, edges: I, pairs: &[VertexPair]) -> Vec<DensityValue>
where
    I: IntoIterator<Item = (VertexId, VertexId)>,
{
    let masks: Vec<(Vec<bool>, Vec<bool>)> = pairs
        .iter()
        .map(|p| {
            let mut s = vec![false; side_len];
            let mut t = vec![false; side_len];
            p.s.iter().for_each(|&u| s[u as usize] = true);
            p.t.iter().for_each(|&v| t[v as usize] = true);
            (s, t)
        })
        .collect();
    let mut counts = vec![0u64; pairs.len()];
    for (u, v) in edges {
        for (count, (s, t)) in counts.iter_mut().zip(&masks) {
            if s[u as usize] && t[v as usize] {
                *count += 1;
            }
        }
    }
    counts
        .into_iter()
        .zip(pairs)
        .map(|(c, p)| DensityValue::from_counts(c, p.s.len(), p.t.len()))
        .collect()
}
