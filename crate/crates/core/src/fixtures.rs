//! Synthetic graphs: small closed-form instances, seeded random graphs, and
//! the construction that forces threshold peeling without a stopping rule to
//! run for a linear number of iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;
use crate::graph::{DirectedEdgeList, VertexId};

/// Every undirected edge `{i, j}` of `K_k` as the two arcs `i -> j`, `j -> i`.
pub fn bidirected_clique(k: usize) -> DirectedEdgeList {
    let mut pairs = Vec::with_capacity(k * k.saturating_sub(1));
    for i in 0..k as VertexId {
        for j in i + 1..k as VertexId {
            pairs.push((i, j));
            pairs.push((j, i));
        }
    }
    DirectedEdgeList::from_pairs(k, pairs)
}

/// All arcs from sources `0..a` to targets `a..a+b`.
pub fn complete_bipartite(a: usize, b: usize) -> DirectedEdgeList {
    let pairs = (0..a as VertexId)
        .flat_map(|u| (a as VertexId..(a + b) as VertexId).map(move |v| (u, v)));
    DirectedEdgeList::from_pairs(a + b, pairs.collect::<Vec<_>>())
}

/// Each ordered pair `u != v` becomes an arc independently with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> DirectedEdgeList {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for u in 0..n as VertexId {
        for v in 0..n as VertexId {
            if u != v && rng.gen_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    DirectedEdgeList::from_pairs(n, pairs)
}

/// `m` arcs with uniformly random endpoints (parallel arcs and loops allowed).
pub fn random_stream(n: usize, m: usize, seed: u64) -> DirectedEdgeList {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..m)
        .map(|_| {
            (
                rng.gen_range(0..n as VertexId),
                rng.gen_range(0..n as VertexId),
            )
        })
        .collect();
    DirectedEdgeList::from_pairs(n, pairs)
}

/// A sparse random background on `n` vertices with about `background_m`
/// arcs, plus a complete block from sources `0..a` to targets `a..a+b`.
pub fn planted_block(n: usize, background_m: usize, a: usize, b: usize, seed: u64) -> DirectedEdgeList {
    assert!(a + b <= n, "planted block does not fit");
    let mut el = random_stream(n, background_m, seed);
    for u in 0..a as VertexId {
        for v in a as VertexId..(a + b) as VertexId {
            el.edges.push(crate::graph::DirectedEdge::new(u, v));
        }
    }
    el
}

/// The slow-peeling construction for odd `d >= 3`.
///
/// Vertices `0..d` form `K_d` (directed density `d - 1`). Disjoint from it,
/// a clique on `h = (d+1)/2` vertices is extended by `extra` chain vertices;
/// each chain vertex is joined to the `(d-3)/2` vertices just before it. With
/// thresholds `k_S = k_T = (d-1)/2` the chain's tail loses one vertex per
/// peeling iteration. Every undirected edge is emitted as two arcs.
pub fn make_peeling_adversary(d: usize, extra: usize) -> Result<DirectedEdgeList, GraphError> {
    if d < 3 || d % 2 == 0 {
        return Err(GraphError::InvalidParameter(format!(
            "adversary clique size must be odd and at least 3, got {d}"
        )));
    }
    let head = (d + 1) / 2;
    let back = (d - 3) / 2;
    let n = d + head + extra;
    let mut pairs = Vec::new();
    let mut join = |a: usize, b: usize| {
        pairs.push((a as VertexId, b as VertexId));
        pairs.push((b as VertexId, a as VertexId));
    };
    for i in 0..d {
        for j in i + 1..d {
            join(i, j);
        }
    }
    let base = d;
    for i in 0..head {
        for j in i + 1..head {
            join(base + i, base + j);
        }
    }
    for i in head..head + extra {
        for j in i - back..i {
            join(base + j, base + i);
        }
    }
    Ok(DirectedEdgeList::from_pairs(n, pairs))
}

/// One member of the seeded small-graph corpus used for oracle comparisons.
#[derive(Debug, Clone)]
pub struct CorpusInstance {
    pub index: usize,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub graph: DirectedEdgeList,
}

pub const CORPUS_EDGE_PROBS: [f64; 3] = [0.2, 0.5, 0.8];

/// `count` random digraphs with 2 to 12 vertices per side and edge
/// probability cycling through 0.2, 0.5, 0.8.
pub fn oracle_corpus(count: usize) -> Vec<CorpusInstance> {
    (0..count)
        .map(|index| {
            let n = 2 + (index / 3) % 11;
            let p = CORPUS_EDGE_PROBS[index % 3];
            let seed = 0x5eed_0000 + index as u64;
            CorpusInstance {
                index,
                n,
                p,
                seed,
                graph: random_digraph(n, p, seed),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{density, VertexPair};
    use crate::oracle::exact_densest_with_cap;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    #[test]
    fn adversary_edge_counts() {
        let g = make_peeling_adversary(5, 0).unwrap();
        assert_eq!(g.len(), 26);
        assert_eq!(g.n_vertices, 8);

        // K_3 plus a single edge
        let g = make_peeling_adversary(3, 0).unwrap();
        assert_eq!(g.len(), 2 * (3 + 1));
        assert_eq!(g.n_vertices, 5);
    }

    #[test]
    fn adversary_rejects_bad_sizes() {
        assert!(make_peeling_adversary(4, 1).is_err());
        assert!(make_peeling_adversary(1, 0).is_err());
        assert!(make_peeling_adversary(2, 0).is_err());
    }

    #[test]
    fn adversary_chain_is_sparser_than_clique() {
        for d in [3usize, 5, 7] {
            for extra in 0..=5 {
                let el = make_peeling_adversary(d, extra).unwrap();
                let clique: Vec<u32> = (0..d as u32).collect();
                let chain: Vec<u32> = (d as u32..el.n_vertices as u32).collect();

                let k = el.restrict(&clique).to_bipartite();
                let (_, best) = exact_densest_with_cap(&k, 14).unwrap();
                assert_eq!(best.value, (d - 1) as f64);

                let c = el.restrict(&chain).to_bipartite();
                let (_, chain_best) = exact_densest_with_cap(&c, 14).unwrap();
                assert!(
                    chain_best.value < (d - 1) as f64,
                    "d={d} extra={extra}: chain density {}",
                    chain_best.value
                );
            }
        }
    }

    #[test]
    fn complete_bipartite_density() {
        let g = complete_bipartite(6, 6).to_bipartite();
        let pair = VertexPair::new((0..6).collect(), (6..12).collect());
        assert_eq!(density(&g, &pair).value, 6.0);
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = oracle_corpus(30);
        let b = oracle_corpus(30);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.graph, y.graph);
            assert!(x.n >= 2 && x.n <= 12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bipartite_keeps_every_edge(n in 1usize..40, m in 0usize..200, seed in any::<u64>()) {
            let el = random_stream(n, m, seed);
            let g = el.to_bipartite();
            prop_assert_eq!(g.m(), el.len());
            let left: usize = (0..n as u32).map(|u| g.left_degree(u)).sum();
            let right: usize = (0..n as u32).map(|v| g.right_degree(v)).sum();
            prop_assert_eq!(left, g.m());
            prop_assert_eq!(right, g.m());
        }

        #[test]
        fn density_is_invariant_under_relabeling(n in 1usize..20, p in 0.05f64..0.9, seed in any::<u64>(),
                                                 s_mask in any::<u32>(), t_mask in any::<u32>()) {
            let el = random_digraph(n, p, seed);
            let mut perm: Vec<u32> = (0..n as u32).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xabc));
            let relabeled = DirectedEdgeList::from_pairs(
                n, el.pairs().map(|(u, v)| (perm[u as usize], perm[v as usize])).collect::<Vec<_>>());
            let keep = |m: u32| (0..n as u32).filter(|i| m & (1 << (i % 32)) != 0).collect::<Vec<_>>();
            let pair = VertexPair::new(keep(s_mask), keep(t_mask));
            let moved = VertexPair::new(
                pair.s.iter().map(|&u| perm[u as usize]).collect(),
                pair.t.iter().map(|&v| perm[v as usize]).collect());
            let a = density(&el.to_bipartite(), &pair);
            let b = density(&relabeled.to_bipartite(), &moved);
            prop_assert_eq!(a.value, b.value);
        }
    }
}
