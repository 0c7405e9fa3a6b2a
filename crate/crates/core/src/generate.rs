//! Deterministic instance generators for tests and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, NodeId, RootedTree, Weight};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("need at least {min} nodes, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("could not generate a connected graph after {attempts} attempts")]
    Connectivity { attempts: usize },
    #[error("random-regular requires n*d even and d < n (n={n}, d={d})")]
    BadRegular { n: usize, d: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Path,
    Cycle,
    Star,
    Gnp { p_millis: u32 },
    Regular { d: usize },
}

fn rand_weight(rng: &mut ChaCha8Rng, lo: Weight, hi: Weight) -> Weight {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Generates a connected instance. `Gnp` resamples (fresh stream, same
/// seed lineage) until connected, up to 64 attempts.
pub fn generate(kind: GraphKind, n: usize, wlo: Weight, whi: Weight, seed: u64) -> Result<Graph, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall { n, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        GraphKind::Path => {
            let edges: Vec<_> = (1..n).map(|v| (v - 1, v, rand_weight(&mut rng, wlo, whi))).collect();
            Ok(Graph::from_edges(edges).unwrap())
        }
        GraphKind::Cycle => {
            if n < 3 {
                return Err(GenError::TooSmall { n, min: 3 });
            }
            let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n, rand_weight(&mut rng, wlo, whi))).collect();
            Ok(Graph::from_edges(edges).unwrap())
        }
        GraphKind::Star => {
            let edges: Vec<_> = (1..n).map(|v| (0, v, rand_weight(&mut rng, wlo, whi))).collect();
            Ok(Graph::from_edges(edges).unwrap())
        }
        GraphKind::Gnp { p_millis } => {
            let p = f64::from(p_millis) / 1000.0;
            for attempt in 0..64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt * 0x9e37_79b9));
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.gen_bool(p) {
                            edges.push((u, v, rand_weight(&mut rng, wlo, whi)));
                        }
                    }
                }
                if edges.is_empty() {
                    continue;
                }
                if let Ok(g) = Graph::from_edges(edges) {
                    if g.n() == n {
                        return Ok(g);
                    }
                }
            }
            Err(GenError::Connectivity { attempts: 64 })
        }
        GraphKind::Regular { d } => {
            if d < 1 || d >= n || (n * d) % 2 != 0 {
                return Err(GenError::BadRegular { n, d });
            }
            // Pairing model: shuffle half-edge stubs, reject self-loops,
            // parallel pairs, and disconnected outcomes.
            for attempt in 0..256 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt * 0x51_7c_c1));
                let mut stubs: Vec<NodeId> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
                stubs.shuffle(&mut rng);
                let mut seen = std::collections::HashSet::new();
                let mut ok = true;
                let mut edges = Vec::with_capacity(n * d / 2);
                for pair in stubs.chunks(2) {
                    let (u, v) = (pair[0], pair[1]);
                    if u == v || !seen.insert((u.min(v), u.max(v))) {
                        ok = false;
                        break;
                    }
                    edges.push((u, v, rand_weight(&mut rng, wlo, whi)));
                }
                if !ok {
                    continue;
                }
                if let Ok(g) = Graph::from_edges(edges) {
                    if g.n() == n {
                        return Ok(g);
                    }
                }
            }
            Err(GenError::Connectivity { attempts: 256 })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// Breadth-first tree from the root (shallow).
    Bfs,
    /// Minimum spanning tree by (weight, edge index).
    Mst,
    /// Kruskal over a random edge order (can be deep).
    RandomSpanning,
}

/// Deterministic spanning tree of `g` rooted at `root`.
pub fn spanning_tree(g: &Graph, root: NodeId, kind: TreeKind, seed: u64) -> RootedTree {
    match kind {
        TreeKind::Bfs => {
            let (dist, _) = g.bfs_levels(root);
            let parent: Vec<Option<NodeId>> = (0..g.n())
                .map(|v| {
                    if v == root {
                        None
                    } else {
                        // Smallest-ID neighbor one level closer to the root.
                        g.adjacency(v).iter().find(|inc| dist[inc.to] + 1 == dist[v]).map(|inc| inc.to)
                    }
                })
                .collect();
            RootedTree::from_parents(g, root, parent).unwrap()
        }
        TreeKind::Mst => {
            let mut order: Vec<usize> = (0..g.edges().len()).collect();
            order.sort_by_key(|&i| (g.edges()[i].w, i));
            kruskal_tree(g, root, &order)
        }
        TreeKind::RandomSpanning => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<usize> = (0..g.edges().len()).collect();
            order.shuffle(&mut rng);
            kruskal_tree(g, root, &order)
        }
    }
}

fn kruskal_tree(g: &Graph, root: NodeId, edge_order: &[usize]) -> RootedTree {
    let mut dsu = DisjointSets::new(g.n());
    let mut chosen = Vec::with_capacity(g.n() - 1);
    for &i in edge_order {
        let e = g.edges()[i];
        if dsu.union(e.u, e.v) {
            chosen.push((e.u, e.v));
            if chosen.len() == g.n() - 1 {
                break;
            }
        }
    }
    RootedTree::from_edge_set(g, root, &chosen).unwrap()
}

/// Union-find with path halving and union by size.
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_kinds() {
        let p = generate(GraphKind::Path, 9, 1, 1, 0).unwrap();
        assert_eq!(p.edges().len(), 8);
        let c = generate(GraphKind::Cycle, 5, 1, 1, 0).unwrap();
        assert_eq!(c.edges().len(), 5);
        let s = generate(GraphKind::Star, 7, 1, 1, 0).unwrap();
        assert_eq!(s.weighted_degree(0), 6);
    }

    #[test]
    fn gnp_deterministic_and_connected() {
        let a = generate(GraphKind::Gnp { p_millis: 100 }, 64, 1, 10, 1).unwrap();
        let b = generate(GraphKind::Gnp { p_millis: 100 }, 64, 1, 10, 1).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.n(), 64);
    }

    #[test]
    fn regular_degree_check() {
        let g = generate(GraphKind::Regular { d: 4 }, 20, 1, 1, 3).unwrap();
        assert!((0..20).all(|v| g.adjacency(v).len() == 4));
        assert!(generate(GraphKind::Regular { d: 3 }, 7, 1, 1, 0).is_err());
    }

    #[test]
    fn spanning_trees_span() {
        let g = generate(GraphKind::Gnp { p_millis: 150 }, 40, 1, 10, 7).unwrap();
        for kind in [TreeKind::Bfs, TreeKind::Mst, TreeKind::RandomSpanning] {
            let t = spanning_tree(&g, 0, kind, 9);
            assert_eq!(t.descendants(0).len(), 40);
        }
        let bfs = spanning_tree(&g, 0, TreeKind::Bfs, 0);
        let (dist, _) = g.bfs_levels(0);
        assert!((0..40).all(|v| bfs.depth(v) == dist[v]));
    }
}
