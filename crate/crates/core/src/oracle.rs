//! Centralized brute-force reference implementations.
//!
//! Everything in this module is a pure function over immutable inputs and is
//! deliberately written as directly as possible: these are the ground truth
//! the distributed implementations are tested against.

use crate::graph::{Graph, NodeId, RootedTree, Weight};

/// Per-node subtree-cut record: `cut_down = delta_down - 2 * rho_down`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneRespectRow {
    pub delta_down: Weight,
    pub rho_down: Weight,
    pub cut_down: Weight,
}

#[derive(Debug, Clone)]
pub struct OneRespectTable {
    pub rows: Vec<OneRespectRow>,
}

/// Least common ancestor by walking parent pointers.
pub fn lca_naive(t: &RootedTree, x: NodeId, y: NodeId) -> NodeId {
    let (mut x, mut y) = (x, y);
    while t.depth(x) > t.depth(y) {
        x = t.parent(x).unwrap();
    }
    while t.depth(y) > t.depth(x) {
        y = t.parent(y).unwrap();
    }
    while x != y {
        x = t.parent(x).unwrap();
        y = t.parent(y).unwrap();
    }
    x
}

/// Computes `delta_down`, `rho_down` and `cut_down` for every node.
///
/// `cut_down` is derived twice — once through the subtree identity and once
/// as a direct cut evaluation — and the two routes must agree; a mismatch
/// can only mean a bug in this module and panics.
pub fn one_respect_table(g: &Graph, t: &RootedTree) -> OneRespectTable {
    let n = g.n();
    let mut delta_down: Vec<Weight> = (0..n).map(|v| g.weighted_degree(v)).collect();
    let mut rho_down: Vec<Weight> = vec![0; n];
    for e in g.edges() {
        rho_down[lca_naive(t, e.u, e.v)] += e.w;
    }
    for v in t.bottom_up_order() {
        if let Some(p) = t.parent(v) {
            delta_down[p] += delta_down[v];
            rho_down[p] += rho_down[v];
        }
    }
    let rows: Vec<OneRespectRow> = (0..n)
        .map(|v| {
            let cut_down = delta_down[v] - 2 * rho_down[v];
            if v == t.root() {
                assert_eq!(cut_down, 0, "root subtree cut must be zero");
            } else {
                let direct = g.cut_value(&t.descendant_mask(v)).unwrap();
                assert_eq!(cut_down, direct, "subtree-cut identity failed at node {v}");
            }
            OneRespectRow { delta_down: delta_down[v], rho_down: rho_down[v], cut_down }
        })
        .collect();
    OneRespectTable { rows }
}

/// Minimum of `cut_down` over all non-root nodes; ties go to the smaller ID.
pub fn min_one_respecting_cut_oracle(g: &Graph, t: &RootedTree) -> (Weight, NodeId) {
    let table = one_respect_table(g, t);
    (0..g.n())
        .filter(|&v| v != t.root())
        .map(|v| (table.rows[v].cut_down, v))
        .min()
        .expect("graph must have at least two nodes")
}

/// Exact global minimum cut via Stoer–Wagner phases. Deterministic:
/// maximum-adjacency ties are broken toward the smallest node ID.
pub fn global_min_cut_oracle(g: &Graph) -> (Weight, Vec<NodeId>) {
    let n = g.n();
    assert!(n >= 2, "minimum cut needs at least two nodes");
    // members[i] = original nodes merged into supernode i; dead supernodes
    // have an empty member list.
    let mut members: Vec<Vec<NodeId>> = (0..n).map(|v| vec![v]).collect();
    let mut w: Vec<Vec<Weight>> = vec![vec![0; n]; n];
    for e in g.edges() {
        w[e.u][e.v] += e.w;
        w[e.v][e.u] += e.w;
    }
    let mut alive: Vec<NodeId> = (0..n).collect();
    let mut best: Option<(Weight, Vec<NodeId>)> = None;

    while alive.len() > 1 {
        // One maximum-adjacency phase.
        let mut in_a = vec![false; n];
        let mut key: Vec<Weight> = vec![0; n];
        let start = alive[0];
        in_a[start] = true;
        for &v in &alive {
            key[v] = w[start][v];
        }
        let mut order = vec![start];
        while order.len() < alive.len() {
            let next = alive
                .iter()
                .copied()
                .filter(|&v| !in_a[v])
                .max_by_key(|&v| (key[v], std::cmp::Reverse(v)))
                .unwrap();
            in_a[next] = true;
            order.push(next);
            for &v in &alive {
                if !in_a[v] {
                    key[v] += w[next][v];
                }
            }
        }
        let t = *order.last().unwrap();
        let s = order[order.len() - 2];
        let cut_of_phase = key[t];
        let candidate = (cut_of_phase, members[t].clone());
        if best.as_ref().map(|(b, side)| (cut_of_phase, &candidate.1) < (*b, side)).unwrap_or(true) {
            best = Some(candidate);
        }
        // Merge t into s.
        let moved = std::mem::take(&mut members[t]);
        members[s].extend(moved);
        members[s].sort_unstable();
        for &v in &alive {
            if v != s && v != t {
                w[s][v] += w[t][v];
                w[v][s] = w[s][v];
            }
        }
        alive.retain(|&v| v != t);
    }

    let (lambda, mut side) = best.unwrap();
    side.sort_unstable();
    (lambda, side)
}

/// Exhaustive minimum cut over all proper subsets containing node 0's
/// complement choices. Only usable for small `n`; test helper.
pub fn global_min_cut_exhaustive(g: &Graph) -> Weight {
    let n = g.n();
    assert!(n <= 20);
    let mut best = Weight::MAX;
    for mask in 1..(1u32 << (n - 1)) {
        let side: Vec<bool> = (0..n).map(|v| v + 1 < n && mask >> v & 1 == 1).collect();
        best = best.min(g.cut_value(&side).unwrap());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_graph;

    fn g1() -> Graph {
        load_graph("0 1 1\n1 2 2\n2 3 1\n0 3 3\n1 3 1").unwrap()
    }

    fn path_tree(g: &Graph) -> RootedTree {
        let parent = (0..g.n()).map(|v| if v == 0 { None } else { Some(v - 1) }).collect();
        RootedTree::from_parents(g, 0, parent).unwrap()
    }

    fn binary_tree() -> (Graph, RootedTree) {
        let g = load_graph("0 1 1\n0 2 1\n1 3 1\n1 4 1\n2 5 1\n2 6 1").unwrap();
        let parent = vec![None, Some(0), Some(0), Some(1), Some(1), Some(2), Some(2)];
        let t = RootedTree::from_parents(&g, 0, parent).unwrap();
        (g, t)
    }

    #[test]
    fn lca_cases() {
        let g = load_graph("0 1 1\n1 2 1\n2 3 1").unwrap();
        let t = path_tree(&g);
        assert_eq!(lca_naive(&t, 2, 3), 2);
        let (_, t) = binary_tree();
        assert_eq!(lca_naive(&t, 3, 5), 0);
        assert_eq!(lca_naive(&t, 3, 4), 1);
    }

    #[test]
    fn table_on_g1_path() {
        let g = g1();
        let t = path_tree(&g);
        let table = one_respect_table(&g, &t);
        assert_eq!(table.rows[1], OneRespectRow { delta_down: 12, rho_down: 4, cut_down: 4 });
        assert_eq!(table.rows[3], OneRespectRow { delta_down: 5, rho_down: 0, cut_down: 5 });
        assert_eq!(table.rows[0], OneRespectRow { delta_down: 16, rho_down: 8, cut_down: 0 });
    }

    #[test]
    fn min_over_subtree_cuts() {
        let g = g1();
        let t = path_tree(&g);
        assert_eq!(min_one_respecting_cut_oracle(&g, &t), (4, 1));

        let g = load_graph("0 1 5").unwrap();
        let t = RootedTree::from_parents(&g, 0, vec![None, Some(0)]).unwrap();
        assert_eq!(min_one_respecting_cut_oracle(&g, &t), (5, 1));

        // Star with unit leaves: every leaf cut is 1, smallest ID wins.
        let g = Graph::from_edges((1..5).map(|v| (0, v, 1))).unwrap();
        let parent = vec![None, Some(0), Some(0), Some(0), Some(0)];
        let t = RootedTree::from_parents(&g, 0, parent).unwrap();
        assert_eq!(min_one_respecting_cut_oracle(&g, &t), (1, 1));
    }

    #[test]
    fn stoer_wagner_on_small_graphs() {
        let g = g1();
        let (lambda, side) = global_min_cut_oracle(&g);
        assert_eq!(lambda, 3);
        assert_eq!(g.cut_value_of_set(&side).unwrap(), 3);

        let cycle = Graph::from_edges((0..5).map(|v| (v, (v + 1) % 5, 1))).unwrap();
        assert_eq!(global_min_cut_oracle(&cycle).0, 2);

        let two = load_graph("0 1 5").unwrap();
        assert_eq!(global_min_cut_oracle(&two).0, 5);
    }

    #[test]
    fn stoer_wagner_matches_exhaustive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..60 {
            let n = rng.gen_range(2..=9);
            let mut edges = Vec::new();
            for v in 1..n {
                let u = rng.gen_range(0..v);
                edges.push((u, v, rng.gen_range(1..=6)));
            }
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.35) {
                        edges.push((u, v, rng.gen_range(1..=6)));
                    }
                }
            }
            let g = Graph::from_edges(edges).unwrap();
            let (lambda, side) = global_min_cut_oracle(&g);
            assert_eq!(lambda, global_min_cut_exhaustive(&g), "trial {trial}");
            assert_eq!(g.cut_value_of_set(&side).unwrap(), lambda);
        }
    }

    #[test]
    fn subtree_min_dominates_global_min() {
        let g = g1();
        let t = path_tree(&g);
        assert!(min_one_respecting_cut_oracle(&g, &t).0 >= global_min_cut_oracle(&g).0);
    }
}
