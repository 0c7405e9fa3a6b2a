//! Weighted undirected graphs and rooted spanning trees.
//!
//! All node IDs are dense (`0..n`), all weights are positive integers, and
//! every structure is immutable after construction, so the types here can be
//! shared freely across threads and phases.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

pub type NodeId = usize;
pub type Weight = u64;

/// Largest admissible weight on a single edge.
pub const MAX_EDGE_WEIGHT: Weight = 1 << 32;

/// Largest admissible total weight. Degree sums go up to twice this value,
/// which must still fit in a `u64`.
pub const MAX_TOTAL_WEIGHT: Weight = 1 << 62;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: expected `u v w`, found {found:?}")]
    Malformed { line: usize, found: String },
    #[error("line {line}: non-integer token {token:?}")]
    BadInteger { line: usize, token: String },
    #[error("line {line}: self-loop at node {node}")]
    SelfLoop { line: usize, node: NodeId },
    #[error("line {line}: weight {weight} out of range [1, 2^32]")]
    BadWeight { line: usize, weight: u64 },
    #[error("graph is disconnected: node {node} is unreachable from node 0")]
    Disconnected { node: NodeId },
    #[error("graph has no edges")]
    Empty,
    #[error("total weight exceeds 2^62")]
    TotalWeightOverflow,
    #[error("node {node} out of range (n = {n})")]
    BadNode { node: NodeId, n: usize },
    #[error("cut side must be a proper nonempty subset of the nodes")]
    BadCutSide,
    #[error("tree edge ({u}, {v}) does not exist in the graph")]
    MissingTreeEdge { u: NodeId, v: NodeId },
    #[error("tree does not span the graph: node {node} is not covered")]
    NotSpanning { node: NodeId },
    #[error("tree edges contain a cycle or are disconnected from root {root}")]
    NotATree { root: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: Weight,
}

/// Incidence entry: neighbor, edge weight, and index into `Graph::edges`.
#[derive(Debug, Clone, Copy)]
pub struct Incidence {
    pub to: NodeId,
    pub w: Weight,
    pub edge: usize,
}

/// Simple connected weighted graph with dense node IDs.
///
/// Parallel edges are merged (weights summed) at construction; self-loops
/// are rejected. Adjacency lists are sorted by neighbor ID.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<Incidence>>,
    total_weight: Weight,
}

impl Graph {
    /// Builds a graph from an edge list. Parallel edges are merged by
    /// summing weights; endpoint order is normalized to `u < v`.
    pub fn from_edges(edges: impl IntoIterator<Item = (NodeId, NodeId, Weight)>) -> Result<Self, GraphError> {
        let mut list: Vec<Edge> = Vec::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(GraphError::SelfLoop { line: 0, node: u });
            }
            if w < 1 || w > MAX_EDGE_WEIGHT {
                return Err(GraphError::BadWeight { line: 0, weight: w });
            }
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            list.push(Edge { u, v, w });
        }
        Self::build(list)
    }

    fn build(mut list: Vec<Edge>) -> Result<Self, GraphError> {
        if list.is_empty() {
            return Err(GraphError::Empty);
        }
        // Merge parallel edges.
        list.sort_by_key(|e| (e.u, e.v));
        let mut edges: Vec<Edge> = Vec::with_capacity(list.len());
        for e in list {
            match edges.last_mut() {
                Some(last) if last.u == e.u && last.v == e.v => last.w += e.w,
                _ => edges.push(e),
            }
        }
        let n = 1 + edges.iter().map(|e| e.u.max(e.v)).max().unwrap();
        let mut total: Weight = 0;
        for e in &edges {
            if e.w > MAX_EDGE_WEIGHT {
                return Err(GraphError::BadWeight { line: 0, weight: e.w });
            }
            total = total.checked_add(e.w).ok_or(GraphError::TotalWeightOverflow)?;
        }
        if total > MAX_TOTAL_WEIGHT {
            return Err(GraphError::TotalWeightOverflow);
        }
        let mut adj: Vec<Vec<Incidence>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push(Incidence { to: e.v, w: e.w, edge: i });
            adj[e.v].push(Incidence { to: e.u, w: e.w, edge: i });
        }
        for list in &mut adj {
            list.sort_by_key(|inc| inc.to);
        }
        let g = Graph { n, edges, adj, total_weight: total };
        if let Some(node) = g.first_unreachable() {
            return Err(GraphError::Disconnected { node });
        }
        Ok(g)
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for inc in &self.adj[u] {
                if !seen[inc.to] {
                    seen[inc.to] = true;
                    queue.push_back(inc.to);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self, v: NodeId) -> &[Incidence] {
        &self.adj[v]
    }

    pub fn total_weight(&self) -> Weight {
        self.total_weight
    }

    /// Weighted degree of a node: sum of all its incident edge weights.
    pub fn weighted_degree(&self, v: NodeId) -> Weight {
        self.adj[v].iter().map(|inc| inc.w).sum()
    }

    /// Looks up the weight of edge (u, v), if present.
    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<Weight> {
        self.adj[u]
            .binary_search_by_key(&v, |inc| inc.to)
            .ok()
            .map(|i| self.adj[u][i].w)
    }

    /// Eccentricity of node 0 in hops, computed by one BFS. Lies in
    /// [D/2, D] for the true hop diameter D of a connected graph.
    pub fn bfs_diameter_bound(&self) -> usize {
        self.bfs_levels(0).1
    }

    /// BFS hop distances from `source`, plus the largest distance.
    pub fn bfs_levels(&self, source: NodeId) -> (Vec<usize>, usize) {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        let mut ecc = 0;
        while let Some(u) = queue.pop_front() {
            for inc in &self.adj[u] {
                if dist[inc.to] == usize::MAX {
                    dist[inc.to] = dist[u] + 1;
                    ecc = ecc.max(dist[inc.to]);
                    queue.push_back(inc.to);
                }
            }
        }
        (dist, ecc)
    }

    /// Exact hop diameter via BFS from every node. Test/reporting helper.
    pub fn diameter_exact(&self) -> usize {
        (0..self.n).map(|v| self.bfs_levels(v).1).max().unwrap_or(0)
    }

    /// Total weight of the edges with exactly one endpoint in the set
    /// marked `true`. Both sides must be nonempty.
    pub fn cut_value(&self, in_side: &[bool]) -> Result<Weight, GraphError> {
        if in_side.len() != self.n {
            return Err(GraphError::BadNode { node: in_side.len(), n: self.n });
        }
        let k = in_side.iter().filter(|&&b| b).count();
        if k == 0 || k == self.n {
            return Err(GraphError::BadCutSide);
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| in_side[e.u] != in_side[e.v])
            .map(|e| e.w)
            .sum())
    }

    /// `cut_value` over an explicit node set.
    pub fn cut_value_of_set(&self, side: &[NodeId]) -> Result<Weight, GraphError> {
        let mut mask = vec![false; self.n];
        for &v in side {
            if v >= self.n {
                return Err(GraphError::BadNode { node: v, n: self.n });
            }
            mask[v] = true;
        }
        self.cut_value(&mask)
    }
}

/// Parses the edge-list text format: one `u v w` triple per line, `#`
/// starting a comment line. Node count is one more than the largest ID.
pub fn load_graph(text: &str) -> Result<Graph, GraphError> {
    let mut list = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(GraphError::Malformed { line, found: content.to_string() });
        }
        let parse = |tok: &str| -> Result<u64, GraphError> {
            tok.parse::<u64>().map_err(|_| GraphError::BadInteger { line, token: tok.to_string() })
        };
        let u = parse(toks[0])? as NodeId;
        let v = parse(toks[1])? as NodeId;
        let w = parse(toks[2])?;
        if u == v {
            return Err(GraphError::SelfLoop { line, node: u });
        }
        if w < 1 || w > MAX_EDGE_WEIGHT {
            return Err(GraphError::BadWeight { line, weight: w });
        }
        list.push(Edge { u: u.min(v), v: u.max(v), w });
    }
    Graph::build(list)
}

/// Serializes a graph back to the edge-list format.
pub fn graph_to_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.w).unwrap();
    }
    out
}

/// Spanning tree of a [`Graph`], rooted at a designated node.
#[derive(Debug, Clone)]
pub struct RootedTree {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
}

impl RootedTree {
    /// Builds a rooted tree from per-node parent pointers and validates that
    /// every parent edge exists in `g` and that the tree spans it.
    pub fn from_parents(g: &Graph, root: NodeId, parent: Vec<Option<NodeId>>) -> Result<Self, GraphError> {
        let n = g.n();
        if root >= n {
            return Err(GraphError::BadNode { node: root, n });
        }
        if parent.len() != n {
            return Err(GraphError::NotSpanning { node: parent.len().min(n) });
        }
        if parent[root].is_some() {
            return Err(GraphError::NotATree { root });
        }
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for v in 0..n {
            match parent[v] {
                None if v != root => return Err(GraphError::NotSpanning { node: v }),
                None => {}
                Some(p) => {
                    if p >= n {
                        return Err(GraphError::BadNode { node: p, n });
                    }
                    if g.edge_weight(v, p).is_none() {
                        return Err(GraphError::MissingTreeEdge { u: p, v });
                    }
                    children[p].push(v);
                }
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        // Depths via BFS from the root; a cycle or unreached node shows up
        // as a missing depth.
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                reached += 1;
                queue.push_back(c);
            }
        }
        if reached != n {
            let node = depth.iter().position(|&d| d == usize::MAX).unwrap();
            return Err(GraphError::NotSpanning { node });
        }
        Ok(RootedTree { root, parent, children, depth })
    }

    /// Builds a rooted tree from an undirected edge set.
    pub fn from_edge_set(g: &Graph, root: NodeId, tree_edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let n = g.n();
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(u, v) in tree_edges {
            if u >= n || v >= n {
                return Err(GraphError::BadNode { node: u.max(v), n });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        Self::from_parents(g, root, parent)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    /// Largest depth over all nodes.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// The set `v↓`: descendants of `v` including `v`, in sorted order.
    pub fn descendants(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend_from_slice(&self.children[u]);
        }
        out.sort_unstable();
        out
    }

    /// Membership mask for `v↓`.
    pub fn descendant_mask(&self, v: NodeId) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            mask[u] = true;
            stack.extend_from_slice(&self.children[u]);
        }
        mask
    }

    /// Nodes ordered so that every child appears before its parent.
    pub fn bottom_up_order(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = (0..self.n()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.depth[v]));
        order
    }
}

/// Parses a tree file (lines of `u v`, `#` comments) against a graph.
pub fn load_tree(text: &str, g: &Graph, root: NodeId) -> Result<RootedTree, GraphError> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(GraphError::Malformed { line, found: content.to_string() });
        }
        let parse = |tok: &str| -> Result<NodeId, GraphError> {
            tok.parse::<NodeId>().map_err(|_| GraphError::BadInteger { line, token: tok.to_string() })
        };
        edges.push((parse(toks[0])?, parse(toks[1])?));
    }
    RootedTree::from_edge_set(g, root, &edges)
}

/// DOT rendering of the graph; spanning-tree edges are drawn bold when a
/// tree is supplied, and nodes can carry a fragment-based fill color.
pub fn to_dot(g: &Graph, tree: Option<&RootedTree>, fragment_of: Option<&[u64]>) -> String {
    const PALETTE: [&str; 8] = [
        "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6", "#ffff99", "#1f78b4", "#33a02c",
    ];
    let mut out = String::from("graph g {\n  node [shape=circle];\n");
    if let Some(frag) = fragment_of {
        let mut ids: Vec<u64> = frag.to_vec();
        ids.sort_unstable();
        ids.dedup();
        for v in 0..g.n() {
            let slot = ids.iter().position(|&f| f == frag[v]).unwrap_or(0);
            writeln!(
                out,
                "  {} [style=filled, fillcolor=\"{}\"];",
                v,
                PALETTE[slot % PALETTE.len()]
            )
            .unwrap();
        }
    }
    for e in g.edges() {
        let in_tree = tree
            .map(|t| t.parent(e.u) == Some(e.v) || t.parent(e.v) == Some(e.u))
            .unwrap_or(false);
        let style = if in_tree { ", style=bold, penwidth=2" } else { "" };
        writeln!(out, "  {} -- {} [label=\"{}\"{}];", e.u, e.v, e.w, style).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const G1_TEXT: &str = "0 1 1\n1 2 2\n2 3 1\n0 3 3\n1 3 1";

    fn g1() -> Graph {
        load_graph(G1_TEXT).unwrap()
    }

    fn path_tree(g: &Graph) -> RootedTree {
        let n = g.n();
        let parent = (0..n).map(|v| if v == 0 { None } else { Some(v - 1) }).collect();
        RootedTree::from_parents(g, 0, parent).unwrap()
    }

    #[test]
    fn load_g1() {
        let g = g1();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges().len(), 5);
        assert_eq!(g.total_weight(), 8);
    }

    #[test]
    fn load_minimal() {
        let g = load_graph("0 1 5").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[Edge { u: 0, v: 1, w: 5 }]);
    }

    #[test]
    fn load_disconnected() {
        let err = load_graph("0 1 1\n2 3 1").unwrap_err();
        assert!(matches!(err, GraphError::Disconnected { .. }));
    }

    #[test]
    fn load_rejects_self_loop_with_line() {
        let err = load_graph("0 1 1\n1 1 2").unwrap_err();
        assert_eq!(err, GraphError::SelfLoop { line: 2, node: 1 });
    }

    #[test]
    fn load_rejects_zero_weight() {
        let err = load_graph("0 1 0").unwrap_err();
        assert_eq!(err, GraphError::BadWeight { line: 1, weight: 0 });
    }

    #[test]
    fn load_rejects_garbage() {
        let err = load_graph("0 x 1").unwrap_err();
        assert_eq!(err, GraphError::BadInteger { line: 1, token: "x".into() });
    }

    #[test]
    fn comments_and_parallel_edges() {
        let g = load_graph("# header\n0 1 2\n1 0 3  # dup gets merged\n1 2 1").unwrap();
        assert_eq!(g.edge_weight(0, 1), Some(5));
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn cut_values_on_g1() {
        let g = g1();
        assert_eq!(g.cut_value_of_set(&[3]).unwrap(), 5);
        assert_eq!(g.cut_value_of_set(&[1, 2, 3]).unwrap(), 4);
        assert!(g.cut_value_of_set(&[]).is_err());
        assert!(g.cut_value_of_set(&[0, 1, 2, 3]).is_err());
    }

    #[test]
    fn single_edge_cut() {
        let g = load_graph("0 1 5").unwrap();
        assert_eq!(g.cut_value_of_set(&[0]).unwrap(), 5);
    }

    #[test]
    fn weighted_degrees() {
        let g = g1();
        assert_eq!(g.weighted_degree(0), 4);
        assert_eq!(g.weighted_degree(3), 5);
        assert_eq!(load_graph("0 1 5").unwrap().weighted_degree(0), 5);
        let total: Weight = (0..g.n()).map(|v| g.weighted_degree(v)).sum();
        assert_eq!(total, 2 * g.total_weight());
    }

    #[test]
    fn descendants_on_path_and_binary() {
        let g = load_graph("0 1 1\n1 2 1\n2 3 1").unwrap();
        let t = path_tree(&g);
        assert_eq!(t.descendants(2), vec![2, 3]);
        assert_eq!(t.descendants(0), vec![0, 1, 2, 3]);

        let g = load_graph("0 1 1\n0 2 1\n1 3 1\n1 4 1\n2 5 1\n2 6 1").unwrap();
        let parent = vec![None, Some(0), Some(0), Some(1), Some(1), Some(2), Some(2)];
        let t = RootedTree::from_parents(&g, 0, parent).unwrap();
        assert_eq!(t.descendants(1), vec![1, 3, 4]);
    }

    #[test]
    fn bfs_diameter_bounds() {
        let g = load_graph("0 1 1\n1 2 1\n2 3 1").unwrap();
        assert_eq!(g.bfs_diameter_bound(), 3);
        let k5: Vec<_> = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v, 1))).collect();
        assert_eq!(Graph::from_edges(k5).unwrap().bfs_diameter_bound(), 1);
        // Star with 6 leaves, measured from a leaf.
        let star: Vec<_> = (1..7).map(|v| (v, 0usize, 1)).collect();
        let g = Graph::from_edges(star).unwrap();
        assert_eq!(g.bfs_levels(1).1, 2);
    }

    #[test]
    fn tree_validation_errors() {
        let g = g1();
        // (0, 2) is not an edge of G1.
        let bad = RootedTree::from_parents(&g, 0, vec![None, Some(0), Some(0), Some(2)]);
        assert!(matches!(bad, Err(GraphError::MissingTreeEdge { .. })));
        let missing = load_tree("0 1\n1 2", &g, 0);
        assert_eq!(missing.unwrap_err(), GraphError::NotSpanning { node: 3 });
    }

    #[test]
    fn dot_marks_tree_edges() {
        let g = g1();
        let t = path_tree(&g);
        let dot = to_dot(&g, Some(&t), None);
        assert!(dot.contains("0 -- 1 [label=\"1\", style=bold"));
        assert!(dot.contains("0 -- 3 [label=\"3\"]"));
    }
}
