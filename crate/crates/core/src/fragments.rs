//! Partition of a rooted spanning tree into fragments: connected subtrees
//! with at least `k` nodes each (root fragment excepted) and small hop
//! diameter, so that a tree on ~n/k fragments can be made global knowledge
//! cheaply.
//!
//! The closing rule is a bottom-up residual count: every node adds one to
//! the residual sizes reported by its open children and closes the whole
//! open subtree below it as one fragment when the sum reaches `k`. Each
//! open child subtree has fewer than `k` nodes, so a closed fragment has
//! height at most `k - 1` and hop diameter at most `2k - 2`; its node count
//! is not bounded (a star collapses into one fragment of diameter 2, which
//! is fine — only the diameter matters downstream). The leftover at the
//! root becomes the root's own fragment.

use serde_json::json;

use crate::congest::{run, Halt, Inbox, LogMode, Message, Network, NodeProtocol, Outbox, RunStats, SimError};
use crate::graph::{NodeId, RootedTree};
use crate::protocols::{broadcast_all_windowed, BfsTree};

const TAG_RESID: u8 = 5;
const TAG_LABEL: u8 = 6;
const TAG_ELECT_UP: u8 = 7;
const TAG_ELECT_DOWN: u8 = 8;
const TAG_ID_XCHG: u8 = 9;
const TAG_FTREE_TOKEN: u8 = 10;

/// What one node knows about its own fragment after partition + election.
#[derive(Debug, Clone)]
pub struct NodePartition {
    /// Fragment root `r_i` (the member nearest the tree root).
    pub head: NodeId,
    /// Elected fragment ID: the minimum node ID in the fragment.
    pub frag_id: u64,
    pub is_head: bool,
    pub depth_in_frag: usize,
    pub intra_parent_port: Option<usize>,
    pub intra_children_ports: Vec<usize>,
    /// Tree children living in other fragments (each is a fragment head).
    pub inter_children_ports: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FragmentInfo {
    pub id: u64,
    pub root: NodeId,
    pub members: usize,
    pub height: usize,
    pub diameter: usize,
}

/// Global summary of the partition, assembled by the driver.
#[derive(Debug, Clone)]
pub struct FragmentForest {
    pub k: usize,
    /// Per node: head of its fragment.
    pub label: Vec<NodeId>,
    /// Per node: elected fragment ID.
    pub frag_id: Vec<u64>,
    /// Sorted by fragment ID.
    pub fragments: Vec<FragmentInfo>,
}

impl FragmentForest {
    pub fn fragment_count(&self) -> usize {
        self.fragments.len()
    }

    pub fn max_height(&self) -> usize {
        self.fragments.iter().map(|f| f.height).max().unwrap_or(0)
    }

    pub fn index_of(&self, id: u64) -> usize {
        self.fragments.binary_search_by_key(&id, |f| f.id).expect("unknown fragment id")
    }

    /// Checks every structural invariant against the tree it came from.
    pub fn validate(&self, t: &RootedTree) -> Result<(), String> {
        let n = t.n();
        let k = self.k;
        if self.fragments.len() > n.div_ceil(k) + 1 {
            return Err(format!("{} fragments exceeds ceil(n/k)+1", self.fragments.len()));
        }
        for f in &self.fragments {
            if f.root != t.root() && f.members < k {
                return Err(format!("non-root fragment {} has {} < k members", f.id, f.members));
            }
            if f.diameter > 4 * k {
                return Err(format!("fragment {} has diameter {} > 4k", f.id, f.diameter));
            }
        }
        for v in 0..n {
            // Connectivity: every non-head member hangs below a member of
            // the same fragment.
            if v != self.label[v] {
                let p = t.parent(v).ok_or_else(|| format!("root {v} labeled into another fragment"))?;
                if self.label[p] != self.label[v] {
                    return Err(format!("fragment of node {v} is not connected"));
                }
            }
        }
        let total: usize = self.fragments.iter().map(|f| f.members).sum();
        if total != n {
            return Err(format!("fragments cover {total} of {n} nodes"));
        }
        Ok(())
    }

    /// `{node: fragment_id}` export.
    pub fn labels_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> =
            (0..self.label.len()).map(|v| (v.to_string(), json!(self.frag_id[v]))).collect();
        serde_json::Value::Object(map)
    }
}

/// Centralized twin of the distributed partition; returns the per-node
/// head labels. The distributed version must match this exactly.
pub fn partition_reference(t: &RootedTree, k: usize) -> Vec<NodeId> {
    let n = t.n();
    let mut resid = vec![0u64; n];
    let mut closed = vec![false; n];
    for v in t.bottom_up_order() {
        let acc: u64 = 1 + t.children(v).iter().map(|&c| resid[c]).sum::<u64>();
        closed[v] = acc >= k.max(1) as u64 || v == t.root();
        resid[v] = if closed[v] { 0 } else { acc };
    }
    let mut label = vec![0; n];
    let mut order: Vec<NodeId> = (0..n).collect();
    order.sort_by_key(|&v| t.depth(v));
    for v in order {
        label[v] = if closed[v] { v } else { label[t.parent(v).unwrap()] };
    }
    label
}

struct PartitionNode {
    id: NodeId,
    k: u64,
    is_root: bool,
    tree_parent_port: Option<usize>,
    tree_children_ports: Vec<usize>,
    /// Residual reported by each tree child (0 = that child closed).
    child_resid: Vec<Option<u64>>,
    sent_label: Vec<bool>,
    closed: bool,
    decided: bool,
    head: Option<NodeId>,
    depth_in_frag: usize,
}

impl NodeProtocol for PartitionNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (port, msg) in inbox.iter() {
            match msg.tag() {
                TAG_RESID => {
                    let i = self.tree_children_ports.iter().position(|&cp| cp == port).unwrap();
                    self.child_resid[i] = Some(msg.field(0));
                }
                TAG_LABEL => {
                    debug_assert_eq!(Some(port), self.tree_parent_port);
                    self.head = Some(msg.field(0) as NodeId);
                    self.depth_in_frag = msg.field(1) as usize;
                }
                other => panic!("unexpected tag {other}"),
            }
        }
        if !self.decided && self.child_resid.iter().all(Option::is_some) {
            self.decided = true;
            let acc: u64 = 1 + self.child_resid.iter().map(|r| r.unwrap()).sum::<u64>();
            self.closed = acc >= self.k || self.is_root;
            if let Some(pp) = self.tree_parent_port {
                out.send(pp, Message::new(TAG_RESID, &[if self.closed { 0 } else { acc }]));
            }
            if self.closed {
                self.head = Some(self.id);
                self.depth_in_frag = 0;
            }
        }
        // Push the head label down the open edges as soon as it is known.
        if let Some(head) = self.head {
            for (i, &cp) in self.tree_children_ports.iter().enumerate() {
                if !self.sent_label[i] && matches!(self.child_resid[i], Some(r) if r > 0) {
                    out.send(cp, Message::new(TAG_LABEL, &[head as u64, self.depth_in_frag as u64 + 1]));
                    self.sent_label[i] = true;
                }
            }
        }
    }
}

struct ElectNode {
    id: NodeId,
    intra_parent_port: Option<usize>,
    intra_children_ports: Vec<usize>,
    waiting: usize,
    min_id: u64,
    count: u64,
    sent_up: bool,
    frag_id: Option<u64>,
    forwarded: bool,
}

impl NodeProtocol for ElectNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (_port, msg) in inbox.iter() {
            match msg.tag() {
                TAG_ELECT_UP => {
                    self.min_id = self.min_id.min(msg.field(0));
                    self.count += msg.field(1);
                    self.waiting -= 1;
                }
                TAG_ELECT_DOWN => self.frag_id = Some(msg.field(0)),
                other => panic!("unexpected tag {other}"),
            }
        }
        if self.waiting == 0 && !self.sent_up {
            self.sent_up = true;
            match self.intra_parent_port {
                Some(pp) => out.send(pp, Message::new(TAG_ELECT_UP, &[self.min_id, self.count])),
                None => self.frag_id = Some(self.min_id),
            }
        }
        if let Some(id) = self.frag_id {
            if !self.forwarded {
                self.forwarded = true;
                for &cp in &self.intra_children_ports {
                    out.send(cp, Message::new(TAG_ELECT_DOWN, &[id]));
                }
            }
        }
        let _ = self.id;
    }
}

/// Raw per-node partition state before IDs are elected.
struct RawPartition {
    head: NodeId,
    is_head: bool,
    depth_in_frag: usize,
    intra_parent_port: Option<usize>,
    intra_children_ports: Vec<usize>,
    inter_children_ports: Vec<usize>,
}

/// Distributed bottom-up partition followed by intra-fragment ID election.
/// Runs in two fixed windows (`2*depth(T) + 8` and `2*max_frag_height + 8`)
/// with O(1) messages per tree edge per direction in each.
pub fn partition_and_elect(
    net: &Network,
    t: &RootedTree,
    k: usize,
) -> Result<(FragmentForest, Vec<NodePartition>, Vec<RunStats>), SimError> {
    let n = net.n();
    let tree_ports = crate::protocols::TreePorts::from_rooted_tree(net, t);
    let mut nodes: Vec<PartitionNode> = (0..n)
        .map(|id| PartitionNode {
            id,
            k: k.max(1) as u64,
            is_root: id == t.root(),
            tree_parent_port: tree_ports.parent_port[id],
            tree_children_ports: tree_ports.children_ports[id].clone(),
            child_resid: vec![None; tree_ports.children_ports[id].len()],
            sent_label: vec![false; tree_ports.children_ports[id].len()],
            closed: false,
            decided: false,
            head: None,
            depth_in_frag: 0,
        })
        .collect();
    let window = 2 * t.height() + 8;
    let stats_a = run(net, &mut nodes, Halt::AtRound(window), window + 1, LogMode::Off, "partition")?;

    let mut raw: Vec<RawPartition> = Vec::with_capacity(n);
    for (v, node) in nodes.iter().enumerate() {
        let head = node.head.ok_or_else(|| SimError::PhaseIncomplete {
            phase: "partition".into(),
            node: v,
            detail: "no fragment label".into(),
        })?;
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for (i, &cp) in node.tree_children_ports.iter().enumerate() {
            if node.child_resid[i] == Some(0) {
                inter.push(cp);
            } else {
                intra.push(cp);
            }
        }
        raw.push(RawPartition {
            head,
            is_head: node.closed,
            depth_in_frag: node.depth_in_frag,
            intra_parent_port: if node.closed { None } else { node.tree_parent_port },
            intra_children_ports: intra,
            inter_children_ports: inter,
        });
    }

    // Election: min-ID convergecast and result downcast inside fragments.
    let mut heights = std::collections::HashMap::new();
    for r in &raw {
        let h = heights.entry(r.head).or_insert(0usize);
        *h = (*h).max(r.depth_in_frag);
    }
    let max_h = heights.values().copied().max().unwrap_or(0);
    let mut elect: Vec<ElectNode> = raw
        .iter()
        .enumerate()
        .map(|(id, r)| ElectNode {
            id,
            intra_parent_port: r.intra_parent_port,
            intra_children_ports: r.intra_children_ports.clone(),
            waiting: r.intra_children_ports.len(),
            min_id: id as u64,
            count: 1,
            sent_up: false,
            frag_id: None,
            forwarded: false,
        })
        .collect();
    let window = 2 * max_h + 8;
    let stats_b = run(net, &mut elect, Halt::AtRound(window), window + 1, LogMode::Off, "elect_ids")?;

    let mut per_node = Vec::with_capacity(n);
    for (v, (r, e)) in raw.into_iter().zip(&elect).enumerate() {
        let frag_id = e.frag_id.ok_or_else(|| SimError::PhaseIncomplete {
            phase: "elect_ids".into(),
            node: v,
            detail: "no elected id".into(),
        })?;
        per_node.push(NodePartition {
            head: r.head,
            frag_id,
            is_head: r.is_head,
            depth_in_frag: r.depth_in_frag,
            intra_parent_port: r.intra_parent_port,
            intra_children_ports: r.intra_children_ports,
            inter_children_ports: r.inter_children_ports,
        });
    }

    let forest = assemble_forest(t, k, &per_node);
    Ok((forest, per_node, vec![stats_a, stats_b]))
}

fn assemble_forest(t: &RootedTree, k: usize, per_node: &[NodePartition]) -> FragmentForest {
    let n = t.n();
    let label: Vec<NodeId> = per_node.iter().map(|p| p.head).collect();
    let frag_id: Vec<u64> = per_node.iter().map(|p| p.frag_id).collect();
    let mut heads: Vec<NodeId> = per_node.iter().map(|p| p.head).collect();
    heads.sort_unstable();
    heads.dedup();
    let mut fragments: Vec<FragmentInfo> = heads
        .iter()
        .map(|&head| {
            let members: Vec<NodeId> = (0..n).filter(|&v| label[v] == head).collect();
            FragmentInfo {
                id: frag_id[head],
                root: head,
                members: members.len(),
                height: members.iter().map(|&v| per_node[v].depth_in_frag).max().unwrap(),
                diameter: fragment_diameter(t, &label, &members),
            }
        })
        .collect();
    fragments.sort_by_key(|f| f.id);
    FragmentForest { k: k.max(1), label, frag_id, fragments }
}

/// Hop diameter of one fragment's induced subtree, by double BFS.
fn fragment_diameter(t: &RootedTree, label: &[NodeId], members: &[NodeId]) -> usize {
    let far = |start: NodeId| -> (NodeId, usize) {
        let mut dist = std::collections::HashMap::from([(start, 0usize)]);
        let mut queue = std::collections::VecDeque::from([start]);
        let mut best = (start, 0);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            if d > best.1 || (d == best.1 && u < best.0) {
                best = (u, d);
            }
            let mut step = |w: NodeId| {
                if label[w] == label[u] && !dist.contains_key(&w) {
                    dist.insert(w, d + 1);
                    queue.push_back(w);
                }
            };
            if let Some(p) = t.parent(u) {
                step(p);
            }
            for &c in t.children(u) {
                step(c);
            }
        }
        best
    };
    let (a, _) = far(members[0]);
    far(a).1
}

/// One edge of the fragment tree, as carried in a broadcast token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterFragmentEdge {
    /// Parent-side endpoint (a regular member of the parent fragment).
    pub parent_node: NodeId,
    /// Child-side endpoint (the head of the child fragment).
    pub child_node: NodeId,
    pub parent_frag: u64,
    pub child_frag: u64,
}

/// The tree of fragments: what contracting every fragment of `T` leaves.
/// Every node holds an identical copy after the broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentTree {
    /// Sorted fragment IDs; all other vectors are indexed consistently.
    pub ids: Vec<u64>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Head node (`r_i`) of each fragment.
    pub root_node: Vec<NodeId>,
    /// Parent-side endpoint of each fragment's upward edge.
    pub attach_node: Vec<Option<NodeId>>,
    pub root_frag: usize,
    pub edges: Vec<InterFragmentEdge>,
}

impl FragmentTree {
    pub fn index_of(&self, id: u64) -> usize {
        self.ids.binary_search(&id).expect("unknown fragment id")
    }

    /// All fragments in the subtree of `idx`, including `idx`.
    pub fn subtree(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![idx];
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend_from_slice(&self.children[i]);
        }
        out.sort_unstable();
        out
    }

    fn from_edges(mut edges: Vec<InterFragmentEdge>, single: (u64, NodeId), tree_root: NodeId) -> Result<Self, String> {
        edges.sort_by_key(|e| (e.child_frag, e.parent_frag));
        if edges.is_empty() {
            return Ok(FragmentTree {
                ids: vec![single.0],
                parent: vec![None],
                children: vec![Vec::new()],
                root_node: vec![single.1],
                attach_node: vec![None],
                root_frag: 0,
                edges,
            });
        }
        let mut ids: Vec<u64> = edges.iter().flat_map(|e| [e.parent_frag, e.child_frag]).collect();
        ids.sort_unstable();
        ids.dedup();
        let f = ids.len();
        let mut parent = vec![None; f];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); f];
        let mut root_node = vec![usize::MAX; f];
        let mut attach_node = vec![None; f];
        for e in &edges {
            let ci = ids.binary_search(&e.child_frag).unwrap();
            let pi = ids.binary_search(&e.parent_frag).unwrap();
            if parent[ci].is_some() {
                return Err(format!("fragment {} has two parents", e.child_frag));
            }
            parent[ci] = Some(pi);
            children[pi].push(ci);
            root_node[ci] = e.child_node;
            attach_node[ci] = Some(e.parent_node);
        }
        let roots: Vec<usize> = (0..f).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(format!("{} root fragments", roots.len()));
        }
        let root_frag = roots[0];
        root_node[root_frag] = tree_root;
        Ok(FragmentTree { ids, parent, children, root_node, attach_node, root_frag, edges })
    }
}

struct FtreeExchangeNode {
    frag_id: u64,
    intra_parent_port: Option<usize>,
    tree_parent_port: Option<usize>,
    inter_children_ports: Vec<usize>,
    /// (port, peer fragment id) for every incident inter-fragment tree edge.
    peer_frag: Vec<(usize, u64)>,
}

impl NodeProtocol for FtreeExchangeNode {
    fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
        if round == 0 {
            // A head's parent edge is inter-fragment; so is every edge to a
            // closed child. Exchange elected IDs across exactly those.
            if self.intra_parent_port.is_none() {
                if let Some(pp) = self.tree_parent_port {
                    out.send(pp, Message::new(TAG_ID_XCHG, &[self.frag_id]));
                }
            }
            for &cp in &self.inter_children_ports {
                out.send(cp, Message::new(TAG_ID_XCHG, &[self.frag_id]));
            }
        }
        for (port, msg) in inbox.iter() {
            debug_assert_eq!(msg.tag(), TAG_ID_XCHG);
            self.peer_frag.push((port, msg.field(0)));
        }
    }
}

/// Makes the fragment tree global knowledge: endpoints of each
/// inter-fragment tree edge exchange fragment IDs, the smaller-ID endpoint
/// emits a token, and all tokens are broadcast over the BFS tree.
pub fn build_fragment_tree(
    net: &Network,
    t: &RootedTree,
    bfs: &BfsTree,
    forest: &FragmentForest,
    per_node: &[NodePartition],
) -> Result<(FragmentTree, Vec<RunStats>), SimError> {
    let n = net.n();
    let mut nodes: Vec<FtreeExchangeNode> = (0..n)
        .map(|v| FtreeExchangeNode {
            frag_id: per_node[v].frag_id,
            intra_parent_port: per_node[v].intra_parent_port,
            tree_parent_port: t.parent(v).map(|p| net.port_to(v, p).unwrap()),
            inter_children_ports: per_node[v].inter_children_ports.clone(),
            peer_frag: Vec::new(),
        })
        .collect();
    let stats_a = run(net, &mut nodes, Halt::AtRound(2), 3, LogMode::Off, "fragment_tree")?;

    // Token per inter-fragment edge, emitted by the smaller-ID endpoint:
    // (parent_node, child_node, parent_frag, child_frag).
    let mut tokens: Vec<Vec<Message>> = vec![Vec::new(); n];
    for (v, node) in nodes.iter().enumerate() {
        for &(port, peer_id) in &node.peer_frag {
            let u = net.ports(v)[port].neighbor;
            if v > u {
                continue;
            }
            let fields = if Some(port) == node.tree_parent_port && node.intra_parent_port.is_none() {
                // v is the child-side head.
                [u as u64, v as u64, peer_id, node.frag_id]
            } else {
                [v as u64, u as u64, node.frag_id, peer_id]
            };
            tokens[v].push(Message::new(TAG_FTREE_TOKEN, &fields));
        }
    }
    let expected = forest.fragment_count() - 1;
    let emitted: usize = tokens.iter().map(Vec::len).sum();
    if emitted != expected {
        return Err(SimError::PhaseIncomplete {
            phase: "fragment_tree".into(),
            node: 0,
            detail: format!("{emitted} tokens for {expected} inter-fragment edges"),
        });
    }
    let bound = (n / forest.k.max(1)) + 1;
    let (seq, stats_b) = broadcast_all_windowed(net, bfs, tokens, bound.max(expected))?;

    let edges: Vec<InterFragmentEdge> = seq
        .iter()
        .map(|m| InterFragmentEdge {
            parent_node: m.field(0) as NodeId,
            child_node: m.field(1) as NodeId,
            parent_frag: m.field(2),
            child_frag: m.field(3),
        })
        .collect();
    let single = (forest.frag_id[t.root()], t.root());
    let ftree = FragmentTree::from_edges(edges, single, t.root()).map_err(|detail| SimError::PhaseIncomplete {
        phase: "fragment_tree".into(),
        node: 0,
        detail,
    })?;
    Ok((ftree, vec![stats_a, stats_b]))
}

/// Contracts `T` along the forest labels; the reference twin of the
/// broadcast fragment tree.
pub fn contract_tree(t: &RootedTree, forest: &FragmentForest) -> Vec<(u64, Option<u64>)> {
    let mut out: Vec<(u64, Option<u64>)> = forest
        .fragments
        .iter()
        .map(|f| {
            let parent_frag = t.parent(f.root).map(|p| forest.frag_id[p]);
            (f.id, parent_frag)
        })
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::protocols::build_bfs;

    fn path9() -> (Graph, RootedTree) {
        let g = Graph::from_edges((1..9).map(|v| (v - 1, v, 1))).unwrap();
        let parent = (0..9).map(|v| if v == 0 { None } else { Some(v - 1) }).collect();
        let t = RootedTree::from_parents(&g, 0, parent).unwrap();
        (g, t)
    }

    fn binary7() -> (Graph, RootedTree) {
        let g = Graph::from_edges([(0, 1, 1), (0, 2, 1), (1, 3, 1), (1, 4, 1), (2, 5, 1), (2, 6, 1)]).unwrap();
        let parent = vec![None, Some(0), Some(0), Some(1), Some(1), Some(2), Some(2)];
        let t = RootedTree::from_parents(&g, 0, parent).unwrap();
        (g, t)
    }

    fn groups(label: &[NodeId]) -> Vec<Vec<NodeId>> {
        let mut heads: Vec<NodeId> = label.to_vec();
        heads.sort_unstable();
        heads.dedup();
        heads
            .iter()
            .map(|&h| (0..label.len()).filter(|&v| label[v] == h).collect())
            .collect()
    }

    #[test]
    fn reference_on_path9() {
        let (_, t) = path9();
        let label = partition_reference(&t, 3);
        assert_eq!(groups(&label), vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
    }

    #[test]
    fn reference_on_binary_tree() {
        let (_, t) = binary7();
        let label = partition_reference(&t, 3);
        assert_eq!(groups(&label), vec![vec![0], vec![1, 3, 4], vec![2, 5, 6]]);
    }

    #[test]
    fn reference_single_fragment_when_k_is_n() {
        let (_, t) = path9();
        let label = partition_reference(&t, 9);
        assert_eq!(groups(&label), vec![(0..9).collect::<Vec<_>>()]);
        // k > n degenerates the same way.
        let label = partition_reference(&t, 100);
        assert_eq!(groups(&label).len(), 1);
    }

    #[test]
    fn distributed_matches_reference() {
        let (g, t) = path9();
        let net = Network::new(&g);
        let (forest, per_node, _) = partition_and_elect(&net, &t, 3).unwrap();
        assert_eq!(forest.label, partition_reference(&t, 3));
        assert_eq!(forest.fragment_count(), 3);
        forest.validate(&t).unwrap();
        // Elected IDs and roots on the middle fragment.
        assert_eq!(forest.frag_id[4], 3);
        assert_eq!(per_node[4].head, 3);
        assert!(per_node[3].is_head);
        assert_eq!(per_node[3].depth_in_frag, 0);
        assert_eq!(per_node[5].depth_in_frag, 2);
    }

    #[test]
    fn elect_on_binary_tree() {
        let (g, t) = binary7();
        let net = Network::new(&g);
        let (forest, per_node, _) = partition_and_elect(&net, &t, 3).unwrap();
        forest.validate(&t).unwrap();
        assert_eq!(forest.frag_id[5], 2);
        assert_eq!(per_node[5].head, 2);
        assert_eq!(forest.frag_id[0], 0);
        assert!(per_node[0].is_head);
    }

    #[test]
    fn fragment_tree_on_path9() {
        let (g, t) = path9();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 0).unwrap();
        let (forest, per_node, _) = partition_and_elect(&net, &t, 3).unwrap();
        let (ftree, _) = build_fragment_tree(&net, &t, &bfs, &forest, &per_node).unwrap();
        assert_eq!(ftree.ids, vec![0, 3, 6]);
        assert_eq!(ftree.root_frag, 0);
        assert_eq!(ftree.parent, vec![None, Some(0), Some(1)]);
        assert_eq!(ftree.root_node, vec![0, 3, 6]);
        assert_eq!(ftree.attach_node, vec![None, Some(2), Some(5)]);
    }

    #[test]
    fn fragment_tree_on_binary7() {
        let (g, t) = binary7();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 0).unwrap();
        let (forest, per_node, _) = partition_and_elect(&net, &t, 3).unwrap();
        let (ftree, _) = build_fragment_tree(&net, &t, &bfs, &forest, &per_node).unwrap();
        assert_eq!(ftree.ids, vec![0, 1, 2]);
        assert_eq!(ftree.parent, vec![None, Some(0), Some(0)]);
        assert_eq!(ftree.subtree(0), vec![0, 1, 2]);
        // Contraction twin agrees.
        let contracted = contract_tree(&t, &forest);
        assert_eq!(contracted, vec![(0, None), (1, Some(0)), (2, Some(0))]);
    }

    #[test]
    fn fragment_tree_single_fragment() {
        let (g, t) = path9();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 0).unwrap();
        let (forest, per_node, _) = partition_and_elect(&net, &t, 20).unwrap();
        let (ftree, _) = build_fragment_tree(&net, &t, &bfs, &forest, &per_node).unwrap();
        assert_eq!(ftree.ids, vec![0]);
        assert!(ftree.edges.is_empty());
    }

    #[test]
    fn forest_invariants_on_random_trees() {
        use crate::generate::{generate, spanning_tree, GraphKind, TreeKind};
        for seed in 0..8 {
            let n = 30 + (seed as usize) * 37;
            let g = generate(GraphKind::Gnp { p_millis: 200 }, n, 1, 4, seed).unwrap();
            let t = spanning_tree(&g, 0, TreeKind::RandomSpanning, seed);
            let k = (n as f64).sqrt().ceil() as usize;
            let net = Network::new(&g);
            let (forest, _, _) = partition_and_elect(&net, &t, k).unwrap();
            forest.validate(&t).unwrap();
            assert_eq!(forest.label, partition_reference(&t, k));
        }
    }
}
