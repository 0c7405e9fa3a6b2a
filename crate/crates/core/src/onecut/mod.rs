//! Distributed computation of all subtree cuts of a rooted spanning tree.
//!
//! Given a connected weighted graph `G` and a spanning tree `T` rooted at
//! `r`, every node `v` ends up knowing `cut(v↓)` — the weight of the edges
//! leaving its subtree — and the whole network learns the minimum over all
//! `v != r` together with a witness. The route is the subtree identity
//!
//! ```text
//! cut(v↓) = delta_down(v) - 2 * rho_down(v)
//! ```
//!
//! where `delta_down` sums weighted degrees over `v↓` and `rho_down` sums
//! the weights of edges whose endpoints' LCA lies in `v↓`. Both quantities
//! are aggregated through the fragment decomposition so that no phase needs
//! more than O(sqrt(n) + D) rounds on shallow trees:
//!
//! 1. partition `T` into fragments and make the fragment tree global;
//! 2. give every node its in-scope ancestor list, the set of fragments
//!    fully inside its subtree, and the lowest ancestor holding each
//!    fragment;
//! 3. split `delta_down` into an intra-fragment suffix sum plus broadcast
//!    per-fragment totals;
//! 4. find merging nodes and the tree over fragment roots and merging
//!    nodes;
//! 5. resolve the LCA of every graph edge over the edge itself, then
//!    aggregate `rho_down` from keyed pipelined sums.
//!
//! Phases are barrier-synchronized by the driver: each runs in its own
//! simulator invocation, either for a precomputed worst-case round window
//! or with local termination detection where a node can tell it is done.

mod ancestors;
mod delta;
mod lca;
mod merging;
mod rho;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::congest::{Metrics, Network, SimError};
use crate::fragments::{build_fragment_tree, partition_and_elect, FragmentForest, FragmentTree, NodePartition};
use crate::graph::{Graph, GraphError, NodeId, RootedTree, Weight};
use crate::protocols::{broadcast_all_windowed, build_bfs, convergecast_min, BfsTree};

pub use lca::LcaCase;

#[derive(Debug, Error)]
pub enum OnecutError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Tuning knobs for a run; the defaults follow the analysis.
#[derive(Debug, Clone, Default)]
pub struct OnecutOptions {
    /// Fragment size parameter; defaults to ceil(sqrt(n)).
    pub k: Option<usize>,
    /// Track per-edge message counts during the LCA phase.
    pub log_edges: bool,
    /// Overrides the livelock guard of 10 * (n + D + 100) rounds.
    pub round_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PerNodeCut {
    pub v: NodeId,
    pub delta_down: Weight,
    pub rho_down: Weight,
    pub cut_down: Weight,
}

/// The network-level answer plus every node's local output.
#[derive(Debug, Clone, Serialize)]
pub struct CutReport {
    pub c_star: Weight,
    pub v_star: NodeId,
    /// The tree edge whose removal realizes `c_star`, as (parent, child).
    pub cut_edge: (NodeId, NodeId),
    pub per_node: Vec<PerNodeCut>,
    pub metrics: Metrics,
}

/// Per-edge LCA result as seen from endpoint `u`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeLcaRecord {
    pub u: NodeId,
    pub v: NodeId,
    pub lca: NodeId,
    pub case_at_u: LcaCase,
}

/// Everything a test or the verifier may want to inspect after a run.
#[derive(Debug, Clone)]
pub struct OnecutOutcome {
    pub report: CutReport,
    pub forest: FragmentForest,
    pub ftree: FragmentTree,
    /// One record per graph edge, in `Graph::edges` order.
    pub lca_by_edge: Vec<EdgeLcaRecord>,
    /// Messages per graph edge (both directions) during the LCA phase,
    /// present when `log_edges` was set.
    pub lca_messages_per_edge: Option<Vec<u64>>,
    pub congestion_violations: u64,
    pub max_fields: u32,
}

/// Tree over fragment roots and merging nodes; parent = lowest ancestor in
/// the member set. Global knowledge after its broadcast phase.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TprimeView {
    pub members: Vec<NodeId>,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
}

impl TprimeView {
    pub fn is_member(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn index_of(&self, v: NodeId) -> usize {
        self.members.binary_search(&v).expect("not a member")
    }

    /// Deepest common ancestor of two members, by walking parents.
    pub fn lca(&self, a: NodeId, b: NodeId) -> NodeId {
        let (mut x, mut y) = (self.index_of(a), self.index_of(b));
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].unwrap();
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].unwrap();
        }
        while x != y {
            x = self.parent[x].unwrap();
            y = self.parent[y].unwrap();
        }
        self.members[x]
    }
}

/// What one node has learned so far; filled in phase by phase.
#[derive(Debug, Clone, Default)]
pub(crate) struct Know {
    /// Fragment indices (into the fragment tree) strictly below this node.
    pub below: Vec<usize>,
    /// Ancestors within the node's own and parent fragment, self first,
    /// one entry per hop: `(node, fragment id)`.
    pub a_list: Vec<(NodeId, u64)>,
    /// Per fragment id: the lowest ancestor whose subtree contains the
    /// whole fragment, and whether that ancestor shares this node's
    /// fragment. Self-holdings are included.
    pub holder: std::collections::HashMap<u64, (NodeId, bool)>,
    pub delta_intra: Weight,
    pub delta_down: Weight,
    pub is_merging: bool,
    /// Lowest ancestor-or-self that is a fragment root or merging node.
    pub anchor: NodeId,
    /// Per port: resolved LCA of that edge.
    pub lca: Vec<Option<lca::PortLca>>,
    /// Total weight keyed to this node over its intra-fragment subtree.
    pub key_total: Weight,
    /// Suffix aggregate of `key_total` over the intra-fragment subtree.
    pub w_intra: Weight,
    pub rho_down: Weight,
    pub cut_down: Weight,
}

/// Driver state threaded through the phases.
pub(crate) struct Pipeline<'a> {
    pub g: &'a Graph,
    pub t: &'a RootedTree,
    pub k: usize,
    pub net: Network,
    pub cap: usize,
    pub log_edges: bool,
    pub metrics: Metrics,
    pub bfs: BfsTree,
    pub forest: FragmentForest,
    pub part: Vec<NodePartition>,
    pub ftree: Arc<FragmentTree>,
    pub merging: Vec<NodeId>,
    pub tprime: Arc<TprimeView>,
    pub know: Vec<Know>,
    pub merging_totals: Vec<Weight>,
    pub lca_channel_counts: Option<Vec<u64>>,
    pub congestion_violations: u64,
    pub max_fields: u32,
}

impl<'a> Pipeline<'a> {
    pub fn new(g: &'a Graph, t: &'a RootedTree, opts: &OnecutOptions) -> Result<Self, OnecutError> {
        let n = g.n();
        if t.n() != n {
            return Err(OnecutError::Invariant("tree and graph sizes differ".into()));
        }
        let k = opts.k.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize).max(1);
        let net = Network::new(g);

        // The BFS phase measures the depth every later window depends on.
        let (bfs, bfs_stats) = build_bfs(&net, t.root())?;
        let mut metrics = Metrics::default();
        metrics.record("bfs", &bfs_stats);
        let cap = opts.round_cap.unwrap_or(10 * (n + bfs.height + 100));

        let (forest, part, frag_stats) = partition_and_elect(&net, t, k)?;
        metrics.record("partition", &frag_stats[0]);
        metrics.record("elect_ids", &frag_stats[1]);

        let (ftree, ftree_stats) = build_fragment_tree(&net, t, &bfs, &forest, &part)?;
        metrics.record("fragment_tree_exchange", &ftree_stats[0]);
        metrics.record("fragment_tree_broadcast", &ftree_stats[1]);

        let mut pipeline = Pipeline {
            g,
            t,
            k,
            net,
            cap,
            log_edges: opts.log_edges,
            metrics,
            bfs,
            forest,
            part,
            ftree: Arc::new(ftree),
            merging: Vec::new(),
            tprime: Arc::new(TprimeView::default()),
            know: vec![Know::default(); n],
            merging_totals: Vec::new(),
            lca_channel_counts: None,
            congestion_violations: 0,
            max_fields: 0,
        };
        for stat in std::iter::once(&bfs_stats).chain(frag_stats.iter()).chain(ftree_stats.iter()) {
            pipeline.congestion_violations += stat.congestion_violations;
            pipeline.max_fields = pipeline.max_fields.max(stat.max_fields_per_message);
        }
        Ok(pipeline)
    }

    pub(crate) fn record(&mut self, name: &str, stats: &crate::congest::RunStats) {
        self.congestion_violations += stats.congestion_violations;
        self.max_fields = self.max_fields.max(stats.max_fields_per_message);
        self.metrics.record(name, stats);
    }

    pub fn max_frag_height(&self) -> usize {
        self.forest.max_height()
    }

    pub fn frag_count(&self) -> usize {
        self.forest.fragment_count()
    }

    /// F(v): fragments fully contained in v's subtree — the strictly-below
    /// set plus the node's own fragment when it is the fragment root.
    pub fn f_set(&self, v: NodeId) -> Vec<u64> {
        let mut ids: Vec<u64> = self.know[v].below.iter().map(|&i| self.ftree.ids[i]).collect();
        if self.part[v].is_head {
            ids.push(self.part[v].frag_id);
        }
        ids.sort_unstable();
        ids
    }

    /// Runs phases 2-5 and the final minimum selection.
    pub fn complete(mut self) -> Result<OnecutOutcome, OnecutError> {
        ancestors::subtree_fragments(&mut self)?;
        ancestors::ancestor_lists(&mut self)?;
        ancestors::ancestor_holders(&mut self)?;
        delta::delta_down(&mut self)?;
        merging::merging_nodes(&mut self)?;
        merging::tprime(&mut self)?;
        lca::edge_lca(&mut self)?;
        rho::rho_down(&mut self)?;
        self.finish()
    }

    fn finish(mut self) -> Result<OnecutOutcome, OnecutError> {
        let n = self.g.n();
        let root = self.t.root();

        // Local combination at every node, then a global minimum excluding
        // the root (whose subtree cut is the forbidden full node set).
        let mut per_node = Vec::with_capacity(n);
        for v in 0..n {
            let k = &mut self.know[v];
            let twice_rho = 2 * k.rho_down;
            if k.delta_down < twice_rho {
                return Err(OnecutError::Invariant(format!(
                    "negative subtree cut at node {v}: delta {} < 2*rho {}",
                    k.delta_down, twice_rho
                )));
            }
            k.cut_down = k.delta_down - twice_rho;
            per_node.push(PerNodeCut { v, delta_down: k.delta_down, rho_down: k.rho_down, cut_down: k.cut_down });
        }
        if self.know[root].rho_down != self.g.total_weight() {
            return Err(OnecutError::Invariant(format!(
                "rho conservation failed: root sum {} != total weight {}",
                self.know[root].rho_down,
                self.g.total_weight()
            )));
        }
        if self.know[root].cut_down != 0 {
            return Err(OnecutError::Invariant("root subtree cut is nonzero".into()));
        }

        let values: Vec<(u64, u64)> = (0..n)
            .map(|v| if v == root { (u64::MAX, v as u64) } else { (self.know[v].cut_down, v as u64) })
            .collect();
        let ((c_star, v_star), stats) = convergecast_min(&self.net, &self.bfs.ports, values)?;
        self.record("min_select", &stats);
        let v_star = v_star as NodeId;

        let mut lca_by_edge = Vec::with_capacity(self.g.edges().len());
        for (idx, e) in self.g.edges().iter().enumerate() {
            let port = self.net.port_to(e.u, e.v).unwrap();
            let pl = self.know[e.u].lca[port]
                .ok_or_else(|| OnecutError::Invariant(format!("edge {idx} has no LCA result")))?;
            lca_by_edge.push(EdgeLcaRecord { u: e.u, v: e.v, lca: pl.lca, case_at_u: pl.case });
        }

        let lca_messages_per_edge = self.lca_channel_counts.as_ref().map(|counts| {
            let mut per_edge = vec![0u64; self.g.edges().len()];
            for v in 0..n {
                for inc in self.g.adjacency(v) {
                    let port = self.net.port_to(v, inc.to).unwrap();
                    per_edge[inc.edge] += counts[self.net.channel_of(v, port)];
                }
            }
            per_edge
        });

        let report = CutReport {
            c_star,
            v_star,
            cut_edge: (self.t.parent(v_star).unwrap_or(root), v_star),
            per_node,
            metrics: self.metrics,
        };
        Ok(OnecutOutcome {
            report,
            forest: self.forest,
            ftree: Arc::try_unwrap(self.ftree).unwrap_or_else(|a| (*a).clone()),
            lca_by_edge,
            lca_messages_per_edge,
            congestion_violations: self.congestion_violations,
            max_fields: self.max_fields,
        })
    }

    /// Tokens of `(id, value)` pairs from scattered emitters; everyone
    /// receives the full sorted list. Shared by several phases.
    pub(crate) fn broadcast_pairs(
        &mut self,
        phase: &str,
        tokens: Vec<Vec<crate::congest::Message>>,
        bound: usize,
    ) -> Result<Vec<(u64, u64)>, OnecutError> {
        let (seq, stats) = broadcast_all_windowed(&self.net, &self.bfs, tokens, bound)?;
        self.record(phase, &stats);
        Ok(seq.iter().map(|m| (m.field(0), m.field(1))).collect())
    }
}

/// Runs the full distributed pipeline and returns every node's
/// `(delta_down, rho_down, cut_down)` plus the global minimum.
pub fn run_one_respecting(g: &Graph, t: &RootedTree, opts: &OnecutOptions) -> Result<OnecutOutcome, OnecutError> {
    Pipeline::new(g, t, opts)?.complete()
}

#[cfg(test)]
mod tests;
