//! Step 5b: aggregate `rho_down` from the per-edge LCA results.
//!
//! Edges split by where their LCA `z` sits relative to the endpoints:
//!
//! * endpoints in fragments other than `z`'s (case 2) — the smaller-ID
//!   endpoint contributes `(z, w)` to a keyed pipelined sum over the BFS
//!   tree, keys being the merging nodes; the per-key totals are broadcast
//!   and each merging node injects its own total locally;
//! * everything else — the endpoint sharing `z`'s fragment keeps `(z, w)`
//!   (smaller ID when both do), and pipelined per-ancestor streams inside
//!   each fragment give every node the keyed total over its intra-fragment
//!   subtree.
//!
//! A second intra-fragment pass turns keyed totals into subtree suffixes,
//! fragment heads broadcast their fragment totals, and `rho_down(v)` is
//! the local suffix plus the totals of fragments fully below `v`.

use crate::congest::{run, Halt, Inbox, LogMode, Message, NodeProtocol, Outbox, SimError};
use crate::graph::Weight;

use super::delta::intra_subtree_sum;
use super::lca::LcaCase;
use super::{OnecutError, Pipeline};

const TAG_SUFFIX: u8 = 23;
const TAG_MERGING_TOTAL: u8 = 24;
const TAG_RHO_FRAG: u8 = 25;

/// Streams per-ancestor keyed totals up a fragment. A node of
/// in-fragment depth `d` emits entries `t = 1..=d`, entry `t` being the
/// subtree total keyed to its ancestor `t` hops up; entry `t` is ready
/// once every intra child has delivered its entry `t + 1`.
struct SuffixNode {
    intra_parent_port: Option<usize>,
    intra_children_ports: Vec<usize>,
    depth: usize,
    /// `tally[j]`: local token weight keyed `j` hops up (0 = self).
    tally: Vec<Weight>,
    recv_cnt: Vec<usize>,
    /// `agg[t]`: sum of the children's `t`-th entries.
    agg: Vec<Weight>,
    sent: usize,
}

impl NodeProtocol for SuffixNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (port, msg) in inbox.iter() {
            debug_assert_eq!(msg.tag(), TAG_SUFFIX);
            let c = self.intra_children_ports.iter().position(|&cp| cp == port).expect("suffix from non-child");
            self.recv_cnt[c] += 1;
            self.agg[self.recv_cnt[c]] += msg.field(0);
        }
        if self.sent < self.depth && self.recv_cnt.iter().all(|&r| r >= self.sent + 2) {
            let t = self.sent + 1;
            out.send(
                self.intra_parent_port.expect("positive depth means an intra parent"),
                Message::new(TAG_SUFFIX, &[self.tally[t] + self.agg[t + 1]]),
            );
            self.sent = t;
        }
    }

    fn is_done(&self) -> bool {
        self.sent == self.depth && self.recv_cnt.iter().all(|&r| r == self.depth + 1)
    }
}

pub(super) fn rho_down(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();

    // Sort tokens out of the LCA results. Each edge contributes exactly
    // once: symmetric cases defer to the smaller ID.
    let m = p.merging.len();
    let mut merging_contrib: Vec<Vec<u64>> = vec![vec![0; m]; n];
    let mut keyed: Vec<Vec<(usize, Weight)>> = vec![Vec::new(); n];
    for v in 0..n {
        for (port, pl) in p.know[v].lca.iter().enumerate() {
            let pl = pl.expect("LCA phase complete");
            let peer = p.net.ports(v)[port].neighbor;
            let w = p.net.ports(v)[port].weight;
            match pl.case {
                LcaCase::OutsideBoth if v < peer => {
                    let key = p.merging.binary_search(&pl.lca).map_err(|_| {
                        OnecutError::Invariant(format!("case-2 LCA {} is not a merging node", pl.lca))
                    })?;
                    merging_contrib[v][key] += w;
                }
                LcaCase::SameFragment if v < peer => {
                    keyed[v].push((pl.lca, w));
                }
                LcaCase::InMine => keyed[v].push((pl.lca, w)),
                _ => {}
            }
        }
    }

    // Keyed sum over the BFS tree, then totals to everyone. The keyed
    // convergecast runs even with zero keys (it is a no-op then).
    let (totals, stats) = crate::protocols::convergecast_sum(
        &p.net,
        &p.bfs.ports,
        p.bfs.source,
        merging_contrib,
        m,
    )?;
    p.record("rho_merging_sum", &stats);
    let mut tokens: Vec<Vec<Message>> = vec![Vec::new(); n];
    for (key, &total) in totals.iter().enumerate() {
        tokens[p.bfs.source].push(Message::new(TAG_MERGING_TOTAL, &[p.merging[key] as u64, total]));
    }
    let pairs = p.broadcast_pairs("rho_merging_broadcast", tokens, m)?;
    p.merging_totals = p
        .merging
        .iter()
        .map(|&z| pairs.iter().find(|(id, _)| *id == z as u64).map(|&(_, w)| w).unwrap_or(0))
        .collect();

    // Intra-fragment keyed streams, with each merging node injecting its
    // broadcast total as a self-keyed token.
    let mut nodes: Vec<SuffixNode> = (0..n)
        .map(|v| {
            let depth = p.part[v].depth_in_frag;
            let mut tally = vec![0; depth + 1];
            for &(key, w) in &keyed[v] {
                let j = p.know[v].a_list[..=depth]
                    .iter()
                    .position(|&(a, _)| a == key)
                    .expect("keyed token target is an in-fragment ancestor");
                tally[j] += w;
            }
            if p.know[v].is_merging {
                let mi = p.merging.binary_search(&v).unwrap();
                tally[0] += p.merging_totals[mi];
            }
            SuffixNode {
                intra_parent_port: p.part[v].intra_parent_port,
                intra_children_ports: p.part[v].intra_children_ports.clone(),
                depth,
                tally,
                recv_cnt: vec![0; p.part[v].intra_children_ports.len()],
                agg: vec![0; depth + 2],
                sent: 0,
            }
        })
        .collect();
    let stats = run(&p.net, &mut nodes, Halt::AllDone, p.cap, LogMode::Off, "rho_intra_streams")?;
    p.record("rho_intra_streams", &stats);
    for (v, node) in nodes.iter().enumerate() {
        if node.sent != node.depth {
            return Err(SimError::PhaseIncomplete {
                phase: "rho_intra_streams".into(),
                node: v,
                detail: format!("sent {} of {} entries", node.sent, node.depth),
            }
            .into());
        }
        p.know[v].key_total = node.tally[0] + node.agg[1];
    }

    // Suffix the keyed totals over each fragment, then broadcast the
    // fragment aggregates held by the heads.
    let w_intra = intra_subtree_sum(p, "rho_intra_suffix", |v| p.know[v].key_total)?;
    for v in 0..n {
        p.know[v].w_intra = w_intra[v];
    }
    let tokens: Vec<Vec<Message>> = (0..n)
        .map(|v| {
            if p.part[v].is_head {
                vec![Message::new(TAG_RHO_FRAG, &[p.part[v].frag_id, w_intra[v]])]
            } else {
                Vec::new()
            }
        })
        .collect();
    let pairs = p.broadcast_pairs("rho_fragment_broadcast", tokens, p.frag_count())?;
    let ftree = p.ftree.clone();
    for v in 0..n {
        let below_sum: Weight = p.know[v]
            .below
            .iter()
            .map(|&i| {
                let id = ftree.ids[i];
                pairs.iter().find(|(f, _)| *f == id).map(|&(_, w)| w).expect("fragment rho total missing")
            })
            .sum();
        p.know[v].rho_down = p.know[v].w_intra + below_sum;
    }
    Ok(())
}
