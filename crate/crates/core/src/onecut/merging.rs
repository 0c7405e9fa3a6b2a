//! Step 4: merging nodes and the tree over fragment roots and merging
//! nodes.
//!
//! A node is merging when at least two of its tree children have whole
//! fragments inside their subtrees — one round of child bits decides it.
//! Merging IDs are broadcast; every member of the combined set then knows
//! its parent in the member tree locally (it is one of its in-scope
//! ancestors) and broadcasts that edge.

use crate::congest::{run, Halt, Inbox, LogMode, Message, NodeProtocol, Outbox, SimError};
use crate::graph::NodeId;

use super::{OnecutError, Pipeline, TprimeView};

const TAG_HAS_FRAG: u8 = 16;
const TAG_MERGING_ID: u8 = 17;
const TAG_TPRIME_EDGE: u8 = 18;

struct MergeBitNode {
    tree_parent_port: Option<usize>,
    has_whole_fragment: bool,
    true_bits: usize,
}

impl NodeProtocol for MergeBitNode {
    fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
        if round == 0 {
            if let Some(pp) = self.tree_parent_port {
                out.send(pp, Message::new(TAG_HAS_FRAG, &[self.has_whole_fragment as u64]));
            }
        }
        for (_port, msg) in inbox.iter() {
            self.true_bits += msg.field(0) as usize;
        }
    }
}

/// Detects merging nodes and makes the full list global knowledge.
pub(super) fn merging_nodes(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();
    let mut nodes: Vec<MergeBitNode> = (0..n)
        .map(|v| MergeBitNode {
            tree_parent_port: p.t.parent(v).map(|q| p.net.port_to(v, q).unwrap()),
            has_whole_fragment: !p.know[v].below.is_empty() || p.part[v].is_head,
            true_bits: 0,
        })
        .collect();
    let stats = run(&p.net, &mut nodes, Halt::AtRound(2), 3, LogMode::Off, "merging_detect")?;
    p.record("merging_detect", &stats);

    let mut tokens: Vec<Vec<Message>> = vec![Vec::new(); n];
    for (v, node) in nodes.iter().enumerate() {
        if node.true_bits >= 2 {
            p.know[v].is_merging = true;
            tokens[v].push(Message::new(TAG_MERGING_ID, &[v as u64, 0]));
        }
    }
    let bound = p.frag_count().saturating_sub(1);
    let emitted: usize = tokens.iter().map(Vec::len).sum();
    if emitted > bound {
        return Err(OnecutError::Invariant(format!("{emitted} merging nodes with only {} fragments", p.frag_count())));
    }
    let pairs = p.broadcast_pairs("merging_broadcast", tokens, bound)?;
    p.merging = pairs.iter().map(|(id, _)| *id as NodeId).collect();
    p.merging.sort_unstable();
    Ok(())
}

/// Builds the member tree (fragment roots plus merging nodes) and each
/// node's lowest member ancestor.
pub(super) fn tprime(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();
    let mut members: Vec<NodeId> = p.ftree.root_node.clone();
    members.extend_from_slice(&p.merging);
    members.sort_unstable();
    members.dedup();
    let is_member = |v: NodeId| members.binary_search(&v).is_ok();

    // The parent of a member is its lowest strict ancestor in the member
    // set, always within the in-scope ancestor list; the tree root is the
    // unique member without one. Nothing to communicate but the edges.
    let mut tokens: Vec<Vec<Message>> = vec![Vec::new(); n];
    for &v in &members {
        if v == p.t.root() {
            continue;
        }
        let parent = p.know[v].a_list[1..]
            .iter()
            .map(|&(anc, _)| anc)
            .find(|&anc| is_member(anc))
            .ok_or_else(|| SimError::PhaseIncomplete {
                phase: "tprime".into(),
                node: v,
                detail: "no member ancestor in scope".into(),
            })?;
        tokens[v].push(Message::new(TAG_TPRIME_EDGE, &[v as u64, parent as u64]));
    }
    let pairs = p.broadcast_pairs("tprime_broadcast", tokens, members.len().saturating_sub(1))?;

    let mut parent = vec![None; members.len()];
    for &(child, par) in &pairs {
        let ci = members.binary_search(&(child as NodeId)).unwrap();
        let pi = members.binary_search(&(par as NodeId)).unwrap();
        parent[ci] = Some(pi);
    }
    // Depths by repeated relaxation; member count is O(sqrt(n)).
    let mut depth = vec![usize::MAX; members.len()];
    for i in 0..members.len() {
        if parent[i].is_none() {
            depth[i] = 0;
        }
    }
    for _ in 0..members.len() {
        for i in 0..members.len() {
            if let Some(pi) = parent[i] {
                if depth[pi] != usize::MAX {
                    depth[i] = depth[pi] + 1;
                }
            }
        }
    }
    if depth.iter().any(|&d| d == usize::MAX) {
        return Err(OnecutError::Invariant("member tree is not connected".into()));
    }
    let view = TprimeView { members, parent, depth };
    for v in 0..n {
        p.know[v].anchor = p.know[v]
            .a_list
            .iter()
            .map(|&(anc, _)| anc)
            .find(|&anc| view.is_member(anc))
            .ok_or_else(|| OnecutError::Invariant(format!("node {v} has no member ancestor")))?;
    }
    p.tprime = std::sync::Arc::new(view);
    Ok(())
}
