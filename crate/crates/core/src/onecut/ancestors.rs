//! Step 2: per-node ancestor knowledge.
//!
//! Three sub-phases, all scoped to a node's own fragment and its parent
//! fragment so that round counts stay O(sqrt(n)) regardless of tree depth:
//!
//! * `subtree_fragments` — pipelined intra-fragment upcast of the child
//!   fragments attached inside each subtree; closing over the fragment
//!   tree locally yields the strictly-below set.
//! * `ancestor_lists` — every node floods its ID one hop per round down
//!   its own fragment and into direct child fragments; arrival order gives
//!   each receiver its ancestor path, deepest first.
//! * `ancestor_holders` — every node announces, for each fragment fully
//!   below it, that it is a holder; announcements stop at a deeper holder,
//!   so each node learns the lowest in-scope ancestor holding each
//!   fragment.

use std::collections::VecDeque;

use crate::congest::{run, Halt, Inbox, LogMode, Message, NodeProtocol, Outbox, SimError};
use crate::graph::NodeId;

use super::{OnecutError, Pipeline};

const TAG_FRAG_UP: u8 = 11;
const TAG_AID: u8 = 12;
const TAG_HOLDER: u8 = 13;

struct FragUpNode {
    intra_parent_port: Option<usize>,
    queue: VecDeque<u64>,
    collected: Vec<u64>,
}

impl NodeProtocol for FragUpNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (_port, msg) in inbox.iter() {
            debug_assert_eq!(msg.tag(), TAG_FRAG_UP);
            self.collected.push(msg.field(0));
            self.queue.push_back(msg.field(0));
        }
        if let Some(pp) = self.intra_parent_port {
            if let Some(id) = self.queue.pop_front() {
                out.send(pp, Message::new(TAG_FRAG_UP, &[id]));
            }
        }
    }
}

/// Every node learns which fragments lie strictly below it.
pub(super) fn subtree_fragments(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();
    let ftree = p.ftree.clone();
    let mut nodes: Vec<FragUpNode> = (0..n)
        .map(|v| {
            // Child fragments attached at v are global knowledge: their
            // upward edge names v as the parent-side endpoint.
            let mut own: Vec<u64> = (0..ftree.ids.len())
                .filter(|&i| ftree.attach_node[i] == Some(v))
                .map(|i| ftree.ids[i])
                .collect();
            own.sort_unstable();
            FragUpNode {
                intra_parent_port: p.part[v].intra_parent_port,
                queue: own.iter().copied().collect(),
                collected: own,
            }
        })
        .collect();
    let window = p.max_frag_height() + p.frag_count() + 8;
    let stats = run(&p.net, &mut nodes, Halt::AtRound(window), window + 1, LogMode::Off, "subtree_fragments")?;
    p.record("subtree_fragments", &stats);

    for (v, node) in nodes.into_iter().enumerate() {
        if !node.queue.is_empty() {
            return Err(SimError::PhaseIncomplete {
                phase: "subtree_fragments".into(),
                node: v,
                detail: format!("{} fragment ids still queued", node.queue.len()),
            }
            .into());
        }
        // Close under fragment-tree descendants: everything below a child
        // fragment attached in v's subtree is below v as well.
        let mut below = Vec::new();
        for id in node.collected {
            below.extend(ftree.subtree(ftree.index_of(id)));
        }
        below.sort_unstable();
        below.dedup();
        p.know[v].below = below;
    }
    Ok(())
}

struct AListNode {
    id: NodeId,
    frag_id: u64,
    tree_children_ports: Vec<usize>,
    intra_children_ports: Vec<usize>,
    a_list: Vec<(NodeId, u64)>,
}

impl NodeProtocol for AListNode {
    fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
        if round == 0 {
            for &cp in &self.tree_children_ports {
                out.send(cp, Message::new(TAG_AID, &[self.id as u64, self.frag_id]));
            }
        }
        // At most one message arrives per round (only the parent sends on
        // this scope), so forwarding needs no queue and arrival order is
        // exactly by distance.
        for (_port, msg) in inbox.iter() {
            let (anc, anc_frag) = (msg.field(0) as NodeId, msg.field(1));
            self.a_list.push((anc, anc_frag));
            let targets: &[usize] =
                if anc_frag == self.frag_id { &self.tree_children_ports } else { &self.intra_children_ports };
            for &cp in targets {
                out.send(cp, Message::new(TAG_AID, &[anc as u64, anc_frag]));
            }
        }
    }
}

/// Every node learns its ancestors in its own and parent fragments,
/// ordered deepest first with itself at index 0.
pub(super) fn ancestor_lists(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();
    let mut nodes: Vec<AListNode> = (0..n)
        .map(|v| {
            let mut tree_children: Vec<usize> = p.part[v].intra_children_ports.clone();
            tree_children.extend_from_slice(&p.part[v].inter_children_ports);
            AListNode {
                id: v,
                frag_id: p.part[v].frag_id,
                tree_children_ports: tree_children,
                intra_children_ports: p.part[v].intra_children_ports.clone(),
                a_list: vec![(v, p.part[v].frag_id)],
            }
        })
        .collect();
    let window = 2 * p.max_frag_height() + 8;
    let stats = run(&p.net, &mut nodes, Halt::AtRound(window), window + 1, LogMode::Off, "ancestor_lists")?;
    p.record("ancestor_lists", &stats);

    for (v, node) in nodes.into_iter().enumerate() {
        debug_assert!(node.a_list.len() <= 2 * (p.max_frag_height() + 1));
        p.know[v].a_list = node.a_list;
    }
    Ok(())
}

struct HolderNode {
    frag_id: u64,
    below_ids: Vec<u64>,
    tree_children_ports: Vec<usize>,
    intra_children_ports: Vec<usize>,
    /// Ancestor -> fragment lookup from the previous phase.
    anc_frag: std::collections::HashMap<NodeId, u64>,
    /// One outgoing FIFO per tree child port.
    queues: Vec<VecDeque<(NodeId, u64)>>,
    holder: std::collections::HashMap<u64, (NodeId, bool)>,
}

impl NodeProtocol for HolderNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (_port, msg) in inbox.iter() {
            debug_assert_eq!(msg.tag(), TAG_HOLDER);
            let (anc, frag) = (msg.field(0) as NodeId, msg.field(1));
            // A deeper holder exists here: the announcement dies.
            if frag == self.frag_id || self.below_ids.binary_search(&frag).is_ok() {
                continue;
            }
            let anc_frag = *self.anc_frag.get(&anc).expect("holder is not an in-scope ancestor");
            let prev = self.holder.insert(frag, (anc, anc_frag == self.frag_id));
            debug_assert!(prev.is_none(), "two surviving holders for one fragment");
            let same_scope = anc_frag == self.frag_id;
            for (i, &cp) in self.tree_children_ports.iter().enumerate() {
                if same_scope || self.intra_children_ports.contains(&cp) {
                    self.queues[i].push_back((anc, frag));
                }
                let _ = cp;
            }
        }
        for (i, &cp) in self.tree_children_ports.iter().enumerate() {
            if let Some((anc, frag)) = self.queues[i].pop_front() {
                out.send(cp, Message::new(TAG_HOLDER, &[anc as u64, frag]));
            }
        }
    }
}

/// Every node learns, per fragment, the lowest in-scope ancestor whose
/// subtree contains that whole fragment. Self-holdings are seeded locally.
pub(super) fn ancestor_holders(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();
    let ftree = p.ftree.clone();
    let mut nodes: Vec<HolderNode> = (0..n)
        .map(|v| {
            let below_ids: Vec<u64> = p.know[v].below.iter().map(|&i| ftree.ids[i]).collect();
            let mut tree_children: Vec<usize> = p.part[v].intra_children_ports.clone();
            tree_children.extend_from_slice(&p.part[v].inter_children_ports);
            let queues = tree_children
                .iter()
                .map(|_| below_ids.iter().map(|&f| (v, f)).collect::<VecDeque<_>>())
                .collect();
            HolderNode {
                frag_id: p.part[v].frag_id,
                below_ids,
                tree_children_ports: tree_children,
                intra_children_ports: p.part[v].intra_children_ports.clone(),
                anc_frag: p.know[v].a_list.iter().copied().collect(),
                queues,
                holder: Default::default(),
            }
        })
        .collect();
    let window = 2 * p.max_frag_height() + p.frag_count() + 8;
    let stats = run(&p.net, &mut nodes, Halt::AtRound(window), window + 1, LogMode::Off, "ancestor_holders")?;
    p.record("ancestor_holders", &stats);

    for (v, node) in nodes.into_iter().enumerate() {
        if node.queues.iter().any(|q| !q.is_empty()) {
            return Err(SimError::PhaseIncomplete {
                phase: "ancestor_holders".into(),
                node: v,
                detail: "holder announcements still queued".into(),
            }
            .into());
        }
        let mut holder = node.holder;
        for &f in &node.below_ids {
            holder.insert(f, (v, true));
        }
        p.know[v].holder = holder;
    }
    Ok(())
}
