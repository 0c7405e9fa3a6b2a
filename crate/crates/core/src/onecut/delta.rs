//! Step 3: subtree degree sums.
//!
//! `delta_down(v)` splits into the intra-fragment part (a one-value upcast
//! inside each fragment, with every node keeping its own subtree total)
//! and the totals of fragments fully below `v` (fragment heads broadcast
//! their totals, which the heads obtain for free as their own intra sum).

use crate::congest::{run, Halt, Inbox, LogMode, Message, NodeProtocol, Outbox, SimError};
use crate::graph::Weight;

use super::{OnecutError, Pipeline};

const TAG_INTRA_SUM: u8 = 14;
const TAG_FRAG_TOTAL: u8 = 15;

/// Single-value bottom-up sum inside a fragment; every node ends with the
/// total over its own intra-fragment subtree. Reused by the rho phase.
pub(super) struct IntraSumNode {
    pub intra_parent_port: Option<usize>,
    pub intra_children_ports: Vec<usize>,
    pub waiting: usize,
    pub value: Weight,
    pub sent: bool,
}

impl IntraSumNode {
    pub fn build(p: &Pipeline, values: impl Fn(usize) -> Weight) -> Vec<IntraSumNode> {
        (0..p.g.n())
            .map(|v| IntraSumNode {
                intra_parent_port: p.part[v].intra_parent_port,
                intra_children_ports: p.part[v].intra_children_ports.clone(),
                waiting: p.part[v].intra_children_ports.len(),
                value: values(v),
                sent: false,
            })
            .collect()
    }
}

impl NodeProtocol for IntraSumNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (port, msg) in inbox.iter() {
            debug_assert!(self.intra_children_ports.contains(&port));
            debug_assert_eq!(msg.tag(), TAG_INTRA_SUM);
            self.value += msg.field(0);
            self.waiting -= 1;
        }
        if self.waiting == 0 && !self.sent {
            self.sent = true;
            if let Some(pp) = self.intra_parent_port {
                out.send(pp, Message::new(TAG_INTRA_SUM, &[self.value]));
            }
        }
    }

    fn is_done(&self) -> bool {
        self.sent
    }
}

/// Runs one intra-fragment subtree sum and returns the per-node totals.
pub(super) fn intra_subtree_sum(
    p: &mut Pipeline,
    phase: &str,
    values: impl Fn(usize) -> Weight,
) -> Result<Vec<Weight>, OnecutError> {
    let mut nodes = IntraSumNode::build(p, values);
    let stats = run(&p.net, &mut nodes, Halt::AllDone, p.cap, LogMode::Off, phase)?;
    p.record(phase, &stats);
    for (v, node) in nodes.iter().enumerate() {
        if node.waiting != 0 {
            return Err(SimError::PhaseIncomplete {
                phase: phase.into(),
                node: v,
                detail: format!("{} children never reported", node.waiting),
            }
            .into());
        }
    }
    Ok(nodes.into_iter().map(|n| n.value).collect())
}

/// Computes `delta_down` at every node.
pub(super) fn delta_down(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();
    let intra = intra_subtree_sum(p, "delta_intra", |v| p.g.weighted_degree(v))?;
    for v in 0..n {
        p.know[v].delta_intra = intra[v];
    }

    // Heads now hold their fragment's degree total; broadcast all of them.
    let tokens: Vec<Vec<Message>> = (0..n)
        .map(|v| {
            if p.part[v].is_head {
                vec![Message::new(TAG_FRAG_TOTAL, &[p.part[v].frag_id, intra[v]])]
            } else {
                Vec::new()
            }
        })
        .collect();
    let pairs = p.broadcast_pairs("delta_broadcast", tokens, p.frag_count())?;
    let ftree = p.ftree.clone();
    let total_of = |idx: usize| -> Weight {
        let id = ftree.ids[idx];
        pairs.iter().find(|(f, _)| *f == id).map(|(_, w)| *w).expect("fragment total missing")
    };
    for v in 0..n {
        let below_sum: Weight = p.know[v].below.iter().map(|&i| total_of(i)).sum();
        p.know[v].delta_down = p.know[v].delta_intra + below_sum;
    }
    Ok(())
}
