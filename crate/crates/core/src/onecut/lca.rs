//! Step 5a: every graph edge resolves the LCA of its endpoints over the
//! edge itself, all edges in parallel.
//!
//! After one round of fragment-ID exchange the edge falls into one of
//! three cases:
//!
//! 1. both endpoints share a fragment — the LCA lies in it, and streaming
//!    the in-fragment ancestor chains (one ID per round) finds the deepest
//!    common entry;
//! 2. different fragments and neither contains the LCA — the LCA is a
//!    merging node, and since the member tree is global knowledge it is
//!    computable locally from the two lowest member ancestors;
//! 3. different fragments and one endpoint has an in-fragment ancestor
//!    whose subtree contains the peer's whole fragment — the lowest such
//!    ancestor is the LCA.

use std::collections::HashMap;
use std::sync::Arc;

use crate::congest::{run, Halt, Inbox, LogMode, Message, NodeProtocol, Outbox, SimError};
use crate::graph::NodeId;

use super::{OnecutError, Pipeline, TprimeView};

const TAG_FRAG: u8 = 19;
const TAG_LIST0: u8 = 20;
const TAG_ENTRY: u8 = 21;
const TAG_CASE: u8 = 22;

/// Which of the three cases resolved an edge, from one endpoint's view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcaCase {
    /// Case 1: endpoints share a fragment.
    SameFragment,
    /// Case 2: the LCA is a merging node outside both fragments.
    OutsideBoth,
    /// Case 3: the LCA is in this endpoint's fragment.
    InMine,
    /// Case 3 resolved by the peer: the LCA is in the peer's fragment.
    InPeers,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PortLca {
    pub lca: NodeId,
    pub case: LcaCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    AwaitFrag,
    Same,
    Diff,
}

struct PortSt {
    peer: NodeId,
    mode: Mode,
    /// Same-fragment: peer's strict-ancestor count and entries so far.
    expected: Option<usize>,
    received: Vec<NodeId>,
    sent_entries: usize,
    list0_sent: bool,
    /// Different fragments: own and peer case claims.
    own_claim: Option<(bool, NodeId)>,
    peer_claim: Option<(bool, NodeId, NodeId)>,
    case_sent: bool,
    out: Option<PortLca>,
}

struct LcaNode {
    id: NodeId,
    frag_id: u64,
    /// Own-fragment chain, self first: `chain[j]` is `j` hops up.
    chain: Vec<NodeId>,
    holder: HashMap<u64, (NodeId, bool)>,
    anchor: NodeId,
    tprime: Arc<TprimeView>,
    ports: Vec<PortSt>,
    failed: Option<String>,
}

impl LcaNode {
    fn resolve_same(&self, st: &PortSt) -> PortLca {
        // Peer chain = peer itself plus its streamed strict ancestors; the
        // deepest common element, scanned from our own end, is the LCA.
        let lca = self
            .chain
            .iter()
            .copied()
            .find(|c| *c == st.peer || st.received.contains(c))
            .expect("ancestor chains in one fragment must meet");
        PortLca { lca, case: LcaCase::SameFragment }
    }

    fn resolve_diff(&mut self, port: usize) {
        let st = &self.ports[port];
        let (own_has, own_z) = st.own_claim.unwrap();
        let (peer_has, peer_z, peer_anchor) = st.peer_claim.unwrap();
        let out = if own_has && peer_has {
            self.failed = Some(format!("edge ({}, {}): both endpoints claim the LCA", self.id, st.peer));
            return;
        } else if own_has {
            PortLca { lca: own_z, case: LcaCase::InMine }
        } else if peer_has {
            PortLca { lca: peer_z, case: LcaCase::InPeers }
        } else {
            PortLca { lca: self.tprime.lca(self.anchor, peer_anchor), case: LcaCase::OutsideBoth }
        };
        self.ports[port].out = Some(out);
    }
}

impl NodeProtocol for LcaNode {
    fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
        if round == 0 {
            for port in 0..self.ports.len() {
                out.send(port, Message::new(TAG_FRAG, &[self.frag_id]));
            }
            return;
        }
        for (port, msg) in inbox.iter() {
            match msg.tag() {
                TAG_FRAG => {
                    let peer_frag = msg.field(0);
                    self.ports[port].mode = if peer_frag == self.frag_id {
                        Mode::Same
                    } else {
                        let claim = match self.holder.get(&peer_frag) {
                            Some(&(z, true)) => (true, z),
                            _ => (false, self.id),
                        };
                        self.ports[port].own_claim = Some(claim);
                        Mode::Diff
                    };
                }
                TAG_LIST0 => {
                    self.ports[port].expected = Some(msg.field(0) as usize);
                    if let Some(&e) = msg.fields().get(1) {
                        self.ports[port].received.push(e as NodeId);
                    }
                }
                TAG_ENTRY => self.ports[port].received.push(msg.field(0) as NodeId),
                TAG_CASE => {
                    self.ports[port].peer_claim =
                        Some((msg.field(0) == 1, msg.field(1) as NodeId, msg.field(2) as NodeId));
                }
                other => panic!("unexpected tag {other}"),
            }
        }
        let depth = self.chain.len() - 1;
        for port in 0..self.ports.len() {
            // Streaming must run to completion even after this side has
            // resolved: the peer still needs the rest of the chain.
            match self.ports[port].mode {
                Mode::AwaitFrag => {}
                Mode::Same => {
                    if !self.ports[port].list0_sent {
                        self.ports[port].list0_sent = true;
                        let mut fields = vec![depth as u64];
                        if depth >= 1 {
                            fields.push(self.chain[1] as u64);
                            self.ports[port].sent_entries = 1;
                        }
                        out.send(port, Message::new(TAG_LIST0, &fields));
                    } else if self.ports[port].sent_entries < depth {
                        self.ports[port].sent_entries += 1;
                        out.send(port, Message::new(TAG_ENTRY, &[self.chain[self.ports[port].sent_entries] as u64]));
                    }
                    if self.ports[port].out.is_none()
                        && self.ports[port].expected == Some(self.ports[port].received.len())
                    {
                        self.ports[port].out = Some(self.resolve_same(&self.ports[port]));
                    }
                }
                Mode::Diff => {
                    if !self.ports[port].case_sent {
                        self.ports[port].case_sent = true;
                        let (has, z) = self.ports[port].own_claim.unwrap();
                        out.send(port, Message::new(TAG_CASE, &[has as u64, z as u64, self.anchor as u64]));
                    }
                    if self.ports[port].out.is_none() && self.ports[port].peer_claim.is_some() {
                        self.resolve_diff(port);
                    }
                }
            }
        }
    }
}

/// Resolves the LCA of every graph edge; per edge at most
/// `2 * max_fragment_size + 2` messages cross in total.
pub(super) fn edge_lca(p: &mut Pipeline) -> Result<(), OnecutError> {
    let n = p.g.n();
    let tprime = p.tprime.clone();
    let mut nodes: Vec<LcaNode> = (0..n)
        .map(|v| {
            let depth = p.part[v].depth_in_frag;
            let chain: Vec<NodeId> = p.know[v].a_list[..=depth].iter().map(|&(a, _)| a).collect();
            LcaNode {
                id: v,
                frag_id: p.part[v].frag_id,
                chain,
                holder: p.know[v].holder.clone(),
                anchor: p.know[v].anchor,
                tprime: tprime.clone(),
                ports: p
                    .net
                    .ports(v)
                    .iter()
                    .map(|port| PortSt {
                        peer: port.neighbor,
                        mode: Mode::AwaitFrag,
                        expected: None,
                        received: Vec::new(),
                        sent_entries: 0,
                        list0_sent: false,
                        own_claim: None,
                        peer_claim: None,
                        case_sent: false,
                        out: None,
                    })
                    .collect(),
                failed: None,
            }
        })
        .collect();
    let window = p.max_frag_height() + 6;
    let log = if p.log_edges { LogMode::PerChannel } else { LogMode::Off };
    let stats = run(&p.net, &mut nodes, Halt::AtRound(window), window + 1, log, "edge_lca")?;
    p.lca_channel_counts = stats.channel_counts.clone();
    p.record("edge_lca", &stats);

    for (v, node) in nodes.into_iter().enumerate() {
        if let Some(detail) = node.failed {
            return Err(SimError::PhaseIncomplete { phase: "edge_lca".into(), node: v, detail }.into());
        }
        let lca: Vec<Option<PortLca>> = node.ports.iter().map(|st| st.out).collect();
        if let Some(bad) = lca.iter().position(Option::is_none) {
            return Err(SimError::PhaseIncomplete {
                phase: "edge_lca".into(),
                node: v,
                detail: format!("port {bad} unresolved"),
            }
            .into());
        }
        p.know[v].lca = lca;
    }
    Ok(())
}
