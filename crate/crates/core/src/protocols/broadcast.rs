//! Pipelined whole-network broadcast: upcast all tokens to the BFS root,
//! then stream them back down in sorted order, one token per edge per
//! round. Every node ends with the same token sequence.

use std::collections::VecDeque;

use crate::congest::{run, Halt, Inbox, LogMode, Message, Network, NodeProtocol, Outbox, RunStats, SimError};

use super::BfsTree;

struct BcastNode {
    parent_port: Option<usize>,
    children_ports: Vec<usize>,
    up_queue: VecDeque<Message>,
    down_queue: VecDeque<Message>,
    collected: Vec<Message>,
    /// Total token count across the network, when known; drives the root's
    /// switch to downcast and the per-node done flag.
    expected: Option<usize>,
    /// In windowed mode the root switches at this round instead.
    up_window: Option<usize>,
    switched: bool,
}

impl BcastNode {
    fn is_root(&self) -> bool {
        self.parent_port.is_none()
    }
}

impl NodeProtocol for BcastNode {
    fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (port, msg) in inbox.iter() {
            if Some(port) == self.parent_port {
                // Downcast traffic: record and forward.
                self.collected.push(*msg);
                self.down_queue.push_back(*msg);
            } else if self.is_root() {
                self.collected.push(*msg);
            } else {
                self.up_queue.push_back(*msg);
            }
        }
        if self.is_root() && !self.switched {
            let ready = match (self.expected, self.up_window) {
                (Some(k), _) => self.collected.len() == k,
                (None, Some(w)) => round >= w,
                (None, None) => unreachable!("broadcast needs a count or a window"),
            };
            if ready {
                self.switched = true;
                self.collected.sort_by_key(|m| (m.tag(), m.fields().to_vec()));
                self.down_queue = self.collected.iter().copied().collect();
            }
        }
        if let Some(pp) = self.parent_port {
            if let Some(msg) = self.up_queue.pop_front() {
                out.send(pp, msg);
            }
        }
        if let Some(msg) = self.down_queue.pop_front() {
            for &cp in &self.children_ports {
                out.send(cp, msg);
            }
        }
    }

    fn is_done(&self) -> bool {
        match self.expected {
            Some(k) => self.collected.len() == k && self.up_queue.is_empty() && self.down_queue.is_empty(),
            None => false,
        }
    }
}

fn make_nodes(bfs: &BfsTree, tokens: Vec<Vec<Message>>, expected: Option<usize>, up_window: Option<usize>) -> Vec<BcastNode> {
    tokens
        .into_iter()
        .enumerate()
        .map(|(v, mut own)| {
            own.sort_by_key(|m| (m.tag(), m.fields().to_vec()));
            let mut node = BcastNode {
                parent_port: bfs.ports.parent_port[v],
                children_ports: bfs.ports.children_ports[v].clone(),
                up_queue: VecDeque::new(),
                down_queue: VecDeque::new(),
                collected: Vec::new(),
                expected,
                up_window,
                switched: false,
            };
            if node.is_root() {
                node.collected = own;
            } else {
                node.up_queue = own.into();
            }
            node
        })
        .collect()
}

fn extract(nodes: Vec<BcastNode>, phase: &str) -> Result<Vec<Message>, SimError> {
    let mut common: Option<Vec<Message>> = None;
    for (v, mut node) in nodes.into_iter().enumerate() {
        if !node.up_queue.is_empty() || !node.down_queue.is_empty() {
            return Err(SimError::PhaseIncomplete {
                phase: phase.into(),
                node: v,
                detail: "undelivered tokens".into(),
            });
        }
        if node.parent_port.is_none() {
            node.collected.sort_by_key(|m| (m.tag(), m.fields().to_vec()));
        }
        match &common {
            None => common = Some(node.collected),
            Some(c) => {
                if *c != node.collected {
                    return Err(SimError::PhaseIncomplete {
                        phase: phase.into(),
                        node: v,
                        detail: "token sequence differs across nodes".into(),
                    });
                }
            }
        }
    }
    Ok(common.unwrap_or_default())
}

/// Broadcasts `total` tokens, initially scattered over the nodes, to the
/// whole network. Terminates by detection; completes in O(D + total)
/// rounds. Returns the common sorted token sequence.
pub fn broadcast_all(
    net: &Network,
    bfs: &BfsTree,
    tokens: Vec<Vec<Message>>,
    total: usize,
) -> Result<(Vec<Message>, RunStats), SimError> {
    debug_assert_eq!(tokens.iter().map(Vec::len).sum::<usize>(), total);
    if total == 0 {
        return Ok((Vec::new(), RunStats::default()));
    }
    let mut nodes = make_nodes(bfs, tokens, Some(total), None);
    let cap = 4 * (net.n() + total) + 16;
    let stats = run(net, &mut nodes, Halt::AllDone, cap, LogMode::Off, "broadcast")?;
    Ok((extract(nodes, "broadcast")?, stats))
}

/// Window-scheduled broadcast for oblivious phase sequencing: the upcast
/// runs for `height + bound + 2` rounds, the downcast for the same, where
/// `bound` is an a-priori limit on the token count. The token count itself
/// need not be known to anyone.
pub fn broadcast_all_windowed(
    net: &Network,
    bfs: &BfsTree,
    tokens: Vec<Vec<Message>>,
    bound: usize,
) -> Result<(Vec<Message>, RunStats), SimError> {
    let total: usize = tokens.iter().map(Vec::len).sum();
    assert!(total <= bound, "token bound {bound} violated ({total} tokens)");
    if total == 0 && bound == 0 {
        return Ok((Vec::new(), RunStats::default()));
    }
    let window = bfs.height + bound + 2;
    let mut nodes = make_nodes(bfs, tokens, None, Some(window));
    let stats = run(net, &mut nodes, Halt::AtRound(2 * window), 2 * window + 1, LogMode::Off, "broadcast")?;
    let seq = extract(nodes, "broadcast")?;
    if seq.len() != total {
        return Err(SimError::PhaseIncomplete {
            phase: "broadcast".into(),
            node: 0,
            detail: format!("window too small: {} of {total} tokens delivered", seq.len()),
        });
    }
    Ok((seq, stats))
}
