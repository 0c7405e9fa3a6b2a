//! Deterministic synchronous round simulator with CONGEST bandwidth limits.
//!
//! Every node may place at most one message per incident edge per round, and
//! a message carries a small tag plus at most [`MAX_FIELDS`] integer fields
//! (IDs need O(log n) bits, weights one machine word). Messages sent in
//! round `t` are delivered at the start of round `t + 1`. Execution is
//! bit-for-bit deterministic for fixed inputs: nodes are stepped in ID
//! order, see only their own state and inbox, and any randomness must come
//! from per-node seeds supplied at construction.

use serde::Serialize;

use crate::graph::{Graph, NodeId, Weight};

/// Bandwidth limit: fields per message.
pub const MAX_FIELDS: usize = 4;
/// Tags form a small enumeration.
pub const MAX_TAG: u8 = 32;

const FIELD_CAP: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SimError {
    #[error("round cap {cap} exceeded in phase {phase:?}")]
    RoundCapExceeded { cap: usize, phase: String },
    #[error("node {node} sent a {fields}-field message (limit {MAX_FIELDS}) in round {round}")]
    OversizedMessage { node: NodeId, fields: usize, round: usize },
    #[error("node {node} used tag {tag} (limit {MAX_TAG}) in round {round}")]
    BadTag { node: NodeId, tag: u8, round: usize },
    #[error("node {node} sent on invalid port {port} in round {round}")]
    BadPort { node: NodeId, port: usize, round: usize },
    #[error("node {node} sent twice on port {port} in round {round}")]
    DuplicateSend { node: NodeId, port: usize, round: usize },
    #[error("phase {phase:?} incomplete at node {node}: {detail}")]
    PhaseIncomplete { phase: String, node: NodeId, detail: String },
}

/// A single bounded-size message. Construction accepts up to 8 fields so
/// that oversized messages exist as values; the simulator rejects anything
/// beyond [`MAX_FIELDS`] at send time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    tag: u8,
    len: u8,
    buf: [u64; FIELD_CAP],
}

impl Message {
    pub fn new(tag: u8, fields: &[u64]) -> Self {
        assert!(fields.len() <= FIELD_CAP, "message construction limit is {FIELD_CAP} fields");
        let mut buf = [0u64; FIELD_CAP];
        buf[..fields.len()].copy_from_slice(fields);
        Message { tag, len: fields.len() as u8, buf }
    }

    pub fn tag(&self) -> u8 {
        self.tag
    }

    pub fn fields(&self) -> &[u64] {
        &self.buf[..self.len as usize]
    }

    pub fn field(&self, i: usize) -> u64 {
        self.fields()[i]
    }
}

/// One endpoint slot of an edge, as seen from a node. Ports are numbered
/// `0..degree(v)` in ascending neighbor order.
#[derive(Debug, Clone, Copy)]
pub struct Port {
    pub neighbor: NodeId,
    pub weight: Weight,
    /// Index of the outgoing directed edge in the simulator's channel
    /// array; doubles as this node's inbox slot for the port.
    channel: usize,
}

/// Static communication structure derived from a [`Graph`].
#[derive(Debug, Clone)]
pub struct Network {
    ports: Vec<Vec<Port>>,
    channels: usize,
    /// For every channel, the (node, port) that receives from it.
    sink: Vec<(NodeId, usize)>,
}

impl Network {
    pub fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut ports: Vec<Vec<Port>> = vec![Vec::new(); n];
        let mut channels = 0;
        // Adjacency is sorted by neighbor, so port order is deterministic.
        for v in 0..n {
            for inc in g.adjacency(v) {
                ports[v].push(Port { neighbor: inc.to, weight: inc.w, channel: channels });
                channels += 1;
            }
        }
        let mut sink = vec![(0, 0); channels];
        for v in 0..n {
            for p in 0..ports[v].len() {
                let u = ports[v][p].neighbor;
                let back = ports[u].iter().position(|q| q.neighbor == v).unwrap();
                sink[ports[v][p].channel] = (u, back);
            }
        }
        Network { ports, channels, sink }
    }

    pub fn n(&self) -> usize {
        self.ports.len()
    }

    pub fn ports(&self, v: NodeId) -> &[Port] {
        &self.ports[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.ports[v].len()
    }

    /// Port of `v` whose neighbor is `u`, if the edge exists.
    pub fn port_to(&self, v: NodeId, u: NodeId) -> Option<usize> {
        self.ports[v].binary_search_by_key(&u, |p| p.neighbor).ok()
    }

    /// Directed-channel index of `v`'s outgoing port, for reading
    /// per-channel logs.
    pub fn channel_of(&self, v: NodeId, port: usize) -> usize {
        self.ports[v][port].channel
    }
}

/// Messages received this round, one optional slot per port.
pub struct Inbox<'a> {
    slots: &'a [Option<Message>],
}

impl<'a> Inbox<'a> {
    pub fn get(&self, port: usize) -> Option<&Message> {
        self.slots.get(port).and_then(|m| m.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Message)> {
        self.slots.iter().enumerate().filter_map(|(p, m)| m.as_ref().map(|m| (p, m)))
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(|m| m.is_none())
    }
}

/// Outgoing messages staged by a node during one step.
pub struct Outbox {
    sends: Vec<(usize, Message)>,
}

impl Outbox {
    pub fn send(&mut self, port: usize, msg: Message) {
        self.sends.push((port, msg));
    }
}

/// Behavioral interface for one node. The simulator guarantees the step
/// function sees nothing but the round number and its own inbox.
pub trait NodeProtocol {
    fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox);

    /// Signals local completion; used by [`Halt::AllDone`].
    fn is_done(&self) -> bool {
        false
    }
}

/// Global termination rule. `AllDone` additionally requires that no message
/// is still in flight, so a quiescent network never drops deliveries.
#[derive(Debug, Clone, Copy)]
pub enum Halt {
    AllDone,
    AtRound(usize),
}

/// Per-run accounting.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub rounds: usize,
    pub messages_sent: u64,
    pub max_fields_per_message: u32,
    /// Messages per directed channel over the whole run, when logging is on.
    pub channel_counts: Option<Vec<u64>>,
    /// Count of rounds in which more than one message crossed a directed
    /// edge. Structurally zero; tracked so tests can assert it.
    pub congestion_violations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogMode {
    Off,
    PerChannel,
}

/// Runs the synchronous round loop over `nodes` (one handler per node, in
/// node-ID order) until `halt` fires. Handlers remain owned by the caller
/// and carry the per-node outputs in their final state.
pub fn run<P: NodeProtocol>(
    net: &Network,
    nodes: &mut [P],
    halt: Halt,
    round_cap: usize,
    log: LogMode,
    phase: &str,
) -> Result<RunStats, SimError> {
    run_with_order(net, nodes, halt, round_cap, log, phase, false)
}

/// Same as [`run`], but optionally steps nodes in reverse ID order. Outputs
/// must not depend on the choice; the isolation tests exercise this.
pub fn run_with_order<P: NodeProtocol>(
    net: &Network,
    nodes: &mut [P],
    halt: Halt,
    round_cap: usize,
    log: LogMode,
    phase: &str,
    reverse_order: bool,
) -> Result<RunStats, SimError> {
    assert_eq!(nodes.len(), net.n(), "one handler per node");
    let n = net.n();
    let mut in_flight: Vec<Option<Message>> = vec![None; net.channels];
    let mut inboxes: Vec<Option<Message>> = vec![None; net.channels];
    let mut stats = RunStats::default();
    let mut channel_counts = match log {
        LogMode::PerChannel => Some(vec![0u64; net.channels]),
        LogMode::Off => None,
    };
    let mut round_seen: Vec<usize> = vec![usize::MAX; net.channels];

    let mut round = 0;
    loop {
        if let Halt::AtRound(r) = halt {
            if round >= r {
                break;
            }
        }
        if round >= round_cap {
            return Err(SimError::RoundCapExceeded { cap: round_cap, phase: phase.to_string() });
        }

        // Deliver everything sent last round.
        for ch in 0..net.channels {
            let (v, port) = net.sink[ch];
            inboxes[net.ports[v][port].channel] = None;
            if let Some(msg) = in_flight[ch].take() {
                // The receiving slot is indexed by the receiver's own port.
                let slot = net.ports[v][port].channel;
                inboxes[slot] = Some(msg);
            }
        }
        let mut pending = 0usize;

        let order: Box<dyn Iterator<Item = NodeId>> =
            if reverse_order { Box::new((0..n).rev()) } else { Box::new(0..n) };
        for v in order {
            let base = if net.ports[v].is_empty() { 0 } else { net.ports[v][0].channel };
            let slots = &inboxes[base..base + net.ports[v].len()];
            let inbox = Inbox { slots };
            let mut out = Outbox { sends: Vec::new() };
            nodes[v].on_round(round, &inbox, &mut out);
            for (port, msg) in out.sends {
                if port >= net.ports[v].len() {
                    return Err(SimError::BadPort { node: v, port, round });
                }
                if msg.tag >= MAX_TAG {
                    return Err(SimError::BadTag { node: v, tag: msg.tag, round });
                }
                if msg.fields().len() > MAX_FIELDS {
                    return Err(SimError::OversizedMessage { node: v, fields: msg.fields().len(), round });
                }
                let ch = net.ports[v][port].channel;
                if in_flight[ch].is_some() {
                    return Err(SimError::DuplicateSend { node: v, port, round });
                }
                if round_seen[ch] == round {
                    stats.congestion_violations += 1;
                }
                round_seen[ch] = round;
                in_flight[ch] = Some(msg);
                pending += 1;
                stats.messages_sent += 1;
                stats.max_fields_per_message = stats.max_fields_per_message.max(msg.fields().len() as u32);
                if let Some(counts) = channel_counts.as_mut() {
                    counts[ch] += 1;
                }
            }
        }

        round += 1;
        if matches!(halt, Halt::AllDone) && pending == 0 && nodes.iter().all(|h| h.is_done()) {
            break;
        }
    }

    stats.rounds = round;
    stats.channel_counts = channel_counts;
    Ok(stats)
}

/// Round and message accounting across a multi-phase execution.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Metrics {
    pub rounds: usize,
    pub messages_sent: u64,
    pub max_fields_per_message: u32,
    pub phases: Vec<PhaseStat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseStat {
    pub name: String,
    pub rounds: usize,
    pub messages: u64,
}

impl Metrics {
    pub fn record(&mut self, name: &str, stats: &RunStats) {
        self.rounds += stats.rounds;
        self.messages_sent += stats.messages_sent;
        self.max_fields_per_message = self.max_fields_per_message.max(stats.max_fields_per_message);
        self.phases.push(PhaseStat { name: name.to_string(), rounds: stats.rounds, messages: stats.messages_sent });
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn path(n: usize) -> Graph {
        Graph::from_edges((1..n).map(|v| (v - 1, v, 1))).unwrap()
    }

    /// Sends its own ID on every port in round 0, done after hearing all
    /// neighbors.
    struct ExchangeIds {
        id: NodeId,
        degree: usize,
        heard: usize,
    }

    impl NodeProtocol for ExchangeIds {
        fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
            if round == 0 {
                for port in 0..self.degree {
                    out.send(port, Message::new(0, &[self.id as u64]));
                }
            }
            self.heard += inbox.iter().count();
        }

        fn is_done(&self) -> bool {
            self.heard == self.degree
        }
    }

    #[test]
    fn two_node_exchange() {
        let g = path(2);
        let net = Network::new(&g);
        let mut nodes: Vec<_> =
            (0..2).map(|id| ExchangeIds { id, degree: net.degree(id), heard: 0 }).collect();
        let stats = run(&net, &mut nodes, Halt::AllDone, 100, LogMode::Off, "exchange").unwrap();
        assert_eq!(stats.rounds, 2);
        assert_eq!(stats.messages_sent, 2);
    }

    /// Forwards a token from node 0 toward higher IDs along a path.
    struct FloodRight {
        id: NodeId,
        n: usize,
        got: bool,
    }

    impl NodeProtocol for FloodRight {
        fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
            let right_port = if self.id == 0 { 0 } else { 1 };
            if self.id == 0 && round == 0 {
                self.got = true;
                out.send(right_port, Message::new(1, &[7]));
            } else if !self.got && !inbox.is_empty() {
                self.got = true;
                if self.id + 1 < self.n {
                    out.send(right_port, Message::new(1, &[7]));
                }
            }
        }

        fn is_done(&self) -> bool {
            self.got
        }
    }

    #[test]
    fn token_flood_on_path() {
        let g = path(5);
        let net = Network::new(&g);
        let mut nodes: Vec<_> = (0..5).map(|id| FloodRight { id, n: 5, got: false }).collect();
        let stats = run(&net, &mut nodes, Halt::AllDone, 100, LogMode::PerChannel, "flood").unwrap();
        assert_eq!(stats.rounds, 5);
        assert_eq!(stats.messages_sent, 4);
        assert_eq!(stats.congestion_violations, 0);
        assert!(stats.channel_counts.unwrap().iter().all(|&c| c <= 1));
    }

    struct Oversize;
    impl NodeProtocol for Oversize {
        fn on_round(&mut self, round: usize, _inbox: &Inbox, out: &mut Outbox) {
            if round == 0 {
                out.send(0, Message::new(0, &[1, 2, 3, 4, 5]));
            }
        }
    }

    #[test]
    fn oversized_message_rejected_at_send() {
        let g = path(2);
        let net = Network::new(&g);
        let mut nodes = vec![Oversize, Oversize];
        let err = run(&net, &mut nodes, Halt::AtRound(2), 10, LogMode::Off, "oversize").unwrap_err();
        assert_eq!(err, SimError::OversizedMessage { node: 0, fields: 5, round: 0 });
    }

    struct BadPortSend;
    impl NodeProtocol for BadPortSend {
        fn on_round(&mut self, _round: usize, _inbox: &Inbox, out: &mut Outbox) {
            out.send(9, Message::new(0, &[]));
        }
    }

    #[test]
    fn non_incident_send_rejected() {
        let g = path(2);
        let net = Network::new(&g);
        let mut nodes = vec![BadPortSend, BadPortSend];
        let err = run(&net, &mut nodes, Halt::AtRound(1), 10, LogMode::Off, "badport").unwrap_err();
        assert_eq!(err, SimError::BadPort { node: 0, port: 9, round: 0 });
    }

    #[test]
    fn round_cap_reports_phase() {
        struct Never;
        impl NodeProtocol for Never {
            fn on_round(&mut self, _r: usize, _i: &Inbox, _o: &mut Outbox) {}
        }
        let g = path(3);
        let net = Network::new(&g);
        let mut nodes = vec![Never, Never, Never];
        let err = run(&net, &mut nodes, Halt::AllDone, 4, LogMode::Off, "livelock").unwrap_err();
        assert_eq!(err, SimError::RoundCapExceeded { cap: 4, phase: "livelock".into() });
    }

    #[test]
    fn determinism_and_isolation() {
        let g = path(6);
        let net = Network::new(&g);
        let mk = || -> Vec<ExchangeIds> {
            (0..6).map(|id| ExchangeIds { id, degree: net.degree(id), heard: 0 }).collect()
        };
        let mut a = mk();
        let mut b = mk();
        let s1 = run(&net, &mut a, Halt::AllDone, 100, LogMode::Off, "p").unwrap();
        let s2 =
            run_with_order(&net, &mut b, Halt::AllDone, 100, LogMode::Off, "p", true).unwrap();
        assert_eq!(s1.rounds, s2.rounds);
        assert_eq!(s1.messages_sent, s2.messages_sent);
        assert!(a.iter().zip(&b).all(|(x, y)| x.heard == y.heard));
    }

    #[test]
    fn metrics_json_shape() {
        let mut m = Metrics::default();
        m.record("a", &RunStats { rounds: 3, messages_sent: 7, max_fields_per_message: 2, ..Default::default() });
        let v = m.to_json();
        assert_eq!(v["rounds"], 3);
        assert_eq!(v["messages_sent"], 7);
        assert_eq!(v["phases"][0]["name"], "a");
        assert_eq!(v["phases"][0]["rounds"], 3);
    }
}
