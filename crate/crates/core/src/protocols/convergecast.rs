//! Pipelined aggregation along a tree: keyed sums toward the root, and a
//! global minimum with re-broadcast.

use crate::congest::{run, Halt, Inbox, LogMode, Message, Network, NodeProtocol, Outbox, RunStats, SimError};
use crate::graph::NodeId;

use super::TreePorts;

const TAG_SUM: u8 = 2;
const TAG_MIN_UP: u8 = 3;
const TAG_MIN_DOWN: u8 = 4;

/// Streams one `(key, partial sum)` pair per tree edge per round, keys in
/// ascending order. A node emits key `j` once every child has delivered its
/// key-`j` total, so the streams stay dense and aligned.
struct SumNode {
    parent_port: Option<usize>,
    children_ports: Vec<usize>,
    acc: Vec<u64>,
    next_recv: Vec<usize>,
    next_send: usize,
    keys: usize,
}

impl NodeProtocol for SumNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (port, msg) in inbox.iter() {
            let child = self.children_ports.iter().position(|&cp| cp == port).expect("sum from non-child");
            let key = msg.field(0) as usize;
            debug_assert_eq!(key, self.next_recv[child], "keyed stream out of order");
            self.acc[key] += msg.field(1);
            self.next_recv[child] = key + 1;
        }
        if let Some(pp) = self.parent_port {
            if self.next_send < self.keys && self.next_recv.iter().all(|&r| r > self.next_send) {
                out.send(pp, Message::new(TAG_SUM, &[self.next_send as u64, self.acc[self.next_send]]));
                self.next_send += 1;
            }
        }
    }

    fn is_done(&self) -> bool {
        if self.parent_port.is_some() {
            self.next_send == self.keys
        } else {
            self.next_recv.iter().all(|&r| r == self.keys)
        }
    }
}

/// Sums per-key contributions toward the tree root. Returns the root's
/// per-key totals; O(height + keys) rounds.
pub fn convergecast_sum(
    net: &Network,
    tree: &TreePorts,
    root: NodeId,
    contributions: Vec<Vec<u64>>,
    keys: usize,
) -> Result<(Vec<u64>, RunStats), SimError> {
    if keys == 0 {
        return Ok((Vec::new(), RunStats::default()));
    }
    let mut nodes: Vec<SumNode> = contributions
        .into_iter()
        .enumerate()
        .map(|(v, mut acc)| {
            acc.resize(keys, 0);
            SumNode {
                parent_port: tree.parent_port[v],
                children_ports: tree.children_ports[v].clone(),
                next_recv: vec![0; tree.children_ports[v].len()],
                next_send: 0,
                acc,
                keys,
            }
        })
        .collect();
    let cap = 4 * (net.n() + keys) + 16;
    let stats = run(net, &mut nodes, Halt::AllDone, cap, LogMode::Off, "convergecast_sum")?;
    Ok((std::mem::take(&mut nodes[root].acc), stats))
}

struct MinNode {
    parent_port: Option<usize>,
    children_ports: Vec<usize>,
    best: (u64, u64),
    waiting: usize,
    sent_up: bool,
    result: Option<(u64, u64)>,
    forwarded: bool,
}

impl NodeProtocol for MinNode {
    fn on_round(&mut self, _round: usize, inbox: &Inbox, out: &mut Outbox) {
        for (port, msg) in inbox.iter() {
            match msg.tag() {
                TAG_MIN_UP => {
                    debug_assert!(self.children_ports.contains(&port));
                    self.best = self.best.min((msg.field(0), msg.field(1)));
                    self.waiting -= 1;
                }
                TAG_MIN_DOWN => {
                    self.result = Some((msg.field(0), msg.field(1)));
                }
                other => panic!("unexpected tag {other}"),
            }
        }
        if self.waiting == 0 && !self.sent_up {
            self.sent_up = true;
            match self.parent_port {
                Some(pp) => out.send(pp, Message::new(TAG_MIN_UP, &[self.best.0, self.best.1])),
                None => self.result = Some(self.best),
            }
        }
        if let Some((value, witness)) = self.result {
            if !self.forwarded {
                self.forwarded = true;
                for &cp in &self.children_ports {
                    out.send(cp, Message::new(TAG_MIN_DOWN, &[value, witness]));
                }
            }
        }
    }

    fn is_done(&self) -> bool {
        self.result.is_some()
    }
}

/// Minimum of per-node `(value, witness)` pairs with smallest-witness
/// tie-break; the result is downcast so every node learns it.
pub fn convergecast_min(
    net: &Network,
    tree: &TreePorts,
    values: Vec<(u64, u64)>,
) -> Result<((u64, u64), RunStats), SimError> {
    let mut nodes: Vec<MinNode> = values
        .into_iter()
        .enumerate()
        .map(|(v, best)| MinNode {
            parent_port: tree.parent_port[v],
            children_ports: tree.children_ports[v].clone(),
            best,
            waiting: tree.children_ports[v].len(),
            sent_up: false,
            result: None,
            forwarded: false,
        })
        .collect();
    let cap = 4 * net.n() + 16;
    let stats = run(net, &mut nodes, Halt::AllDone, cap, LogMode::Off, "convergecast_min")?;
    let result = nodes[0].result.unwrap();
    debug_assert!(nodes.iter().all(|n| n.result == Some(result)));
    Ok((result, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::protocols::build_bfs;

    fn path_setup(n: usize) -> (Network, super::super::BfsTree) {
        let g = Graph::from_edges((1..n).map(|v| (v - 1, v, 1))).unwrap();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 0).unwrap();
        (net, bfs)
    }

    #[test]
    fn single_key_path() {
        let (net, bfs) = path_setup(5);
        let contributions = vec![vec![1u64]; 5];
        let (totals, stats) = convergecast_sum(&net, &bfs.ports, 0, contributions, 1).unwrap();
        assert_eq!(totals, vec![5]);
        assert!(stats.rounds <= 4 * (4 + 1));
    }

    #[test]
    fn two_keys_star() {
        let g = Graph::from_edges((1..4).map(|v| (0, v, 1))).unwrap();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 0).unwrap();
        let mut contributions = vec![vec![0, 0]; 4];
        for leaf in 1..4 {
            contributions[leaf] = vec![1, 2];
        }
        let (totals, _) = convergecast_sum(&net, &bfs.ports, 0, contributions, 2).unwrap();
        assert_eq!(totals, vec![3, 6]);
    }

    #[test]
    fn no_contributions() {
        let (net, bfs) = path_setup(4);
        let (totals, _) = convergecast_sum(&net, &bfs.ports, 0, vec![vec![0, 0, 0]; 4], 3).unwrap();
        assert_eq!(totals, vec![0, 0, 0]);
    }

    #[test]
    fn min_with_root_sentinel() {
        let (net, bfs) = path_setup(4);
        let values = vec![(u64::MAX, 0), (4, 1), (6, 2), (5, 3)];
        let ((value, witness), stats) = convergecast_min(&net, &bfs.ports, values).unwrap();
        assert_eq!((value, witness), (4, 1));
        assert!(stats.rounds <= 4 * (3 + 1));
    }

    #[test]
    fn min_tie_breaks_to_smallest_witness() {
        let (net, bfs) = path_setup(5);
        let values = vec![(7, 0), (7, 1), (7, 2), (7, 3), (7, 4)];
        let ((_, witness), _) = convergecast_min(&net, &bfs.ports, values).unwrap();
        assert_eq!(witness, 0);
    }

    #[test]
    fn min_single_node_cluster() {
        let g = Graph::from_edges([(0, 1, 1)]).unwrap();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 0).unwrap();
        let ((v, w), _) = convergecast_min(&net, &bfs.ports, vec![(9, 0), (11, 1)]).unwrap();
        assert_eq!((v, w), (9, 0));
    }
}
