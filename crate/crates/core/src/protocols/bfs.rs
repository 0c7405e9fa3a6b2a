//! Distributed breadth-first tree construction.

use crate::congest::{run, Halt, Inbox, LogMode, Message, Network, NodeProtocol, Outbox, RunStats, SimError};
use crate::graph::NodeId;

use super::TreePorts;

const TAG_ANNOUNCE: u8 = 0;

/// Breadth-first tree with per-node parent pointers and hop depths.
#[derive(Debug, Clone)]
pub struct BfsTree {
    pub source: NodeId,
    pub parent: Vec<Option<NodeId>>,
    pub depth: Vec<usize>,
    /// Largest depth; a measured lower bound on the hop diameter.
    pub height: usize,
    pub ports: TreePorts,
}

struct BfsNode {
    id: NodeId,
    source: NodeId,
    degree: usize,
    depth: Option<usize>,
    parent_port: Option<usize>,
}

impl NodeProtocol for BfsNode {
    fn on_round(&mut self, round: usize, inbox: &Inbox, out: &mut Outbox) {
        if round == 0 && self.id == self.source {
            self.depth = Some(0);
            for port in 0..self.degree {
                out.send(port, Message::new(TAG_ANNOUNCE, &[0]));
            }
            return;
        }
        if self.depth.is_none() {
            // All first announcements arrive in the same round, from
            // neighbors one level closer to the source. Ports are sorted by
            // neighbor ID, so the first announcing port is the smallest-ID
            // parent candidate.
            if let Some((port, msg)) = inbox.iter().next() {
                let d = msg.field(0) as usize + 1;
                self.depth = Some(d);
                self.parent_port = Some(port);
                for p in 0..self.degree {
                    if p != port {
                        out.send(p, Message::new(TAG_ANNOUNCE, &[d as u64]));
                    }
                }
            }
        }
    }

    fn is_done(&self) -> bool {
        self.depth.is_some()
    }
}

/// Builds a BFS tree from `source`. Completes within `2*ecc(source) + 2`
/// rounds; afterwards every node knows its parent and depth.
pub fn build_bfs(net: &Network, source: NodeId) -> Result<(BfsTree, RunStats), SimError> {
    let n = net.n();
    let mut nodes: Vec<BfsNode> = (0..n)
        .map(|id| BfsNode { id, source, degree: net.degree(id), depth: None, parent_port: None })
        .collect();
    let stats = run(net, &mut nodes, Halt::AllDone, 2 * n + 16, LogMode::Off, "bfs")?;

    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut ports = TreePorts { parent_port: vec![None; n], children_ports: vec![Vec::new(); n] };
    for (v, node) in nodes.iter().enumerate() {
        depth[v] = node.depth.expect("connected graph: every node reached");
        if let Some(pp) = node.parent_port {
            let p = net.ports(v)[pp].neighbor;
            parent[v] = Some(p);
            ports.parent_port[v] = Some(pp);
            ports.children_ports[p].push(net.port_to(p, v).unwrap());
        }
    }
    let height = depth.iter().copied().max().unwrap_or(0);
    Ok((BfsTree { source, parent, depth, height, ports }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_graph, Graph};

    #[test]
    fn path_depths() {
        let g = Graph::from_edges((1..5).map(|v| (v - 1, v, 1))).unwrap();
        let net = Network::new(&g);
        let (bfs, stats) = build_bfs(&net, 0).unwrap();
        assert_eq!(bfs.depth, vec![0, 1, 2, 3, 4]);
        assert!(stats.rounds <= 2 * 4 + 2);
    }

    #[test]
    fn complete_graph_all_depth_one() {
        let edges: Vec<_> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v, 1))).collect();
        let g = Graph::from_edges(edges).unwrap();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 2).unwrap();
        assert!((0..4).all(|v| bfs.depth[v] <= 1));
        assert_eq!(bfs.depth[2], 0);
    }

    #[test]
    fn g1_parents_are_smallest_id() {
        let g = load_graph("0 1 1\n1 2 2\n2 3 1\n0 3 3\n1 3 1").unwrap();
        let net = Network::new(&g);
        let (bfs, _) = build_bfs(&net, 0).unwrap();
        assert_eq!(bfs.depth, vec![0, 1, 2, 1]);
        // Node 2 hears depth-1 announcements from both 1 and 3; it must
        // pick the smaller ID.
        assert_eq!(bfs.parent[2], Some(1));
        assert_eq!(bfs.parent[3], Some(0));
    }
}
