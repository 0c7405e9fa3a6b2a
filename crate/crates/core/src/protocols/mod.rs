//! Reusable distributed building blocks over the round simulator:
//! BFS-tree construction, pipelined whole-network broadcast, and pipelined
//! convergecast aggregation along trees.

mod bfs;
mod broadcast;
mod convergecast;

pub use bfs::{build_bfs, BfsTree};
pub use broadcast::{broadcast_all, broadcast_all_windowed};
pub use convergecast::{convergecast_min, convergecast_sum};

use crate::congest::Network;
use crate::graph::RootedTree;

/// Port-level view of a rooted tree: for every node, the port leading to
/// its parent and the ports leading to its children. Works for any tree
/// whose edges exist in the underlying network.
#[derive(Debug, Clone)]
pub struct TreePorts {
    pub parent_port: Vec<Option<usize>>,
    pub children_ports: Vec<Vec<usize>>,
}

impl TreePorts {
    pub fn from_rooted_tree(net: &Network, t: &RootedTree) -> Self {
        let n = net.n();
        let mut parent_port = vec![None; n];
        let mut children_ports = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = t.parent(v) {
                parent_port[v] = Some(net.port_to(v, p).expect("tree edge missing from network"));
                children_ports[p].push(net.port_to(p, v).expect("tree edge missing from network"));
            }
        }
        TreePorts { parent_port, children_ports }
    }
}
