//! Anonymous port-numbered graphs.
//!
//! Nodes carry indices only so the engine can address them; agents never see
//! these indices (see [`view`]).

mod approach;
pub mod enumerate;
mod io;
mod view;

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub use approach::{
    approach_graph, elect_leader, is_symmetric, partition_neighbors, port_lists, ApproachGraph,
    LocalEdge, NeighborPartition, Side,
};
pub use io::{parse_graph, write_graph};
pub use view::{ball, Handle, HandleMap, Observation, PortView, ViewEdge};

pub type NodeId = usize;
pub type Port = usize;

/// The far end of an edge leaving a node by some port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortLink {
    pub node: NodeId,
    /// Port number of the same edge at `node`.
    pub back_port: Port,
}

/// Edge `{u, v}` with port `pu` at `u` and `pv` at `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortEdge {
    pub u: NodeId,
    pub pu: Port,
    pub v: NodeId,
    pub pv: Port,
}

/// Simple connected undirected graph with a port numbering at every node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PortGraph {
    adj: Vec<Vec<PortLink>>,
}

impl PortGraph {
    /// Builds and validates a graph from port-annotated edges.
    ///
    /// Errors name the offending edge by its index in `edges`.
    pub fn from_edges(n: usize, edges: &[PortEdge]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut slots: Vec<Vec<Option<PortLink>>> = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for (index, e) in edges.iter().enumerate() {
            for node in [e.u, e.v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { index, node, n });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop { index, node: e.u });
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(GraphError::DuplicateEdge { index, u: e.u, v: e.v });
            }
            for (node, port, link) in [
                (e.u, e.pu, PortLink { node: e.v, back_port: e.pv }),
                (e.v, e.pv, PortLink { node: e.u, back_port: e.pu }),
            ] {
                let row = &mut slots[node];
                if row.len() <= port {
                    row.resize(port + 1, None);
                }
                if row[port].is_some() {
                    return Err(GraphError::DuplicatePort { index, node, port });
                }
                row[port] = Some(link);
            }
        }
        let mut adj = Vec::with_capacity(n);
        for (node, row) in slots.into_iter().enumerate() {
            let degree = row.iter().filter(|s| s.is_some()).count();
            if row.len() != degree {
                return Err(GraphError::PortGap { node, degree });
            }
            adj.push(row.into_iter().map(|s| s.expect("checked")).collect());
        }
        let g = PortGraph { adj };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph from plain edges, numbering the ports at every node in
    /// the order the edges are listed.
    pub fn from_plain_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut next = vec![0usize; n];
        let mut out = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::UnknownNode(u.max(v)));
            }
            let pu = next[u];
            next[u] += 1;
            let pv = next[v];
            next[v] += 1;
            out.push(PortEdge { u, pu, v, pv });
        }
        Self::from_edges(n, &out)
    }

    /// Same edges, with the ports at every node permuted uniformly at random.
    pub fn shuffle_ports<R: Rng>(&self, rng: &mut R) -> Self {
        let perms: Vec<Vec<Port>> = self
            .adj
            .iter()
            .map(|row| {
                let mut p: Vec<Port> = (0..row.len()).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        let mut adj: Vec<Vec<PortLink>> = self
            .adj
            .iter()
            .map(|row| vec![PortLink { node: 0, back_port: 0 }; row.len()])
            .collect();
        for (u, row) in self.adj.iter().enumerate() {
            for (p, link) in row.iter().enumerate() {
                adj[u][perms[u][p]] = PortLink {
                    node: link.node,
                    back_port: perms[link.node][link.back_port],
                };
            }
        }
        PortGraph { adj }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn links(&self, u: NodeId) -> &[PortLink] {
        &self.adj[u]
    }

    /// The neighbour reached from `u` through port `p`.
    pub fn neighbor_via_port(&self, u: NodeId, p: Port) -> Result<NodeId, GraphError> {
        self.link(u, p).map(|l| l.node)
    }

    pub fn link(&self, u: NodeId, p: Port) -> Result<PortLink, GraphError> {
        let row = self.adj.get(u).ok_or(GraphError::UnknownNode(u))?;
        row.get(p).copied().ok_or(GraphError::PortOutOfRange {
            node: u,
            port: p,
            degree: row.len(),
        })
    }

    /// Port at `u` of the edge `{u, w}`, if the edge exists.
    pub fn port_to(&self, u: NodeId, w: NodeId) -> Option<Port> {
        self.adj[u].iter().position(|l| l.node == w)
    }

    pub fn is_adjacent(&self, u: NodeId, w: NodeId) -> bool {
        self.port_to(u, w).is_some()
    }

    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj[u].iter().map(|l| l.node)
    }

    /// Each undirected edge once, with `u < v`.
    pub fn edges(&self) -> Vec<PortEdge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, row) in self.adj.iter().enumerate() {
            for (pu, l) in row.iter().enumerate() {
                if u < l.node {
                    out.push(PortEdge { u, pu, v: l.node, pv: l.back_port });
                }
            }
        }
        out
    }

    /// BFS distances from `src`; `usize::MAX` marks unreachable nodes.
    pub fn distances_from(&self, src: NodeId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            for l in &self.adj[x] {
                if dist[l.node] == usize::MAX {
                    dist[l.node] = dist[x] + 1;
                    queue.push_back(l.node);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: NodeId, v: NodeId) -> usize {
        self.distances_from(u)[v]
    }

    fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Path `0 - 1 - ... - (k-1)`.
    pub fn path(k: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
        Self::from_plain_edges(k, &edges)
    }

    /// Ring of `k >= 3` nodes whose ports read 0,1,0,1,... clockwise: every
    /// node has port 0 towards its clockwise successor and port 1 back.
    pub fn ring(k: usize) -> Result<Self, GraphError> {
        if k < 3 {
            return Self::path(k);
        }
        let edges: Vec<_> = (0..k)
            .map(|i| PortEdge { u: i, pu: 0, v: (i + 1) % k, pv: 1 })
            .collect();
        Self::from_edges(k, &edges)
    }

    /// Star with centre 0 and leaves `1..=leaves`; port `i` at the centre leads
    /// to leaf `i + 1`, and every leaf uses port 0.
    pub fn star(leaves: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..leaves)
            .map(|i| PortEdge { u: 0, pu: i, v: i + 1, pv: 0 })
            .collect();
        Self::from_edges(leaves + 1, &edges)
    }

    pub fn complete(k: usize) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for u in 0..k {
            for v in u + 1..k {
                edges.push((u, v));
            }
        }
        Self::from_plain_edges(k, &edges)
    }

    /// Random connected graph on `k` nodes: a random spanning tree plus each
    /// remaining pair with probability 1/3, then uniformly random ports.
    pub fn random(k: usize, seed: u64) -> Result<Self, GraphError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::random_with(k, &mut rng)?.shuffle_ports(&mut rng))
    }

    pub(crate) fn random_with<R: Rng>(k: usize, rng: &mut R) -> Result<Self, GraphError> {
        let mut order: Vec<NodeId> = (0..k).collect();
        order.shuffle(rng);
        let mut present = vec![vec![false; k]; k];
        let mut edges = Vec::new();
        for i in 1..k {
            let parent = order[rng.gen_range(0..i)];
            let child = order[i];
            present[parent][child] = true;
            present[child][parent] = true;
            edges.push((parent, child));
        }
        for u in 0..k {
            for v in u + 1..k {
                if !present[u][v] && rng.gen_ratio(1, 3) {
                    edges.push((u, v));
                }
            }
        }
        Self::from_plain_edges(k, &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn four_cycle_symmetric() -> PortGraph {
        // u=0, w1=1, v=2, w2=3
        PortGraph::from_edges(
            4,
            &[
                PortEdge { u: 0, pu: 0, v: 1, pv: 0 },
                PortEdge { u: 0, pu: 1, v: 3, pv: 1 },
                PortEdge { u: 2, pu: 0, v: 3, pv: 0 },
                PortEdge { u: 2, pu: 1, v: 1, pv: 1 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn neighbor_via_port_examples() {
        let p = PortGraph::path(3).unwrap();
        assert_eq!(p.neighbor_via_port(0, 0).unwrap(), 1);
        let c = four_cycle_symmetric();
        assert_eq!(c.neighbor_via_port(0, 1).unwrap(), 3);
        assert!(matches!(
            c.neighbor_via_port(0, 2),
            Err(GraphError::PortOutOfRange { .. })
        ));
    }

    #[test]
    fn validation_rejects_bad_graphs() {
        let e = |u, pu, v, pv| PortEdge { u, pu, v, pv };
        assert_eq!(
            PortGraph::from_edges(2, &[e(0, 0, 0, 1)]),
            Err(GraphError::SelfLoop { index: 0, node: 0 })
        );
        assert!(matches!(
            PortGraph::from_edges(2, &[e(0, 0, 1, 0), e(1, 1, 0, 1)]),
            Err(GraphError::DuplicateEdge { index: 1, .. })
        ));
        assert!(matches!(
            PortGraph::from_edges(3, &[e(0, 0, 1, 0), e(0, 0, 2, 0)]),
            Err(GraphError::DuplicatePort { index: 1, node: 0, port: 0 })
        ));
        assert!(matches!(
            PortGraph::from_edges(2, &[e(0, 1, 1, 0)]),
            Err(GraphError::PortGap { node: 0, .. })
        ));
        assert_eq!(
            PortGraph::from_edges(3, &[e(0, 0, 1, 0)]),
            Err(GraphError::Disconnected)
        );
    }

    #[test]
    fn ports_enumerate_each_neighbor_once() {
        for seed in 0..50 {
            let g = PortGraph::random(6, seed).unwrap();
            for u in 0..g.node_count() {
                let mut via: Vec<_> = (0..g.degree(u))
                    .map(|p| g.neighbor_via_port(u, p).unwrap())
                    .collect();
                via.sort_unstable();
                let mut direct: Vec<_> = g.neighbors(u).collect();
                direct.sort_unstable();
                via.dedup();
                assert_eq!(via, direct);
                for p in 0..g.degree(u) {
                    let l = g.link(u, p).unwrap();
                    assert_eq!(g.link(l.node, l.back_port).unwrap().node, u);
                }
            }
        }
    }

    #[test]
    fn ring_ports_alternate() {
        let r = PortGraph::ring(5).unwrap();
        for i in 0..5 {
            assert_eq!(r.neighbor_via_port(i, 0).unwrap(), (i + 1) % 5);
            assert_eq!(r.neighbor_via_port(i, 1).unwrap(), (i + 4) % 5);
        }
    }
}
