//! What an agent sees: the ball around its node, under opaque handles.

use std::fmt;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NodeId, Port, PortGraph};

/// Opaque node handle inside an [`Observation`].
///
/// Handles are stable for one agent over one run, so an agent can tell that
/// the node it sees now is the node it saw a round ago. They carry no order or
/// meaning that is shared with the other agent or with the engine.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Handle(pub u32);

impl fmt::Debug for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

/// Per-agent bijection between engine node ids and handles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HandleMap {
    to_handle: Vec<Handle>,
    to_node: Vec<NodeId>,
}

impl HandleMap {
    pub fn identity(n: usize) -> Self {
        Self::from_perm((0..n as u32).collect())
    }

    pub fn shuffled(n: usize, seed: u64) -> Self {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_perm(perm)
    }

    fn from_perm(perm: Vec<u32>) -> Self {
        let mut to_node = vec![0; perm.len()];
        for (node, &h) in perm.iter().enumerate() {
            to_node[h as usize] = node;
        }
        HandleMap { to_handle: perm.into_iter().map(Handle).collect(), to_node }
    }

    pub fn handle(&self, node: NodeId) -> Handle {
        self.to_handle[node]
    }

    pub fn node(&self, h: Handle) -> NodeId {
        self.to_node[h.0 as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ViewEdge {
    pub a: Handle,
    pub port_a: Port,
    pub b: Handle,
    pub port_b: Port,
}

/// The input of an awake agent in one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub center: Handle,
    pub radius: usize,
    /// Ball nodes in BFS order from the centre, exploring ports in increasing order.
    pub nodes: Vec<Handle>,
    /// Edges of the induced subgraph, each listed once.
    pub edges: Vec<ViewEdge>,
    pub other: Option<Handle>,
}

impl Observation {
    pub fn contains(&self, h: Handle) -> bool {
        self.nodes.contains(&h)
    }

    /// Visible edges at `x` as `(port at x, neighbour, port at neighbour)`, by port.
    pub fn links(&self, x: Handle) -> Vec<(Port, Handle, Port)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.a == x {
                    Some((e.port_a, e.b, e.port_b))
                } else if e.b == x {
                    Some((e.port_b, e.a, e.port_a))
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable_by_key(|l| l.0);
        out
    }

    /// Degree of the centre; all its edges are always inside the ball.
    pub fn center_degree(&self) -> usize {
        self.links(self.center).len()
    }

    pub fn port_toward(&self, from: Handle, to: Handle) -> Option<Port> {
        self.edges.iter().find_map(|e| {
            if e.a == from && e.b == to {
                Some(e.port_a)
            } else if e.b == from && e.a == to {
                Some(e.port_b)
            } else {
                None
            }
        })
    }

    pub fn is_adjacent(&self, x: Handle, y: Handle) -> bool {
        self.port_toward(x, y).is_some()
    }

    pub fn neighbor_via_port(&self, x: Handle, p: Port) -> Option<(Handle, Port)> {
        self.links(x).into_iter().find(|l| l.0 == p).map(|l| (l.1, l.2))
    }

    /// Same observation with handles renamed through `f`.
    pub fn relabel(&self, f: impl Fn(Handle) -> Handle) -> Observation {
        Observation {
            center: f(self.center),
            radius: self.radius,
            nodes: self.nodes.iter().map(|&h| f(h)).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| ViewEdge { a: f(e.a), port_a: e.port_a, b: f(e.b), port_b: e.port_b })
                .collect(),
            other: self.other.map(f),
        }
    }
}

/// Ball of the given radius around `center`, induced, with all its ports.
/// `other` is reported only if it lies inside the ball.
pub fn ball(
    g: &PortGraph,
    center: NodeId,
    radius: usize,
    other: Option<NodeId>,
    handles: &HandleMap,
) -> Observation {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut order = vec![center];
    dist[center] = 0;
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        if dist[x] == radius {
            continue;
        }
        for l in g.links(x) {
            if dist[l.node] == usize::MAX {
                dist[l.node] = dist[x] + 1;
                order.push(l.node);
            }
        }
    }
    let mut edges = Vec::new();
    for &x in &order {
        for (p, l) in g.links(x).iter().enumerate() {
            if x < l.node && dist[l.node] != usize::MAX {
                edges.push(ViewEdge {
                    a: handles.handle(x),
                    port_a: p,
                    b: handles.handle(l.node),
                    port_b: l.back_port,
                });
            }
        }
    }
    Observation {
        center: handles.handle(center),
        radius,
        nodes: order.iter().map(|&x| handles.handle(x)).collect(),
        edges,
        other: other.filter(|&o| dist[o] != usize::MAX).map(|o| handles.handle(o)),
    }
}

/// Read access to port structure, shared by whole graphs and observations.
pub trait PortView {
    type Node: Copy + Eq + Hash + fmt::Debug;

    /// Visible edges at `x`: `(port at x, neighbour, port at neighbour)`, by port.
    fn links_of(&self, x: Self::Node) -> Vec<(Port, Self::Node, Port)>;
}

impl PortView for PortGraph {
    type Node = NodeId;

    fn links_of(&self, x: NodeId) -> Vec<(Port, NodeId, Port)> {
        self.links(x)
            .iter()
            .enumerate()
            .map(|(p, l)| (p, l.node, l.back_port))
            .collect()
    }
}

impl PortView for Observation {
    type Node = Handle;

    fn links_of(&self, x: Handle) -> Vec<(Port, Handle, Port)> {
        self.links(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node_set(o: &Observation, map: &HandleMap) -> Vec<NodeId> {
        let mut v: Vec<_> = o.nodes.iter().map(|&h| map.node(h)).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn star_leaf_sees_everything_at_radius_two() {
        let g = PortGraph::star(3).unwrap();
        let id = HandleMap::identity(4);
        let o = ball(&g, 1, 2, None, &id);
        assert_eq!(node_set(&o, &id), vec![0, 1, 2, 3]);
        assert_eq!(o.edges.len(), 3);
    }

    #[test]
    fn path_ball_is_induced_prefix() {
        let g = PortGraph::path(5).unwrap();
        let id = HandleMap::identity(5);
        let o = ball(&g, 0, 2, Some(3), &id);
        assert_eq!(node_set(&o, &id), vec![0, 1, 2]);
        assert_eq!(o.edges.len(), 2);
        assert_eq!(o.other, None);
        let o = ball(&g, 0, 2, Some(2), &id);
        assert_eq!(o.other, Some(Handle(2)));
    }

    #[test]
    fn radius_one_star_leaf_sees_single_edge() {
        let g = PortGraph::star(3).unwrap();
        let id = HandleMap::identity(4);
        // leaf at centre port 2 is node 3
        let o = ball(&g, 3, 1, None, &id);
        assert_eq!(node_set(&o, &id), vec![0, 3]);
        assert_eq!(o.edges, vec![ViewEdge { a: Handle(0), port_a: 2, b: Handle(3), port_b: 0 }]);
    }

    #[test]
    fn ball_is_induced_subgraph() {
        for seed in 0..40 {
            let g = PortGraph::random(7, seed).unwrap();
            let map = HandleMap::shuffled(7, seed);
            for c in 0..7 {
                let o = ball(&g, c, 2, None, &map);
                let dist = g.distances_from(c);
                let inside: Vec<_> = (0..7).filter(|&x| dist[x] <= 2).collect();
                assert_eq!(node_set(&o, &map), inside);
                let expected = g
                    .edges()
                    .into_iter()
                    .filter(|e| dist[e.u] <= 2 && dist[e.v] <= 2)
                    .count();
                assert_eq!(o.edges.len(), expected);
                for e in &o.edges {
                    let (a, b) = (map.node(e.a), map.node(e.b));
                    assert_eq!(g.port_to(a, b), Some(e.port_a));
                    assert_eq!(g.port_to(b, a), Some(e.port_b));
                }
            }
        }
    }
}
