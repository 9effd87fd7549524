//! Approach graphs, port-preserving symmetry and leader election.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use super::view::PortView;
use super::Port;
use crate::error::GraphError;

/// Edge between local indices of an [`ApproachGraph`], with its two ports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalEdge {
    pub a: usize,
    pub pa: Port,
    pub b: usize,
    pub pb: Port,
}

/// Induced subgraph on `u`, `v` and all their common neighbours, with the
/// original port numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproachGraph<N> {
    /// `nodes[0]` is `u`, `nodes[1]` is `v`, then common neighbours ordered by
    /// their port at `u`.
    pub nodes: Vec<N>,
    pub edges: Vec<LocalEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    U,
    V,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::U => Side::V,
            Side::V => Side::U,
        }
    }
}

type HalfEdge = (usize, Port, usize, Port);

impl<N: Copy> ApproachGraph<N> {
    pub fn u(&self) -> N {
        self.nodes[0]
    }

    pub fn v(&self) -> N {
        self.nodes[1]
    }

    pub fn common(&self) -> &[N] {
        &self.nodes[2..]
    }

    pub fn adjacent(&self) -> bool {
        self.edges.iter().any(|e| (e.a.min(e.b), e.a.max(e.b)) == (0, 1))
    }

    /// The same graph with the roles of `u` and `v` exchanged.
    pub fn swapped(&self) -> ApproachGraph<N> {
        let mut nodes = self.nodes.clone();
        nodes.swap(0, 1);
        let sw = |x: usize| match x {
            0 => 1,
            1 => 0,
            other => other,
        };
        let edges = self
            .edges
            .iter()
            .map(|e| LocalEdge { a: sw(e.a), pa: e.pa, b: sw(e.b), pb: e.pb })
            .collect();
        ApproachGraph { nodes, edges }
    }

    fn half_edges(&self, relabel: impl Fn(usize) -> usize) -> Vec<HalfEdge> {
        let mut out = Vec::with_capacity(self.edges.len() * 2);
        for e in &self.edges {
            let (a, b) = (relabel(e.a), relabel(e.b));
            out.push((a, e.pa, b, e.pb));
            out.push((b, e.pb, a, e.pa));
        }
        out.sort_unstable();
        out
    }
}

/// Calls `f` with every permutation of `0..k` until it returns `true`.
fn any_permutation(k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(perm: &mut Vec<usize>, used: &mut [bool], f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if perm.len() == used.len() {
            return f(perm);
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                perm.push(i);
                if rec(perm, used, f) {
                    return true;
                }
                perm.pop();
                used[i] = false;
            }
        }
        false
    }
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut f)
}

/// Builds the approach graph of `u` and `v`.
pub fn approach_graph<V: PortView>(
    view: &V,
    u: V::Node,
    v: V::Node,
) -> Result<ApproachGraph<V::Node>, GraphError> {
    if u == v {
        return Err(GraphError::SameNode);
    }
    let at_u = view.links_of(u);
    let adjacent = at_u.iter().any(|l| l.1 == v);
    let mut nodes = vec![u, v];
    for &(_, w, _) in &at_u {
        if w != v && view.links_of(w).iter().any(|l| l.1 == v) {
            nodes.push(w);
        }
    }
    if !adjacent && nodes.len() == 2 {
        return Err(GraphError::TooFar);
    }
    let mut edges = Vec::new();
    for (i, &x) in nodes.iter().enumerate() {
        for (p, w, q) in view.links_of(x) {
            if let Some(j) = nodes.iter().position(|&y| y == w) {
                if j > i {
                    edges.push(LocalEdge { a: i, pa: p, b: j, pb: q });
                }
            }
        }
    }
    Ok(ApproachGraph { nodes, edges })
}

/// Whether some port-preserving automorphism of the approach graph swaps
/// `u` and `v`. Decided by trying every bijection of the common neighbours.
pub fn is_symmetric<N: Copy>(ag: &ApproachGraph<N>) -> bool {
    let k = ag.nodes.len() - 2;
    let original = ag.half_edges(|x| x);
    any_permutation(k, |perm| {
        let phi = |x: usize| match x {
            0 => 1,
            1 => 0,
            c => 2 + perm[c - 2],
        };
        ag.half_edges(phi) == original
    })
}

/// `L(u)` and `L(v)`: edges at `u` (resp. `v`) as `(own port, far port)`, sorted.
pub fn port_lists<N: Copy>(ag: &ApproachGraph<N>) -> (Vec<(Port, Port)>, Vec<(Port, Port)>) {
    let list = |x: usize| {
        let mut l: Vec<(Port, Port)> = ag
            .edges
            .iter()
            .filter_map(|e| {
                if e.a == x {
                    Some((e.pa, e.pb))
                } else if e.b == x {
                    Some((e.pb, e.pa))
                } else {
                    None
                }
            })
            .collect();
        l.sort_unstable();
        l
    };
    (list(0), list(1))
}

/// Smallest encoding of the approach graph with `root` relabelled 0 and the
/// other approach node 1, over all orderings of the common neighbours.
fn rooted_code<N: Copy>(ag: &ApproachGraph<N>, root: usize) -> Vec<HalfEdge> {
    let k = ag.nodes.len() - 2;
    let mut best: Option<Vec<HalfEdge>> = None;
    any_permutation(k, |perm| {
        let relabel = |x: usize| match x {
            0 | 1 if x == root => 0,
            0 | 1 => 1,
            c => 2 + perm[c - 2],
        };
        let code = ag.half_edges(relabel);
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
        false
    });
    best.unwrap_or_default()
}

/// Elects the side whose sorted port list is lexicographically smaller.
///
/// Asymmetric approach graphs can still have `L(u) = L(v)` when the asymmetry
/// sits on edges between common neighbours; such ties are broken by comparing
/// the rooted canonical encodings, which differ exactly when the graph is
/// asymmetric.
pub fn elect_leader<N: Copy>(ag: &ApproachGraph<N>) -> Result<Side, GraphError> {
    let (lu, lv) = port_lists(ag);
    match lu.cmp(&lv) {
        std::cmp::Ordering::Less => return Ok(Side::U),
        std::cmp::Ordering::Greater => return Ok(Side::V),
        std::cmp::Ordering::Equal => {}
    }
    match rooted_code(ag, 0).cmp(&rooted_code(ag, 1)) {
        std::cmp::Ordering::Less => Ok(Side::U),
        std::cmp::Ordering::Greater => Ok(Side::V),
        std::cmp::Ordering::Equal => Err(GraphError::Symmetric),
    }
}

/// Common and private neighbourhoods of `u` and `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborPartition<N> {
    /// Common neighbours, ordered by port at `u`.
    pub common: Vec<N>,
    /// Private neighbours of `u`, ordered by port at `u`.
    pub private_u: Vec<N>,
    /// Private neighbours of `v` visible in the view, ordered by port at `v`.
    pub private_v: Vec<N>,
    /// Common neighbours whose port towards `u` exceeds their port towards `v`.
    pub common_u: Vec<N>,
    pub common_v: Vec<N>,
}

pub fn partition_neighbors<V: PortView>(
    view: &V,
    u: V::Node,
    v: V::Node,
) -> Result<NeighborPartition<V::Node>, GraphError> {
    if u == v {
        return Err(GraphError::SameNode);
    }
    let at_u = view.links_of(u);
    let at_v = view.links_of(v);
    let mut p = NeighborPartition {
        common: Vec::new(),
        private_u: Vec::new(),
        private_v: Vec::new(),
        common_u: Vec::new(),
        common_v: Vec::new(),
    };
    for &(_, w, _) in &at_u {
        if w == v {
            continue;
        }
        if at_v.iter().any(|l| l.1 == w) {
            p.common.push(w);
            let links_w = view.links_of(w);
            let port_to = |x| links_w.iter().find(|l| l.1 == x).map(|l| l.0);
            if port_to(u) > port_to(v) {
                p.common_u.push(w);
            } else {
                p.common_v.push(w);
            }
        } else {
            p.private_u.push(w);
        }
    }
    let adjacent = at_u.iter().any(|l| l.1 == v);
    if !adjacent && p.common.is_empty() {
        return Err(GraphError::TooFar);
    }
    for &(_, w, _) in &at_v {
        if w != u && !p.common.contains(&w) {
            p.private_v.push(w);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{PortEdge, PortGraph};

    fn e(u: usize, pu: usize, v: usize, pv: usize) -> PortEdge {
        PortEdge { u, pu, v, pv }
    }

    // u=0, w=1, v=2
    fn path_uwv(w_to_u: usize, w_to_v: usize) -> PortGraph {
        PortGraph::from_edges(3, &[e(0, 0, 1, w_to_u), e(2, 0, 1, w_to_v)]).unwrap()
    }

    #[test]
    fn approach_graph_shapes() {
        let g = path_uwv(0, 1);
        let ag = approach_graph(&g, 0, 2).unwrap();
        assert_eq!(ag.nodes, vec![0, 2, 1]);
        assert_eq!(ag.edges.len(), 2);
        assert!(!ag.adjacent());

        let p = PortGraph::path(4).unwrap();
        let ag = approach_graph(&p, 1, 2).unwrap();
        assert_eq!(ag.nodes, vec![1, 2]);
        assert_eq!(ag.edges.len(), 1);

        let c = crate::graph::tests::four_cycle_symmetric();
        let ag = approach_graph(&c, 0, 2).unwrap();
        assert_eq!(ag.nodes.len(), 4);
        assert_eq!(ag.edges.len(), 4);

        assert_eq!(approach_graph(&p, 0, 3), Err(GraphError::TooFar));
    }

    #[test]
    fn symmetry_examples() {
        let g = path_uwv(0, 1);
        assert!(!is_symmetric(&approach_graph(&g, 0, 2).unwrap()));
        let c = crate::graph::tests::four_cycle_symmetric();
        assert!(is_symmetric(&approach_graph(&c, 0, 2).unwrap()));
        let k2 = PortGraph::path(2).unwrap();
        assert!(is_symmetric(&approach_graph(&k2, 0, 1).unwrap()));
    }

    #[test]
    fn leader_examples() {
        let g = path_uwv(0, 1);
        let ag = approach_graph(&g, 0, 2).unwrap();
        assert_eq!(port_lists(&ag), (vec![(0, 0)], vec![(0, 1)]));
        assert_eq!(elect_leader(&ag), Ok(Side::U));
        assert_eq!(elect_leader(&ag.swapped()), Ok(Side::V));
        let rev = approach_graph(&g, 2, 0).unwrap();
        assert_eq!(elect_leader(&rev), Ok(Side::V));
        let c = crate::graph::tests::four_cycle_symmetric();
        assert_eq!(
            elect_leader(&approach_graph(&c, 0, 2).unwrap()),
            Err(GraphError::Symmetric)
        );
    }

    /// K4 numbering whose port lists at u and v coincide although the edge
    /// between the two common neighbours breaks the symmetry.
    #[test]
    fn equal_port_lists_without_symmetry() {
        // u=0, v=1, w1=2, w2=3
        let g = PortGraph::from_edges(
            4,
            &[
                e(0, 2, 1, 1),
                e(0, 0, 2, 0),
                e(0, 1, 3, 2),
                e(1, 2, 2, 1),
                e(1, 0, 3, 0),
                e(2, 2, 3, 1),
            ],
        )
        .unwrap();
        let ag = approach_graph(&g, 0, 1).unwrap();
        let (lu, lv) = port_lists(&ag);
        assert_eq!(lu, lv);
        assert!(!is_symmetric(&ag));
        let side = elect_leader(&ag).unwrap();
        assert_eq!(elect_leader(&ag.swapped()).unwrap(), side.flip());
    }

    #[test]
    fn partition_examples() {
        let p = PortGraph::path(4).unwrap();
        let part = partition_neighbors(&p, 1, 2).unwrap();
        assert!(part.common.is_empty());
        assert_eq!(part.private_u, vec![0]);
        assert_eq!(part.private_v, vec![3]);

        let g = path_uwv(1, 0);
        let part = partition_neighbors(&g, 0, 2).unwrap();
        assert_eq!(part.common, vec![1]);
        assert_eq!(part.common_u, vec![1]);
        assert!(part.common_v.is_empty());

        let c = crate::graph::tests::four_cycle_symmetric();
        let part = partition_neighbors(&c, 0, 2).unwrap();
        assert_eq!(part.common, vec![1, 3]);
        // w1: port 0 -> u, 1 -> v ; w2: port 1 -> u, 0 -> v
        assert_eq!(part.common_u, vec![3]);
        assert_eq!(part.common_v, vec![1]);
    }
}
