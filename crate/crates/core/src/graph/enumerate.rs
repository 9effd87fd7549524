//! Enumeration of small connected graphs and of all their port numberings.
//!
//! Shapes are unlabeled connected graphs, one representative per isomorphism
//! class. Enumerating every port numbering of every shape, together with every
//! start node, covers every labeled port-numbered graph up to renaming of the
//! nodes. Renaming is invisible to agents, so nothing is lost.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{PortEdge, PortGraph};

/// Largest supported node count for fixed-size graph buffers.
pub const MAX_N: usize = 8;

/// Largest node count for which shapes are enumerated exhaustively.
pub const MAX_SHAPE_N: usize = 6;

/// One unlabeled connected graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    /// Sorted neighbour lists of the representative.
    pub adj: Vec<Vec<usize>>,
    /// One node per orbit of the automorphism group.
    pub start_reps: Vec<usize>,
}

fn pair_index(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            pairs.push((u, v));
        }
    }
    pairs
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut p, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, p, out);
        if k.is_multiple_of(2) {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
}

fn mask_connected(n: usize, pairs: &[(usize, usize)], mask: u32) -> bool {
    let mut reach = 1u32;
    loop {
        let mut next = reach;
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 && (reach >> u & 1 == 1 || reach >> v & 1 == 1) {
                next |= 1 << u | 1 << v;
            }
        }
        if next == reach {
            return reach.count_ones() as usize == n;
        }
        reach = next;
    }
}

fn permute_mask(mask: u32, perm: &[usize], pairs: &[(usize, usize)], slot: &[Vec<usize>]) -> u32 {
    let mut out = 0;
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if mask >> i & 1 == 1 {
            out |= 1 << slot[perm[u]][perm[v]];
        }
    }
    out
}

/// All connected shapes on exactly `n` nodes, `1 <= n <= MAX_SHAPE_N`.
pub fn connected_shapes(n: usize) -> Vec<Shape> {
    assert!((1..=MAX_SHAPE_N).contains(&n), "shape enumeration supports 1..={MAX_SHAPE_N} nodes");
    if n == 1 {
        return vec![Shape { n, adj: vec![Vec::new()], start_reps: vec![0] }];
    }
    let pairs = pair_index(n);
    let mut slot = vec![vec![0; n]; n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        slot[u][v] = i;
        slot[v][u] = i;
    }
    let perms = permutations(n);
    let mut shapes = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        if !mask_connected(n, &pairs, mask) {
            continue;
        }
        let canonical = perms
            .iter()
            .all(|p| permute_mask(mask, p, &pairs, &slot) >= mask);
        if !canonical {
            continue;
        }
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        // the automorphisms form a group, so {p[x]} is exactly the orbit of x
        let mut orbit_min: Vec<usize> = (0..n).collect();
        for p in &perms {
            if permute_mask(mask, p, &pairs, &slot) == mask {
                for x in 0..n {
                    orbit_min[x] = orbit_min[x].min(p[x]);
                }
            }
        }
        let start_reps: Vec<usize> = (0..n).filter(|&x| orbit_min[x] == x).collect();
        shapes.push(Shape { n, adj, start_reps });
    }
    shapes
}

impl Shape {
    pub fn numbering_count(&self) -> u64 {
        self.adj.iter().map(|row| factorial(row.len())).product()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Shape with the given port numbering, where `perms[u][i]` is the port at
    /// `u` of the edge to `adj[u][i]`.
    pub fn with_ports(&self, perms: &[&[usize]]) -> FlatGraph {
        let mut g = FlatGraph::empty(self.n);
        for u in 0..self.n {
            g.deg[u] = self.adj[u].len() as u8;
            for (i, &w) in self.adj[u].iter().enumerate() {
                let p = perms[u][i];
                let j = self.adj[w].iter().position(|&x| x == u).expect("symmetric adjacency");
                g.nbr[u][p] = w as u8;
                g.back[u][p] = perms[w][j] as u8;
            }
        }
        g
    }

    /// Calls `f` on every port numbering in a fixed order; stops early when
    /// `f` returns `false`.
    pub fn for_each_numbering(&self, mut f: impl FnMut(&FlatGraph) -> bool) -> bool {
        let tables: Vec<Vec<Vec<usize>>> =
            self.adj.iter().map(|row| permutations(row.len())).collect();
        let mut idx = vec![0usize; self.n];
        loop {
            let perms: Vec<&[usize]> =
                (0..self.n).map(|u| tables[u][idx[u]].as_slice()).collect();
            if !f(&self.with_ports(&perms)) {
                return false;
            }
            let mut u = self.n;
            loop {
                if u == 0 {
                    return true;
                }
                u -= 1;
                idx[u] += 1;
                if idx[u] < tables[u].len() {
                    break;
                }
                idx[u] = 0;
            }
        }
    }

    /// A uniformly random port numbering.
    pub fn random_numbering<R: Rng>(&self, rng: &mut R) -> FlatGraph {
        let perms: Vec<Vec<usize>> = self
            .adj
            .iter()
            .map(|row| {
                let mut p: Vec<usize> = (0..row.len()).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        let refs: Vec<&[usize]> = perms.iter().map(Vec::as_slice).collect();
        self.with_ports(&refs)
    }
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Port-numbered graph in fixed-size buffers, for tight enumeration loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FlatGraph {
    pub n: u8,
    pub deg: [u8; MAX_N],
    pub nbr: [[u8; MAX_N]; MAX_N],
    pub back: [[u8; MAX_N]; MAX_N],
}

impl FlatGraph {
    fn empty(n: usize) -> Self {
        assert!(n <= MAX_N);
        FlatGraph { n: n as u8, deg: [0; MAX_N], nbr: [[0; MAX_N]; MAX_N], back: [[0; MAX_N]; MAX_N] }
    }

    pub fn from_port_graph(g: &PortGraph) -> Self {
        let mut f = FlatGraph::empty(g.node_count());
        for u in 0..g.node_count() {
            f.deg[u] = g.degree(u) as u8;
            for (p, l) in g.links(u).iter().enumerate() {
                f.nbr[u][p] = l.node as u8;
                f.back[u][p] = l.back_port as u8;
            }
        }
        f
    }

    pub fn to_port_graph(&self) -> PortGraph {
        let mut edges = Vec::new();
        for u in 0..self.n as usize {
            for p in 0..self.deg[u] as usize {
                let v = self.nbr[u][p] as usize;
                if u < v {
                    edges.push(PortEdge { u, pu: p, v, pv: self.back[u][p] as usize });
                }
            }
        }
        PortGraph::from_edges(self.n as usize, &edges).expect("flat graphs are valid")
    }

    pub fn max_degree(&self) -> usize {
        self.deg[..self.n as usize].iter().copied().max().unwrap_or(0) as usize
    }
}

/// Circulant graph on `n` nodes with connection set `jumps` (each in `1..=n/2`).
pub fn circulant(n: usize, jumps: &[usize]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for &j in jumps {
            for w in [(u + j) % n, (u + n - j) % n] {
                if w != u && !adj[u].contains(&w) {
                    adj[u].push(w);
                }
            }
        }
        adj[u].sort_unstable();
    }
    adj
}

/// Connected circulants on `n` nodes (one per connection set) and, for
/// `n = 8`, the cube. Used as hard instances when numberings are sampled.
pub fn vertex_transitive_shapes(n: usize) -> Vec<Shape> {
    let mut out = Vec::new();
    let half = n / 2;
    for set in 1u32..1 << half {
        let jumps: Vec<usize> = (1..=half).filter(|j| set >> (j - 1) & 1 == 1).collect();
        let adj = circulant(n, &jumps);
        let g = PortGraph::from_plain_edges(
            n,
            &adj.iter()
                .enumerate()
                .flat_map(|(u, row)| row.iter().filter(move |&&w| u < w).map(move |&w| (u, w)))
                .collect::<Vec<_>>(),
        );
        if g.is_ok() {
            out.push(Shape { n, adj, start_reps: vec![0] });
        }
    }
    if n == 8 {
        let adj = (0..8usize)
            .map(|u| {
                let mut row: Vec<usize> = (0..3).map(|b| u ^ (1 << b)).collect();
                row.sort_unstable();
                row
            })
            .collect();
        out.push(Shape { n, adj, start_reps: vec![0] });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_counts_match_known_values() {
        let counts: Vec<usize> = (1..=6).map(|n| connected_shapes(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn numbering_totals() {
        let total = |n| connected_shapes(n).iter().map(Shape::numbering_count).sum::<u64>();
        assert_eq!(total(3), 10);
        assert_eq!(total(4), 1490);
    }

    #[test]
    fn numberings_are_distinct_and_valid() {
        for shape in connected_shapes(4) {
            let mut seen = std::collections::HashSet::new();
            shape.for_each_numbering(|g| {
                let pg = g.to_port_graph();
                assert_eq!(FlatGraph::from_port_graph(&pg), *g);
                assert!(seen.insert(*g));
                true
            });
            assert_eq!(seen.len() as u64, shape.numbering_count());
        }
    }

    #[test]
    fn orbit_representatives() {
        let shapes = connected_shapes(4);
        let reps: Vec<usize> = shapes.iter().map(|s| s.start_reps.len()).collect();
        // path, star, paw, cycle, diamond, complete (in mask order may vary)
        let mut sorted = reps.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn circulants_are_regular() {
        for n in 6..=8 {
            for s in vertex_transitive_shapes(n) {
                let d = s.adj[0].len();
                assert!(s.adj.iter().all(|r| r.len() == d));
            }
        }
    }
}
