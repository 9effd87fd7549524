//! Exploration walks driven by an integer sequence, and sequences certified to
//! explore every small graph.
//!
//! Step 1 of a walk leaves the start by port 0. Every later step exits by
//! `(entry + x_i) mod d`, where `entry` is the port by which the current node
//! was entered. A sequence of length `L` drives walks of `L` steps, so its last
//! term is never consumed.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ExplorationError;
use crate::graph::enumerate::{connected_shapes, vertex_transitive_shapes, FlatGraph, MAX_N};
use crate::graph::{NodeId, Port, PortGraph};

/// Node counts up to this value are certified over every port numbering.
pub const EXHAUSTIVE_MAX_N: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certification {
    Exhaustive,
    Sampled { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationSequence {
    pub terms: Vec<usize>,
    pub certified_n: usize,
    pub certification: Certification,
}

impl ExplorationSequence {
    /// Number of walk steps, the bound `R(n)` used downstream.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.certified_n, self.terms.len());
        let terms: Vec<String> = self.terms.iter().map(usize::to_string).collect();
        out.push_str(&terms.join(" "));
        out.push('\n');
        match self.certification {
            Certification::Exhaustive => out.push_str("certified exhaustive\n"),
            Certification::Sampled { seed } => {
                let _ = writeln!(out, "certified sampled seed={seed}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ExplorationError> {
        let err = |line, message: String| ExplorationError::Parse { line, message };
        let lines: Vec<&str> = text.lines().collect();
        let header: Vec<&str> = lines.first().map(|l| l.split_whitespace().collect()).unwrap_or_default();
        if header.len() != 2 {
            return Err(err(1, "expected header `n L`".into()));
        }
        let num = |s: &str, line| {
            s.parse::<usize>()
                .map_err(|_| err(line, format!("not a non-negative integer: {s:?}")))
        };
        let n = num(header[0], 1)?;
        let len = num(header[1], 1)?;
        let terms: Vec<usize> = lines
            .get(1)
            .copied()
            .unwrap_or("")
            .split_whitespace()
            .map(|s| num(s, 2))
            .collect::<Result<_, _>>()?;
        if terms.len() != len {
            return Err(err(2, format!("expected {len} terms, found {}", terms.len())));
        }
        let status = lines.get(2).map(|l| l.trim()).unwrap_or("");
        let certification = if status == "certified exhaustive" {
            Certification::Exhaustive
        } else if let Some(seed) = status.strip_prefix("certified sampled seed=") {
            Certification::Sampled {
                seed: seed.parse().map_err(|_| err(3, format!("bad seed {seed:?}")))?,
            }
        } else {
            return Err(err(3, "expected `certified exhaustive` or `certified sampled seed=<s>`".into()));
        };
        if let Some((i, _)) = lines.iter().enumerate().skip(3).find(|(_, l)| !l.trim().is_empty()) {
            return Err(err(i + 1, "unexpected content".into()));
        }
        Ok(ExplorationSequence { terms, certified_n: n, certification })
    }
}

/// Exit port for the next step: port 0 on the first step, otherwise
/// `(entry + term) mod degree`.
pub fn exp_next_port(entry: Option<Port>, term: usize, degree: usize) -> Result<Port, ExplorationError> {
    if degree == 0 {
        return Err(ExplorationError::ZeroDegree);
    }
    match entry {
        None => Ok(0),
        Some(p) if p >= degree => Err(ExplorationError::EntryPortOutOfRange { port: p, degree }),
        Some(p) => Ok((p + term) % degree),
    }
}

/// Port used by step `index` (0-based) of a walk driven by `terms`.
pub fn walk_port(terms: &[usize], index: usize, entry: Option<Port>, degree: usize) -> Result<Port, ExplorationError> {
    if index == 0 {
        exp_next_port(None, 0, degree)
    } else {
        exp_next_port(entry, terms[index - 1], degree)
    }
}

/// Nodes of the walk from `start`, the start included: `terms.len() + 1`
/// entries, or just `[start]` on a single-node graph.
pub fn walk_trace(g: &PortGraph, start: NodeId, terms: &[usize]) -> Vec<NodeId> {
    let mut out = vec![start];
    if g.degree(start) == 0 {
        return out;
    }
    let (mut node, mut entry) = (start, None);
    for i in 0..terms.len() {
        let p = walk_port(terms, i, entry, g.degree(node)).expect("walk stays on valid ports");
        let l = g.links(node)[p];
        node = l.node;
        entry = Some(l.back_port);
        out.push(node);
    }
    out
}

/// Position of a walk on a flat graph.
#[derive(Clone, Copy, Debug)]
struct Cursor {
    node: u8,
    entry: u8,
    steps: u32,
    visited: u16,
}

impl Cursor {
    fn start(start: u8) -> Self {
        Cursor { node: start, entry: 0, steps: 0, visited: 1 << start }
    }

    #[inline]
    fn step(&mut self, g: &FlatGraph, term: usize) {
        let d = g.deg[self.node as usize] as usize;
        let p = if self.steps == 0 { 0 } else { (self.entry as usize + term) % d };
        let next = g.nbr[self.node as usize][p];
        self.entry = g.back[self.node as usize][p];
        self.node = next;
        self.steps += 1;
        self.visited |= 1 << next;
    }
}

fn full_mask(g: &FlatGraph) -> u16 {
    ((1u32 << g.n) - 1) as u16
}

/// Runs the walk from `start` for at most `terms.len()` steps. Returns the
/// number of steps to visit every node, or the smallest unvisited node.
pub fn cover_time(g: &FlatGraph, start: usize, terms: &[usize]) -> Result<usize, NodeId> {
    let full = full_mask(g);
    let mut c = Cursor::start(start as u8);
    if c.visited == full {
        return Ok(0);
    }
    for i in 0..terms.len() {
        let term = if i == 0 { 0 } else { terms[i - 1] };
        c.step(g, term);
        if c.visited == full {
            return Ok(i + 1);
        }
    }
    Err((!c.visited).trailing_zeros() as NodeId)
}

/// How port numberings of graphs above [`EXHAUSTIVE_MAX_N`] nodes are sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub seed: u64,
    /// Random numberings per shape (six nodes) or per vertex-transitive shape.
    pub per_shape: usize,
    /// Random graphs per node count above six.
    pub random_graphs: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { seed: 1, per_shape: 300, random_graphs: 20_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Maximum number of (graph, start) instances to examine.
    pub budget: u64,
    pub sample: SampleSpec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { budget: 100_000_000, sample: SampleSpec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub graph: PortGraph,
    pub start: NodeId,
    pub unvisited: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified {
        certification: Certification,
        instances: u64,
        /// Largest number of steps any instance needed to visit every node.
        max_cover: usize,
    },
    Counterexample(Counterexample),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified { .. })
    }
}

fn check_bound(n: usize) -> Result<(), ExplorationError> {
    if n < 2 {
        return Err(ExplorationError::BoundTooSmall(n));
    }
    if n > MAX_N {
        return Err(ExplorationError::BoundTooLarge(n));
    }
    Ok(())
}

/// Number of instances an exhaustive pass over graphs of at most `n` nodes
/// would examine (sampled sizes counted by their sample sizes).
pub fn instance_count(n: usize, sample: &SampleSpec) -> u64 {
    let mut total = 0u64;
    for m in 2..=n {
        if m <= EXHAUSTIVE_MAX_N {
            for s in connected_shapes(m) {
                total += s.numbering_count() * s.start_reps.len() as u64;
            }
        } else {
            total += sampled_graph_count(m, sample) as u64 * m as u64;
        }
    }
    total
}

fn sampled_graph_count(m: usize, sample: &SampleSpec) -> usize {
    let vt = vertex_transitive_shapes(m).len() * sample.per_shape;
    if m == 6 {
        connected_shapes(6).len() * sample.per_shape + vt
    } else {
        sample.random_graphs + vt
    }
}

/// Visits every instance in a fixed order until `f` returns `false`.
///
/// Sizes up to [`EXHAUSTIVE_MAX_N`] iterate every shape, every numbering and
/// one start per automorphism orbit of the shape: any other start is mapped
/// to its representative by an automorphism, which carries the numbering to
/// another numbering of the same shape that is itself enumerated. Larger
/// sizes draw numberings from a seeded generator and try every start.
pub fn for_each_instance(n: usize, sample: &SampleSpec, mut f: impl FnMut(&FlatGraph, usize) -> bool) -> bool {
    for m in 2..=n {
        if m <= EXHAUSTIVE_MAX_N {
            for shape in connected_shapes(m) {
                let reps = shape.start_reps.clone();
                let go_on = shape.for_each_numbering(|g| reps.iter().all(|&s| f(g, s)));
                if !go_on {
                    return false;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(sample.seed ^ (m as u64) << 32);
            let mut graphs: Vec<FlatGraph> = Vec::new();
            let mut shapes = vertex_transitive_shapes(m);
            if m == 6 {
                shapes.extend(connected_shapes(6));
            }
            for s in &shapes {
                for _ in 0..sample.per_shape {
                    graphs.push(s.random_numbering(&mut rng));
                }
            }
            if m > 6 {
                for _ in 0..sample.random_graphs {
                    let g = PortGraph::random_with(m, &mut rng).expect("random graphs are valid");
                    graphs.push(FlatGraph::from_port_graph(&g.shuffle_ports(&mut rng)));
                }
            }
            for g in &graphs {
                for s in 0..m {
                    if !f(g, s) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Checks that walks driven by `terms` (with `terms.len()` steps) visit every
/// node of every graph with at most `n` nodes, from every start.
pub fn verify_sequence(terms: &[usize], n: usize, opts: &VerifyOptions) -> Result<Verdict, ExplorationError> {
    check_bound(n)?;
    let instances = instance_count(n, &opts.sample);
    if instances > opts.budget {
        return Err(ExplorationError::ScaleExceeded { instances, budget: opts.budget });
    }
    let mut failure = None;
    let mut max_cover = 0;
    for_each_instance(n, &opts.sample, |g, s| match cover_time(g, s, terms) {
        Ok(t) => {
            max_cover = max_cover.max(t);
            true
        }
        Err(unvisited) => {
            failure = Some(Counterexample { graph: g.to_port_graph(), start: s, unvisited });
            false
        }
    });
    Ok(match failure {
        Some(c) => Verdict::Counterexample(c),
        None => Verdict::Certified { certification: certification_for(n, &opts.sample), instances, max_cover },
    })
}

fn certification_for(n: usize, sample: &SampleSpec) -> Certification {
    if n <= EXHAUSTIVE_MAX_N {
        Certification::Exhaustive
    } else {
        Certification::Sampled { seed: sample.seed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerateOptions {
    /// Longest sequence the search may build.
    pub max_len: usize,
    /// Failing instances carried into each refinement round.
    pub work_cap: usize,
    pub verify: VerifyOptions,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { max_len: 20_000, work_cap: 40_000, verify: VerifyOptions::default() }
    }
}

#[derive(Clone, Copy)]
struct WorkItem {
    g: FlatGraph,
    cursor: Cursor,
    full: u16,
}

impl WorkItem {
    fn done(&self) -> bool {
        self.cursor.visited == self.full
    }
}

/// Score of applying `terms` to every unfinished item: (items finished, new
/// nodes visited).
fn score(work: &[WorkItem], terms: &[usize]) -> (usize, usize) {
    let (mut finished, mut fresh) = (0, 0);
    for w in work.iter().filter(|w| !w.done()) {
        let mut c = w.cursor;
        for &t in terms {
            c.step(&w.g, t);
        }
        if c.visited == w.full {
            finished += 1;
        }
        fresh += (c.visited & !w.cursor.visited).count_ones() as usize;
    }
    (finished, fresh)
}

fn choose_term(work: &[WorkItem], alphabet: usize) -> Option<usize> {
    for depth in 1..=4usize {
        let mut best: Option<((usize, usize), usize)> = None;
        let total = alphabet.pow(depth as u32);
        for code in 0..total {
            let mut terms = vec![0; depth];
            let mut c = code;
            for slot in terms.iter_mut().rev() {
                *slot = c % alphabet;
                c /= alphabet;
            }
            let s = score(work, &terms);
            if s > (0, 0) && best.is_none_or(|(b, _)| s > b) {
                best = Some((s, terms[0]));
            }
        }
        if let Some((_, t)) = best {
            return Some(t);
        }
    }
    None
}

/// Builds a certified sequence by counterexample-guided greedy search.
///
/// Each round verifies the current sequence, keeps a seeded sample of the
/// failing instances, and appends terms (binary first, wider alphabets on a
/// plateau) until every kept instance is explored. Appending never uncovers
/// an instance, so the loop ends once verification succeeds.
pub fn generate_sequence(n: usize, opts: &GenerateOptions) -> Result<ExplorationSequence, ExplorationError> {
    check_bound(n)?;
    let instances = instance_count(n, &opts.verify.sample);
    if instances > opts.verify.budget {
        return Err(ExplorationError::ScaleExceeded { instances, budget: opts.verify.budget });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ n as u64);
    let mut built: Vec<usize> = Vec::new();
    loop {
        let mut seq = built.clone();
        seq.push(0);
        let mut kept: Vec<WorkItem> = Vec::new();
        let mut failing = 0usize;
        for_each_instance(n, &opts.verify.sample, |g, s| {
            if cover_time(g, s, &seq).is_ok() {
                return true;
            }
            failing += 1;
            let mut cursor = Cursor::start(s as u8);
            for i in 0..seq.len() {
                cursor.step(g, if i == 0 { 0 } else { seq[i - 1] });
            }
            let item = WorkItem { g: *g, cursor, full: full_mask(g) };
            if kept.len() < opts.work_cap {
                kept.push(item);
            } else {
                let j = rng.gen_range(0..failing);
                if j < opts.work_cap {
                    kept[j] = item;
                }
            }
            true
        });
        if failing == 0 {
            return Ok(ExplorationSequence {
                terms: seq,
                certified_n: n,
                certification: certification_for(n, &opts.verify.sample),
            });
        }
        let widest = kept.iter().map(|w| w.g.max_degree()).max().unwrap_or(2).max(2);
        while kept.iter().any(|w| !w.done()) {
            if built.len() + 1 >= opts.max_len {
                return Err(ExplorationError::BudgetExhausted { length: built.len() + 1 });
            }
            let term = choose_term(&kept, 2)
                .or_else(|| choose_term(&kept, widest))
                .unwrap_or(built.len() % widest);
            for w in kept.iter_mut().filter(|w| !w.done()) {
                w.cursor.step(&w.g, term);
            }
            built.push(term);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_port_examples() {
        assert_eq!(exp_next_port(Some(1), 2, 3), Ok(0));
        assert_eq!(exp_next_port(Some(0), 0, 5), Ok(0));
        assert_eq!(exp_next_port(Some(4), 7, 5), Ok(1));
        assert_eq!(exp_next_port(None, 9, 4), Ok(0));
        assert_eq!(exp_next_port(Some(0), 1, 0), Err(ExplorationError::ZeroDegree));
    }

    #[test]
    fn walk_trace_examples() {
        let k2 = PortGraph::path(2).unwrap();
        assert_eq!(walk_trace(&k2, 0, &[0]), vec![0, 1]);
        assert_eq!(walk_trace(&k2, 1, &[5]), vec![1, 0]);
        assert_eq!(walk_trace(&k2, 1, &[]), vec![1]);
        let tri = PortGraph::ring(3).unwrap();
        // port 0 is clockwise; entering by port 1 and adding 0 leaves by port 1
        assert_eq!(walk_trace(&tri, 0, &[0, 0, 0]), vec![0, 1, 0, 1]);
        assert_eq!(walk_trace(&tri, 0, &[1, 1, 1]), vec![0, 1, 2, 0]);
    }

    #[test]
    fn trace_matches_flat_walk() {
        let terms = [1, 0, 1, 1, 0, 2, 1, 0];
        for seed in 0..30 {
            let g = PortGraph::random(6, seed).unwrap();
            let f = FlatGraph::from_port_graph(&g);
            for s in 0..6 {
                let trace = walk_trace(&g, s, &terms);
                let mut seen = [false; 6];
                let mut first_full = None;
                for (i, &x) in trace.iter().enumerate() {
                    seen[x] = true;
                    if first_full.is_none() && seen.iter().all(|&b| b) {
                        first_full = Some(i);
                    }
                }
                match cover_time(&f, s, &terms) {
                    Ok(t) => assert_eq!(Some(t), first_full),
                    Err(u) => {
                        assert!(first_full.is_none());
                        assert!(!seen[u]);
                    }
                }
            }
        }
    }

    #[test]
    fn verify_examples() {
        let opts = VerifyOptions::default();
        assert!(verify_sequence(&[0], 2, &opts).unwrap().is_certified());
        match verify_sequence(&[0], 3, &opts).unwrap() {
            Verdict::Counterexample(c) => {
                assert_eq!(c.graph.node_count(), 3);
                assert_eq!(c.graph.degree(c.start), 2);
            }
            v => panic!("expected a counterexample, got {v:?}"),
        }
        assert_eq!(verify_sequence(&[0], 1, &opts), Err(ExplorationError::BoundTooSmall(1)));
        let tight = VerifyOptions { budget: 10, ..opts };
        assert!(matches!(
            verify_sequence(&[0], 4, &tight),
            Err(ExplorationError::ScaleExceeded { .. })
        ));
    }

    #[test]
    fn generated_sequences_are_certified_and_deterministic() {
        let opts = GenerateOptions::default();
        let two = generate_sequence(2, &opts).unwrap();
        assert_eq!(two.terms, vec![0]);
        let four = generate_sequence(4, &opts).unwrap();
        assert_eq!(four, generate_sequence(4, &opts).unwrap());
        for m in 2..=4 {
            assert!(verify_sequence(&four.terms, m, &opts.verify).unwrap().is_certified());
        }
    }

    #[test]
    fn file_round_trip() {
        let s = ExplorationSequence {
            terms: vec![1, 0, 1, 0],
            certified_n: 3,
            certification: Certification::Sampled { seed: 9 },
        };
        assert_eq!(ExplorationSequence::parse(&s.to_text()).unwrap(), s);
        let err = ExplorationSequence::parse("3 2\n1 x\ncertified exhaustive\n").unwrap_err();
        assert!(matches!(err, ExplorationError::Parse { line: 2, .. }));
        let err = ExplorationSequence::parse("3 2\n1 0\nmaybe\n").unwrap_err();
        assert!(matches!(err, ExplorationError::Parse { line: 3, .. }));
    }
}
