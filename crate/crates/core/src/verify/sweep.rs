//! Adversarial sweeps over graphs, port numberings, start pairs and wake
//! offsets.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::check::{check_trace, Property};
use crate::error::ScenarioError;
use crate::exploration::ExplorationSequence;
use crate::graph::enumerate::{connected_shapes, MAX_SHAPE_N};
use crate::graph::{parse_graph, write_graph, PortGraph};
use crate::protocol::{compute_sigma, KMode, Mutation};
use crate::sim::{run_with, RunOptions, Scenario, ScenarioFile, Trace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GraphMode {
    /// Every connected graph on 3 to `n` nodes with every port numbering, and
    /// every ordered start pair.
    Exhaustive,
    /// Random connected graphs on exactly `n` nodes with random numberings,
    /// start pairs, offsets and node handles.
    Sampled { seed: u64, scenarios: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub n: usize,
    pub mode: GraphMode,
    /// Wake delay of the second agent; ordered start pairs cover the mirror
    /// image.
    pub offsets: Vec<u64>,
    pub sequence: ExplorationSequence,
    pub k_mode: KMode,
    pub mutation: Option<Mutation>,
    pub properties: Vec<Property>,
    pub stop_at_first_failure: bool,
    /// Scenario budget; the report is flagged partial when it is hit.
    pub max_scenarios: Option<u64>,
}

/// `{0..8} ∪ {Σ-1, Σ, Σ+1}`.
pub fn default_offsets(sigma: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (0..=8).collect();
    for x in [sigma.saturating_sub(1), sigma, sigma + 1] {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

impl SweepSpec {
    pub fn exhaustive(n: usize, sequence: ExplorationSequence) -> Self {
        let sigma = compute_sigma(sequence.len(), sequence.certified_n);
        SweepSpec {
            n,
            mode: GraphMode::Exhaustive,
            offsets: default_offsets(sigma),
            sequence,
            k_mode: KMode::Uniform,
            mutation: None,
            properties: Property::ALL.to_vec(),
            stop_at_first_failure: false,
            max_scenarios: None,
        }
    }

    pub fn sampled(n: usize, sequence: ExplorationSequence, seed: u64, scenarios: u64) -> Self {
        SweepSpec { mode: GraphMode::Sampled { seed, scenarios }, ..SweepSpec::exhaustive(n, sequence) }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.n < 3 {
            return Err(ScenarioError::TooSmall);
        }
        if self.n > self.sequence.certified_n {
            return Err(ScenarioError::SequenceTooWeak { nodes: self.n, certified: self.sequence.certified_n });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyTally {
    pub property: Property,
    pub passed: u64,
    pub failed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStats {
    /// Largest time measure over terminated runs.
    pub max_time: u64,
    pub max_approaches: usize,
    pub max_progress_rounds: u64,
}

/// A failing scenario, stored so it can be replayed on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub property: Property,
    pub message: String,
    /// Position of the scenario in enumeration order.
    pub index: u64,
    /// The graph in the text file format.
    pub graph: String,
    pub scenario: ScenarioFile,
}

impl FailureRecord {
    pub fn to_scenario(&self) -> Scenario {
        let g = parse_graph(&self.graph).expect("stored graphs parse");
        Scenario::from_parts(g, self.scenario.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub n: usize,
    pub mode: GraphMode,
    pub offsets: Vec<u64>,
    pub walk_len: usize,
    pub sigma: u64,
    pub k_mode: KMode,
    pub mutation: Option<Mutation>,
    pub scenarios: u64,
    /// Distinct port-numbered graphs visited.
    pub graphs: u64,
    pub failed_scenarios: u64,
    /// True when the budget or the first failure cut the sweep short.
    pub partial: bool,
    pub properties: Vec<PropertyTally>,
    pub stats: SweepStats,
    pub first_failure: Option<FailureRecord>,
    /// SHA-256 over the digests of all traces, in enumeration order.
    pub trace_digest: String,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failed_scenarios == 0 && !self.partial
    }

    pub fn failed_properties(&self) -> Vec<Property> {
        self.properties.iter().filter(|t| t.failed > 0).map(|t| t.property).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mode = match &self.mode {
            GraphMode::Exhaustive => format!("exhaustive, 3..={} nodes", self.n),
            GraphMode::Sampled { seed, scenarios } => format!("sampled, {} nodes, {scenarios} scenarios, seed {seed}", self.n),
        };
        let _ = writeln!(out, "sweep: {mode}");
        let _ = writeln!(out, "walk length {}, sigma {}, k mode {:?}", self.walk_len, self.sigma, self.k_mode);
        if let Some(m) = self.mutation {
            let _ = writeln!(out, "mutation: {}", m.name());
        }
        let _ = writeln!(out, "offsets: {:?}", self.offsets);
        let _ = writeln!(
            out,
            "scenarios: {} over {} graphs, {} failed{}",
            self.scenarios,
            self.graphs,
            self.failed_scenarios,
            if self.partial { " (partial)" } else { "" }
        );
        for t in &self.properties {
            let _ = writeln!(out, "  {:<24} pass {:>8}  fail {:>8}", t.property.name(), t.passed, t.failed);
        }
        let _ = writeln!(
            out,
            "max time {}, max approaches {}, max Progress rounds {}",
            self.stats.max_time, self.stats.max_approaches, self.stats.max_progress_rounds
        );
        if let Some(f) = &self.first_failure {
            let _ = writeln!(out, "first failure (#{}): {}: {}", f.index, f.property.name(), f.message);
            let _ = writeln!(out, "  starts {:?}, wakes {:?}", f.scenario.starts, f.scenario.wakes);
        }
        let _ = writeln!(out, "trace digest {}", self.trace_digest);
        out
    }
}

/// Scenario stream in enumeration order. Returns false if `f` asked to stop.
fn for_each_scenario(spec: &SweepSpec, mut f: impl FnMut(Scenario, bool) -> bool) -> bool {
    let base = |g: PortGraph, starts: [usize; 2], offset: u64| Scenario {
        graph: g,
        starts,
        wakes: [0, offset],
        sequence: spec.sequence.clone(),
        k_mode: spec.k_mode,
        mutation: spec.mutation,
        max_rounds: None,
        handle_seeds: None,
    };
    match spec.mode {
        GraphMode::Exhaustive => {
            for m in 3..=spec.n {
                for shape in connected_shapes(m) {
                    let go_on = shape.for_each_numbering(|fg| {
                        let g = fg.to_port_graph();
                        let mut fresh = true;
                        for a in 0..m {
                            for b in (0..m).filter(|&b| b != a) {
                                for &off in &spec.offsets {
                                    if !f(base(g.clone(), [a, b], off), fresh) {
                                        return false;
                                    }
                                    fresh = false;
                                }
                            }
                        }
                        true
                    });
                    if !go_on {
                        return false;
                    }
                }
            }
        }
        GraphMode::Sampled { seed, scenarios } => {
            let n = spec.n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shapes = if n <= MAX_SHAPE_N { connected_shapes(n) } else { Vec::new() };
            for _ in 0..scenarios {
                let g = if shapes.is_empty() {
                    PortGraph::random_with(n, &mut rng).expect("random graphs are valid").shuffle_ports(&mut rng)
                } else {
                    shapes[rng.gen_range(0..shapes.len())].random_numbering(&mut rng).to_port_graph()
                };
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let off = spec.offsets[rng.gen_range(0..spec.offsets.len())];
                let mut s = base(g, [a, b], off);
                s.handle_seeds = Some([rng.gen(), rng.gen()]);
                if !f(s, true) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn sweep(spec: &SweepSpec) -> Result<PropertyReport, ScenarioError> {
    sweep_with(spec, |_, _| {})
}

/// Runs the sweep, handing every scenario and its trace to `observe`.
pub fn sweep_with(
    spec: &SweepSpec,
    mut observe: impl FnMut(&Scenario, &Trace),
) -> Result<PropertyReport, ScenarioError> {
    spec.validate()?;
    let mut tallies: Vec<PropertyTally> =
        spec.properties.iter().map(|&p| PropertyTally { property: p, passed: 0, failed: 0 }).collect();
    let mut stats = SweepStats::default();
    let mut first_failure = None;
    let (mut scenarios, mut graphs, mut failed) = (0u64, 0u64, 0u64);
    let mut digest = Sha256::new();
    let mut error = None;
    let mut partial = false;
    let opts = RunOptions { fast_forward: true, check_order: false };
    for_each_scenario(spec, |s, fresh_graph| {
        if spec.max_scenarios.is_some_and(|m| scenarios >= m) {
            partial = true;
            return false;
        }
        let trace = match run_with(&s, opts) {
            Ok(t) => t,
            Err(e) => {
                error = Some(e);
                return false;
            }
        };
        observe(&s, &trace);
        digest.update(trace.digest());
        let outcome = check_trace(&trace, &s);
        if let Some(t) = outcome.stats.time {
            stats.max_time = stats.max_time.max(t);
        }
        stats.max_approaches = stats.max_approaches.max(outcome.stats.approaches);
        stats.max_progress_rounds = stats.max_progress_rounds.max(outcome.stats.max_progress_rounds);
        let mut bad = None;
        for tally in tallies.iter_mut() {
            let (_, r) = outcome.results.iter().find(|(p, _)| *p == tally.property).expect("every property is checked");
            match r {
                Ok(()) => tally.passed += 1,
                Err(msg) => {
                    tally.failed += 1;
                    bad.get_or_insert((tally.property, msg.clone()));
                }
            }
        }
        if let Some((property, message)) = bad {
            failed += 1;
            if first_failure.is_none() {
                first_failure = Some(FailureRecord {
                    property,
                    message,
                    index: scenarios,
                    graph: write_graph(&s.graph),
                    scenario: s.sidecar(),
                });
            }
        }
        scenarios += 1;
        graphs += fresh_graph as u64;
        if failed > 0 && spec.stop_at_first_failure {
            partial = true;
            return false;
        }
        true
    });
    if let Some(e) = error {
        return Err(e);
    }
    let digest: [u8; 32] = digest.finalize().into();
    Ok(PropertyReport {
        n: spec.n,
        mode: spec.mode.clone(),
        offsets: spec.offsets.clone(),
        walk_len: spec.sequence.len(),
        sigma: compute_sigma(spec.sequence.len(), spec.sequence.certified_n),
        k_mode: spec.k_mode,
        mutation: spec.mutation,
        scenarios,
        graphs,
        failed_scenarios: failed,
        partial,
        properties: tallies,
        stats,
        first_failure,
        trace_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

/// Replays a stored failure and returns the properties it still violates.
pub fn replay(failure: &FailureRecord) -> Result<Vec<Property>, ScenarioError> {
    let s = failure.to_scenario();
    let trace = run_with(&s, RunOptions { fast_forward: true, check_order: false })?;
    let outcome = check_trace(&trace, &s);
    Ok(outcome.results.into_iter().filter(|(_, r)| r.is_err()).map(|(p, _)| p).collect())
}
