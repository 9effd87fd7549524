use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{run_program, EngineOptions, Trace};
use crate::error::ScenarioError;
use crate::exploration::ExplorationSequence;
use crate::graph::{parse_graph, write_graph, NodeId, PortGraph};
use crate::protocol::{KMode, Mutation, ProtocolConfig};

/// One protocol run: graph, adversary choices and the agents' shared knowledge.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub graph: PortGraph,
    pub starts: [NodeId; 2],
    /// Wake rounds; only their difference matters.
    pub wakes: [u64; 2],
    pub sequence: ExplorationSequence,
    pub k_mode: KMode,
    pub mutation: Option<Mutation>,
    /// Defaults to the later wake plus `3 * sigma + 64`.
    pub max_rounds: Option<u64>,
    pub handle_seeds: Option<[u64; 2]>,
}

/// Everything in a [`Scenario`] except the graph, which lives in its own file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub starts: [NodeId; 2],
    pub wakes: [u64; 2],
    pub sequence: ExplorationSequence,
    pub k_mode: KMode,
    #[serde(default)]
    pub mutation: Option<Mutation>,
    #[serde(default)]
    pub max_rounds: Option<u64>,
    #[serde(default)]
    pub handle_seeds: Option<[u64; 2]>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub fast_forward: bool,
    pub check_order: bool,
}

impl Scenario {
    pub fn new(graph: PortGraph, starts: [NodeId; 2], wakes: [u64; 2], sequence: ExplorationSequence) -> Self {
        Scenario {
            graph,
            starts,
            wakes,
            sequence,
            k_mode: KMode::Uniform,
            mutation: None,
            max_rounds: None,
            handle_seeds: None,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.graph.node_count();
        if n < 3 {
            return Err(ScenarioError::TooSmall);
        }
        for &s in &self.starts {
            if s >= n {
                return Err(ScenarioError::StartOutOfRange(s));
            }
        }
        if self.starts[0] == self.starts[1] {
            return Err(ScenarioError::SameStart);
        }
        if n > self.sequence.certified_n {
            return Err(ScenarioError::SequenceTooWeak { nodes: n, certified: self.sequence.certified_n });
        }
        Ok(())
    }

    pub fn config(&self) -> ProtocolConfig {
        ProtocolConfig {
            n: self.sequence.certified_n,
            terms: self.sequence.terms.clone(),
            k_mode: self.k_mode,
            mutation: self.mutation,
        }
    }

    pub fn effective_max_rounds(&self) -> u64 {
        self.max_rounds.unwrap_or_else(|| {
            let offset = self.wakes[0].abs_diff(self.wakes[1]);
            offset + 3 * self.config().sigma() + 64
        })
    }

    pub fn sidecar(&self) -> ScenarioFile {
        ScenarioFile {
            starts: self.starts,
            wakes: self.wakes,
            sequence: self.sequence.clone(),
            k_mode: self.k_mode,
            mutation: self.mutation,
            max_rounds: self.max_rounds,
            handle_seeds: self.handle_seeds,
        }
    }

    pub fn from_parts(graph: PortGraph, f: ScenarioFile) -> Self {
        Scenario {
            graph,
            starts: f.starts,
            wakes: f.wakes,
            sequence: f.sequence,
            k_mode: f.k_mode,
            mutation: f.mutation,
            max_rounds: f.max_rounds,
            handle_seeds: f.handle_seeds,
        }
    }

    /// Writes `<stem>.graph` and `<stem>.scenario.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), ScenarioError> {
        fs::create_dir_all(dir)?;
        let graph_path = dir.join(format!("{stem}.graph"));
        let side_path = dir.join(format!("{stem}.scenario.json"));
        fs::write(&graph_path, write_graph(&self.graph))?;
        let mut json = serde_json::to_string_pretty(&self.sidecar())?;
        json.push('\n');
        fs::write(&side_path, json)?;
        Ok((graph_path, side_path))
    }

    pub fn load(graph_path: &Path, sidecar_path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(graph_path)?;
        let graph = parse_graph(&text)?;
        let f: ScenarioFile = serde_json::from_str(&fs::read_to_string(sidecar_path)?)?;
        Ok(Scenario::from_parts(graph, f))
    }
}

pub fn run(scenario: &Scenario) -> Result<Trace, ScenarioError> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, opts: RunOptions) -> Result<Trace, ScenarioError> {
    scenario.validate()?;
    let cfg = scenario.config();
    let engine = EngineOptions {
        max_rounds: scenario.effective_max_rounds(),
        handle_seeds: scenario.handle_seeds,
        fast_forward: opts.fast_forward,
        check_order: opts.check_order,
    };
    Ok(run_program(&scenario.graph, scenario.starts, scenario.wakes, &cfg, &engine))
}

/// Rounds from the later wake-up to the later termination.
pub fn time_measure(trace: &Trace) -> Result<u64, ScenarioError> {
    let [a, b] = trace.summary.termination;
    let (Some(a), Some(b)) = (a, b) else {
        return Err(ScenarioError::NotTerminated);
    };
    let wake = trace.header.wakes[0].max(trace.header.wakes[1]);
    Ok(a.max(b) - wake)
}
