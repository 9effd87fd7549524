//! Synchronous two-agent engine.
//!
//! Round `r` reads the configuration left by round `r - 1`, asks each awake
//! agent for an action and applies both at once. An agent that wakes in round
//! `w` makes its first decision in round `w + 1`.

mod scenario;
mod trace;

use serde_json::{json, Value};

use crate::error::ProtocolError;
use crate::graph::{ball, HandleMap, NodeId, Observation, PortGraph};
use crate::protocol::{self, Action, AgentState, ProtocolConfig, ProtocolEvent, Role};

pub use scenario::{run, run_with, time_measure, RunOptions, Scenario, ScenarioFile};
pub use trace::{RoundRecord, Trace, TraceEvent, TraceHeader, TraceSummary};

/// Result of one decision by a [`Program`].
#[derive(Clone, Debug)]
pub struct Step<S> {
    pub state: S,
    pub action: Action,
    pub events: Vec<ProtocolEvent>,
}

/// A deterministic agent algorithm the engine can drive.
pub trait Program {
    type State: Clone + PartialEq + std::fmt::Debug;

    fn initial(&self) -> Self::State;
    fn step(&self, state: Self::State, obs: Observation) -> Result<Step<Self::State>, ProtocolError>;
    fn phase_name(&self, state: &Self::State) -> &'static str;
    fn terminated(&self, state: &Self::State) -> bool;

    fn vision_radius(&self) -> usize {
        2
    }

    /// Local round (exclusive) up to which the agent is known to stay put
    /// silently as long as its view does not change.
    fn idle_until(&self, _state: &Self::State) -> Option<u64> {
        None
    }

    /// Moves the agent's clock forward so that its next decision is local
    /// round `next`; only called within an idle stretch.
    fn skip_to(&self, _state: &mut Self::State, _next: u64) {}

    /// Parameters echoed into the trace header.
    fn describe(&self) -> Value {
        Value::Null
    }
}

impl Program for ProtocolConfig {
    type State = AgentState;

    fn initial(&self) -> AgentState {
        AgentState::new()
    }

    fn step(&self, state: AgentState, obs: Observation) -> Result<Step<AgentState>, ProtocolError> {
        protocol::step(self, state, obs).map(|t| Step { state: t.state, action: t.action, events: t.events })
    }

    fn phase_name(&self, state: &AgentState) -> &'static str {
        state.phase.name()
    }

    fn terminated(&self, state: &AgentState) -> bool {
        state.terminated()
    }

    fn idle_until(&self, state: &AgentState) -> Option<u64> {
        protocol::idle_until(self, state)
    }

    fn skip_to(&self, state: &mut AgentState, next: u64) {
        state.local_round = next - 1;
    }

    fn describe(&self) -> Value {
        json!({
            "n": self.n,
            "walk_len": self.walk_len(),
            "sigma": self.sigma(),
            "progress_bound": self.progress_bound(),
            "k_mode": self.k_mode,
            "mutation": self.mutation,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// Last global round simulated.
    pub max_rounds: u64,
    /// Per-agent handle shuffles; `None` gives node indices as handles.
    pub handle_seeds: Option<[u64; 2]>,
    /// Skip rounds in which nobody can move or report anything.
    pub fast_forward: bool,
    /// Recompute each round with the agents queried in reverse order and
    /// fail loudly if anything differs.
    pub check_order: bool,
}

impl EngineOptions {
    pub fn new(max_rounds: u64) -> Self {
        EngineOptions { max_rounds, handle_seeds: None, fast_forward: true, check_order: false }
    }
}

/// Runs `program` for both agents. Wake rounds are shifted so the earlier one
/// is round 0.
pub fn run_program<P: Program>(
    g: &PortGraph,
    starts: [NodeId; 2],
    wakes: [u64; 2],
    program: &P,
    opts: &EngineOptions,
) -> Trace {
    let n = g.node_count();
    let base = wakes[0].min(wakes[1]);
    let wakes = [wakes[0] - base, wakes[1] - base];
    let radius = program.vision_radius();
    let handles = match opts.handle_seeds {
        None => [HandleMap::identity(n), HandleMap::identity(n)],
        Some([a, b]) => [HandleMap::shuffled(n, a), HandleMap::shuffled(n, b)],
    };
    let views: Vec<Vec<Observation>> =
        handles.iter().map(|h| (0..n).map(|v| ball(g, v, radius, None, h)).collect()).collect();
    let dist: Vec<Vec<usize>> = (0..n).map(|v| g.distances_from(v)).collect();
    let observe = |i: usize, pos: &[NodeId; 2]| {
        let mut obs = views[i][pos[i]].clone();
        let o = pos[1 - i];
        if dist[pos[i]][o] <= radius {
            obs.other = Some(handles[i].handle(o));
        }
        obs
    };

    let mut trace = Trace::new(
        TraceHeader {
            graph: crate::graph::write_graph(g),
            starts,
            wakes,
            max_rounds: opts.max_rounds,
            handle_seeds: opts.handle_seeds,
            program: program.describe(),
        },
        n,
    );
    let mut pos = starts;
    let mut states: [Option<P::State>; 2] = [None, None];
    let mut done = [false; 2];
    for i in 0..2 {
        trace.summary.first_visit[i][starts[i]] = Some(wakes[i]);
    }
    trace.push(RoundRecord {
        round: 0,
        pos: [awake_pos(0, wakes[0], pos[0]), awake_pos(0, wakes[1], pos[1])],
        act: [None, None],
        phase: [dormant_phase(0, wakes[0]), dormant_phase(0, wakes[1])],
        events: Vec::new(),
    });

    let mut r = 0u64;
    while r < opts.max_rounds {
        r += 1;
        let mut steps: [Option<Step<P::State>>; 2] = [None, None];
        let mut before: [Option<P::State>; 2] = [None, None];
        let mut failure = None;
        for i in 0..2 {
            if r <= wakes[i] {
                continue;
            }
            let state = states[i].take().unwrap_or_else(|| program.initial());
            if opts.check_order {
                before[i] = Some(state.clone());
            }
            match program.step(state, observe(i, &pos)) {
                Ok(s) => steps[i] = Some(s),
                Err(e) => {
                    failure = Some((i, e));
                    break;
                }
            }
        }
        if opts.check_order && failure.is_none() {
            for i in (0..2).rev() {
                if let (Some(s), Some(b)) = (&steps[i], before[i].take()) {
                    let again = program.step(b, observe(i, &pos)).expect("replayed decision failed");
                    assert!(
                        again.state == s.state && again.action == s.action && again.events == s.events,
                        "decision of agent {i} in round {r} depends on query order"
                    );
                }
            }
        }
        let mut events = Vec::new();
        if let Some((i, e)) = failure {
            trace.summary.violation = Some(format!("agent {i}, local round {}: {}", e.local_round, e.message));
            events.push(TraceEvent::Violation { agent: i, message: e.message });
            trace.push(RoundRecord {
                round: r,
                pos: [awake_pos(r, wakes[0], pos[0]), awake_pos(r, wakes[1], pos[1])],
                act: [None, None],
                phase: [dormant_phase(r, wakes[0]), dormant_phase(r, wakes[1])],
                events,
            });
            trace.summary.last_round = r;
            return trace;
        }

        let old = pos;
        let mut act = [None, None];
        let mut phase = [dormant_phase(r, wakes[0]), dormant_phase(r, wakes[1])];
        let mut moved = false;
        for i in 0..2 {
            let Some(s) = steps[i].take() else { continue };
            act[i] = Some(s.action);
            if let Action::Move(p) = s.action {
                match g.neighbor_via_port(pos[i], p) {
                    Ok(v) => {
                        pos[i] = v;
                        moved = true;
                    }
                    Err(_) => {
                        trace.summary.violation = Some(format!("agent {i} used missing port {p}"));
                    }
                }
                if done[i] {
                    trace.summary.moved_after_termination = true;
                }
            }
            for e in s.events {
                events.push(TraceEvent::from_protocol(e, i, wakes[i], old[i], pos[i]));
            }
            if program.terminated(&s.state) && !done[i] {
                done[i] = true;
                trace.summary.termination[i] = Some(r);
            }
            phase[i] = program.phase_name(&s.state);
            states[i] = Some(s.state);
        }
        for e in &events {
            if let TraceEvent::ProvisionalStop { agent } = e {
                trace.summary.stop_round[*agent] = Some(r);
            }
        }
        for i in 0..2 {
            if r >= wakes[i] {
                trace.summary.first_visit[i][pos[i]].get_or_insert(r);
            }
        }
        if pos[0] == pos[1] {
            trace.summary.collisions += 1;
            events.push(TraceEvent::Collision { node: pos[0] });
        } else if moved && pos[0] == old[1] && pos[1] == old[0] {
            events.push(TraceEvent::EdgeCrossing { u: old[0], v: old[1] });
        }
        trace.push(RoundRecord {
            round: r,
            pos: [awake_pos(r, wakes[0], pos[0]), awake_pos(r, wakes[1], pos[1])],
            act,
            phase,
            events,
        });
        if trace.summary.violation.is_some() {
            break;
        }
        if done[0] && done[1] {
            break;
        }
        if opts.fast_forward && !moved {
            let next = next_busy_round(program, &states, wakes, r);
            let next = next.min(opts.max_rounds + 1);
            if next > r + 1 {
                for i in 0..2 {
                    if let Some(s) = states[i].as_mut() {
                        program.skip_to(s, next - wakes[i]);
                    }
                }
                r = next - 1;
            }
        }
    }
    trace.summary.last_round = r;
    trace.summary.timed_out = !(done[0] && done[1]);
    trace
}

/// Earliest global round after `r` in which some agent may act or report.
fn next_busy_round<P: Program>(program: &P, states: &[Option<P::State>; 2], wakes: [u64; 2], r: u64) -> u64 {
    let mut next = u64::MAX;
    for i in 0..2 {
        let candidate = match &states[i] {
            None if r < wakes[i] + 1 => wakes[i] + 1,
            None => r + 1,
            Some(s) => match program.idle_until(s) {
                Some(local) => wakes[i].saturating_add(local),
                None => r + 1,
            },
        };
        next = next.min(candidate);
    }
    next.max(r + 1)
}

fn awake_pos(r: u64, wake: u64, at: NodeId) -> Option<NodeId> {
    (r >= wake).then_some(at)
}

fn dormant_phase(r: u64, wake: u64) -> &'static str {
    if r < wake {
        "dormant"
    } else {
        "awake"
    }
}

/// Side of an election as an agent index.
pub(crate) fn leader_index(role: Role, agent: usize) -> usize {
    match role {
        Role::Me => agent,
        Role::Other => 1 - agent,
    }
}
