//! Adversaries that defeat simple strategies outside the supported model:
//! the two-node graph, vision of radius 1, and stopping without a size bound.

use serde_json::{json, Value};

use crate::error::{GraphError, ProtocolError};
use crate::graph::{NodeId, Observation, PortGraph};
use crate::protocol::Action;
use crate::sim::{run_program, EngineOptions, Program, Step, Trace};

/// A run that ended with both agents on one node.
#[derive(Clone, Debug)]
pub struct CollisionWitness {
    pub graph: PortGraph,
    pub starts: [NodeId; 2],
    pub wakes: [u64; 2],
    pub trace: Trace,
    /// First collision as `(round, node)`.
    pub collision: Option<(u64, NodeId)>,
}

/// A stop-after-`j` run on a ring too large for `j` moves.
#[derive(Clone, Debug)]
pub struct CoverageWitness {
    pub graph: PortGraph,
    pub starts: [NodeId; 2],
    pub trace: Trace,
    /// Nodes each agent visited in `trace`.
    pub visited: [usize; 2],
    /// Number of action sequences of length `j` that were tried.
    pub strategies_checked: u64,
    /// Most nodes any of those sequences visits.
    pub best_coverage: usize,
}

impl CoverageWitness {
    pub fn incomplete(&self) -> bool {
        let n = self.graph.node_count();
        self.best_coverage < n && self.visited.iter().all(|&v| v < n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Countdown {
    local: u64,
    done: bool,
}

/// Waits `x` rounds after waking, leaves by port 0, then stops.
#[derive(Clone, Copy, Debug)]
pub struct WaitThenMove {
    pub x: u64,
}

impl Program for WaitThenMove {
    type State = Countdown;

    fn initial(&self) -> Countdown {
        Countdown { local: 0, done: false }
    }

    fn step(&self, mut s: Countdown, _obs: Observation) -> Result<Step<Countdown>, ProtocolError> {
        s.local += 1;
        let action = if !s.done && s.local > self.x {
            s.done = true;
            Action::Move(0)
        } else {
            Action::Stay
        };
        Ok(Step { state: s, action, events: Vec::new() })
    }

    fn phase_name(&self, s: &Countdown) -> &'static str {
        if s.done {
            "done"
        } else {
            "waiting"
        }
    }

    fn terminated(&self, s: &Countdown) -> bool {
        s.done
    }

    fn describe(&self) -> Value {
        json!({ "strategy": "wait-then-move", "x": self.x })
    }
}

/// Radius-1 leaf strategy: at the leaf reached by centre port `i`, wait
/// `waits[i]` rounds and move to the centre unless someone shows up there.
#[derive(Clone, Debug)]
pub struct LeafWait {
    pub waits: Vec<u64>,
}

impl Program for LeafWait {
    type State = Countdown;

    fn initial(&self) -> Countdown {
        Countdown { local: 0, done: false }
    }

    fn step(&self, mut s: Countdown, obs: Observation) -> Result<Step<Countdown>, ProtocolError> {
        s.local += 1;
        if s.done {
            return Ok(Step { state: s, action: Action::Stay, events: Vec::new() });
        }
        let links = obs.links(obs.center);
        let &[(own, _, far)] = links.as_slice() else {
            return Err(ProtocolError { local_round: s.local, message: "not at a leaf".into() });
        };
        let wait = self.waits.get(far).copied().unwrap_or(0);
        let action = if s.local > wait && obs.other.is_none() {
            s.done = true;
            Action::Move(own)
        } else {
            Action::Stay
        };
        Ok(Step { state: s, action, events: Vec::new() })
    }

    fn phase_name(&self, s: &Countdown) -> &'static str {
        if s.done {
            "done"
        } else {
            "waiting"
        }
    }

    fn terminated(&self, s: &Countdown) -> bool {
        s.done
    }

    fn vision_radius(&self) -> usize {
        1
    }

    fn describe(&self) -> Value {
        json!({ "strategy": "leaf-wait", "waits": self.waits, "vision": 1 })
    }
}

/// Plays a fixed action list and stops when it runs out.
#[derive(Clone, Debug)]
pub struct Scripted {
    pub actions: Vec<Action>,
}

impl Program for Scripted {
    type State = u64;

    fn initial(&self) -> u64 {
        0
    }

    fn step(&self, s: u64, _obs: Observation) -> Result<Step<u64>, ProtocolError> {
        let action = self.actions.get(s as usize).copied().unwrap_or(Action::Stay);
        Ok(Step { state: s + 1, action, events: Vec::new() })
    }

    fn phase_name(&self, s: &u64) -> &'static str {
        if *s as usize >= self.actions.len() {
            "stopped"
        } else {
            "walking"
        }
    }

    fn terminated(&self, s: &u64) -> bool {
        *s as usize >= self.actions.len()
    }

    fn describe(&self) -> Value {
        json!({ "strategy": "scripted", "actions": self.actions })
    }
}

fn first_collision(trace: &Trace) -> Option<(u64, NodeId)> {
    trace.records.iter().find_map(|rec| {
        rec.events.iter().find_map(|e| match e {
            crate::sim::TraceEvent::Collision { node } => Some((rec.round, *node)),
            _ => None,
        })
    })
}

fn engine(max_rounds: u64) -> EngineOptions {
    EngineOptions { fast_forward: false, ..EngineOptions::new(max_rounds) }
}

/// Two-node graph: whoever waits `x` rounds before moving is woken `x + 1`
/// rounds ahead of the other and walks into it.
pub fn demo_k2(x: u64) -> Result<CollisionWitness, GraphError> {
    let graph = PortGraph::path(2)?;
    let starts = [0, 1];
    let wakes = [0, x + 1];
    let trace = run_program(&graph, starts, wakes, &WaitThenMove { x }, &engine(x + 4));
    let collision = first_collision(&trace);
    Ok(CollisionWitness { graph, starts, wakes, trace, collision })
}

/// Star with `leaves` leaves and radius-1 vision: agents at the leaves behind
/// centre ports 0 and 1, woken so that both first moves land together.
pub fn demo_star_radius1(leaves: usize, x: [u64; 2]) -> Result<CollisionWitness, GraphError> {
    let graph = PortGraph::star(leaves.max(2))?;
    let starts = [1, 2];
    let late = x[0].max(x[1]);
    let wakes = [late - x[0], late - x[1]];
    let program = LeafWait { waits: vec![x[0], x[1]] };
    let trace = run_program(&graph, starts, wakes, &program, &engine(late + 4));
    let collision = first_collision(&trace);
    Ok(CollisionWitness { graph, starts, wakes, trace, collision })
}

/// Ring of `j + 2` nodes with the uniform 0,1 port pattern. Every node looks
/// the same, so a strategy that stops after `j` rounds is just a list of `j`
/// actions; all `3^j` lists are tried and the clockwise sweep is simulated.
pub fn demo_ring_unbounded(j: usize) -> Result<CoverageWitness, GraphError> {
    let size = j + 2;
    let graph = PortGraph::ring(size)?;
    let starts = [0, size / 2];
    let program = Scripted { actions: vec![Action::Move(0); j] };
    let trace = run_program(&graph, starts, [0, 0], &program, &engine(j as u64 + 2));
    let visited = [0, 1].map(|i| trace.summary.first_visit[i].iter().flatten().count());
    let (strategies_checked, best_coverage) = best_blind_coverage(&graph, j);
    Ok(CoverageWitness { graph, starts, trace, visited, strategies_checked, best_coverage })
}

/// Tries every sequence of `steps` actions from node 0 and returns how many
/// there were and the largest number of nodes one of them visits.
fn best_blind_coverage(g: &PortGraph, steps: usize) -> (u64, usize) {
    let n = g.node_count();
    let mut best = 0;
    let mut count = 0u64;
    let mut seen = vec![false; n];
    seen[0] = true;
    explore(g, 0, steps, &mut seen, 1, &mut best, &mut count);
    (count, best)
}

fn explore(
    g: &PortGraph,
    at: NodeId,
    left: usize,
    seen: &mut Vec<bool>,
    covered: usize,
    best: &mut usize,
    count: &mut u64,
) {
    if left == 0 {
        *count += 1;
        *best = (*best).max(covered);
        return;
    }
    explore(g, at, left - 1, seen, covered, best, count);
    for p in 0..g.degree(at) {
        let next = g.neighbor_via_port(at, p).expect("port below degree");
        let fresh = !seen[next];
        seen[next] = true;
        explore(g, next, left - 1, seen, covered + fresh as usize, best, count);
        if fresh {
            seen[next] = false;
        }
    }
}
