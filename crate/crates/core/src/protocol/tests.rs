use super::*;
use crate::graph::{ball, HandleMap, PortGraph};

fn obs(g: &PortGraph, at: usize, other: Option<usize>) -> Observation {
    ball(g, at, 2, other, &HandleMap::identity(g.node_count()))
}

#[test]
fn sees_moving_examples() {
    let g = PortGraph::path(6).unwrap();
    assert!(!sees_moving(&obs(&g, 0, Some(5)), &obs(&g, 0, Some(4))));
    // left a visible node
    assert!(sees_moving(&obs(&g, 0, Some(2)), &obs(&g, 0, Some(3))));
    // entered a node visible in both rounds
    assert!(sees_moving(&obs(&g, 0, Some(3)), &obs(&g, 0, Some(2))));
    // standing still
    assert!(!sees_moving(&obs(&g, 0, Some(1)), &obs(&g, 0, Some(1))));
    // we moved, the other did not: the same node stays occupied
    assert!(!sees_moving(&obs(&g, 0, Some(2)), &obs(&g, 1, Some(2))));
}

#[test]
fn detect_approach_examples() {
    let g = PortGraph::path(6).unwrap();
    let mut s = AgentState::new();
    s.phase = Phase::Walking;
    assert!(!detect_approach(&obs(&g, 0, Some(3)), &s));
    assert!(detect_approach(&obs(&g, 0, Some(2)), &s));
    s.phase = Phase::Sync(SyncStage::Check { home: Handle(0) });
    assert!(!detect_approach(&obs(&g, 0, Some(2)), &s));
}

#[test]
fn sigma_examples() {
    assert_eq!(compute_sigma(20, 4), 320);
    assert_eq!(compute_sigma(1, 3), 16);
    assert_eq!(compute_sigma(40, 4), 2 * compute_sigma(20, 4));
    assert_eq!(ceil_log2(1), 0);
    assert_eq!(ceil_log2(5), 3);
    assert_eq!(ceil_log2(8), 3);
}

fn run_alone(cfg: &ProtocolConfig, g: &PortGraph, start: usize, rounds: usize) -> Vec<(Action, Vec<ProtocolEvent>, &'static str)> {
    let mut state = AgentState::new();
    let mut at = start;
    let mut out = Vec::new();
    for _ in 0..rounds {
        let t = step(cfg, state, obs(g, at, None)).unwrap();
        if let Action::Move(p) = t.action {
            at = g.neighbor_via_port(at, p).unwrap();
        }
        out.push((t.action, t.events, t.state.phase.name()));
        state = t.state;
    }
    out
}

#[test]
fn lone_agent_waits_walks_stops_and_terminates() {
    let g = PortGraph::path(3).unwrap();
    let cfg = ProtocolConfig::new(3, vec![1, 1, 0]);
    let sigma = cfg.sigma() as usize;
    let trace = run_alone(&cfg, &g, 0, 4 + sigma + 2);
    assert_eq!(trace[0].0, Action::Stay);
    assert_eq!(trace[0].2, "walking");
    assert_eq!(trace[1].0, Action::Move(0));
    assert!(trace[3].1.contains(&ProtocolEvent::ProvisionalStop));
    assert_eq!(trace[3].2, "provisional-stop");
    // provisional stop at local round 4, termination at 4 + sigma
    for (i, (a, ev, _)) in trace.iter().enumerate().skip(4) {
        assert_eq!(*a, Action::Stay);
        let local = i as u64 + 1;
        assert_eq!(ev.contains(&ProtocolEvent::Termination), local == 4 + cfg.sigma());
    }
    assert_eq!(trace.last().unwrap().2, "terminated");
}

#[test]
fn walk_follows_exploration_rule() {
    let g = PortGraph::random(6, 3).unwrap();
    let terms = vec![1, 0, 2, 1, 1, 0, 1];
    let cfg = ProtocolConfig::new(6, terms.clone());
    let trace = run_alone(&cfg, &g, 2, 1 + terms.len());
    let mut at = 2;
    let mut nodes = vec![at];
    for (a, _, _) in &trace {
        if let Action::Move(p) = a {
            at = g.neighbor_via_port(at, *p).unwrap();
            nodes.push(at);
        }
    }
    assert_eq!(nodes, crate::exploration::walk_trace(&g, 2, &terms));
}
