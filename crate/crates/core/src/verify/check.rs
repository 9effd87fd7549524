//! Trace-level properties of a protocol run.

use serde::{Deserialize, Serialize};

use crate::exploration::walk_trace;
use crate::sim::{time_measure, Scenario, Trace, TraceEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    NoCollision,
    NoViolation,
    Coverage,
    Termination,
    IdleAfterTermination,
    TimeBound,
    RedRound,
    ProgressBound,
    ProgressAdvance,
    Alternation,
    BitExchange,
    WalkFidelity,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::NoCollision,
        Property::NoViolation,
        Property::Coverage,
        Property::Termination,
        Property::IdleAfterTermination,
        Property::TimeBound,
        Property::RedRound,
        Property::ProgressBound,
        Property::ProgressAdvance,
        Property::Alternation,
        Property::BitExchange,
        Property::WalkFidelity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::NoCollision => "no-collision",
            Property::NoViolation => "no-violation",
            Property::Coverage => "coverage",
            Property::Termination => "termination",
            Property::IdleAfterTermination => "idle-after-termination",
            Property::TimeBound => "time-bound",
            Property::RedRound => "red-round",
            Property::ProgressBound => "progress-bound",
            Property::ProgressAdvance => "progress-advance",
            Property::Alternation => "alternation",
            Property::BitExchange => "bit-exchange",
            Property::WalkFidelity => "walk-fidelity",
        }
    }
}

/// One Progress execution seen from both agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproachRecord {
    /// Global round of the first Progress decision.
    pub start: u64,
    pub rounds: [u64; 2],
    /// Walk or extra steps each agent took inside its Progress window.
    pub steps: [usize; 2],
    /// Cut short by termination.
    pub truncated: bool,
}

impl ApproachRecord {
    pub fn single_advancer(&self) -> Option<usize> {
        match (self.steps[0] > 0, self.steps[1] > 0) {
            (true, false) => Some(0),
            (false, true) => Some(1),
            _ => None,
        }
    }
}

/// Aggregates used in sweep reports.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceStats {
    pub time: Option<u64>,
    pub approaches: usize,
    pub max_progress_rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub results: Vec<(Property, Result<(), String>)>,
    pub stats: TraceStats,
}

impl CheckOutcome {
    pub fn first_failure(&self) -> Option<(Property, &str)> {
        self.results.iter().find_map(|(p, r)| r.as_ref().err().map(|m| (*p, m.as_str())))
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Pairs the agents' Progress executions by start round.
pub fn approaches(trace: &Trace) -> Result<Vec<ApproachRecord>, String> {
    let mut open: [Option<u64>; 2] = [None, None];
    let mut steps = [0usize; 2];
    let mut done: [Vec<(u64, u64, usize, bool)>; 2] = [Vec::new(), Vec::new()];
    for (r, e) in trace.events() {
        match e {
            TraceEvent::ProgressStart { agent, .. } => {
                if open[*agent].is_some() {
                    return Err(format!("agent {agent} starts Progress in round {r} inside another"));
                }
                open[*agent] = Some(r);
                steps[*agent] = 0;
            }
            TraceEvent::WalkStep { agent, .. } | TraceEvent::SyntheticStep { agent, .. } => {
                if open[*agent].is_some() {
                    steps[*agent] += 1;
                }
            }
            TraceEvent::ProgressEnd { agent, rounds, .. } => {
                let start = open[*agent].take().ok_or(format!("agent {agent} ends Progress in round {r} without a start"))?;
                // a follower may only notice in round `r` that Progress ended a round earlier
                if start + rounds != r + 1 && start + rounds != r {
                    return Err(format!("agent {agent} reports {rounds} Progress rounds for rounds {start}..={r}"));
                }
                done[*agent].push((start, *rounds, steps[*agent], false));
            }
            TraceEvent::Termination { agent } => {
                if let Some(start) = open[*agent].take() {
                    done[*agent].push((start, r - start, steps[*agent], true));
                }
            }
            _ => {}
        }
    }
    if open.iter().any(Option::is_some) {
        return Err("Progress still running when the run ended".into());
    }
    if done[0].len() != done[1].len() {
        return Err(format!("agents ran Progress {} and {} times", done[0].len(), done[1].len()));
    }
    done[0]
        .iter()
        .zip(&done[1])
        .map(|(a, b)| {
            ensure(a.0 == b.0, || format!("Progress starts in rounds {} and {}", a.0, b.0))?;
            Ok(ApproachRecord { start: a.0, rounds: [a.1, b.1], steps: [a.2, b.2], truncated: a.3 || b.3 })
        })
        .collect()
}

fn check_red_round(trace: &Trace) -> Result<(), String> {
    let mut sight: [Option<usize>; 2] = [None, None];
    let mut red: [Option<(u64, usize)>; 2] = [None, None];
    for (r, e) in trace.events() {
        match e {
            TraceEvent::FirstSight { agent, node } if sight[*agent].is_none() => sight[*agent] = Some(*node),
            TraceEvent::RedRound { agent, node } => {
                if red[*agent].is_some() {
                    return Err(format!("agent {agent} has a second red round {r}"));
                }
                red[*agent] = Some((r, *node));
            }
            _ => {}
        }
    }
    if sight == [None, None] {
        return Ok(());
    }
    let (Some((r0, n0)), Some((r1, n1))) = (red[0], red[1]) else {
        return Err(format!("an approach happened but red rounds are {:?}", red.map(|x| x.map(|x| x.0))));
    };
    ensure(r0 == r1, || format!("red rounds differ: {r0} and {r1}"))?;
    for (i, node) in [(0, n0), (1, n1)] {
        ensure(sight[i] == Some(node), || {
            format!("agent {i} is at {node} in the red round, its initial synch node is {:?}", sight[i])
        })?;
    }
    ensure(n0 != n1, || "both agents at one node in the red round".into())
}

fn check_walk(trace: &Trace, scenario: &Scenario, agent: usize) -> Result<(), String> {
    let walk = walk_trace(&scenario.graph, scenario.starts[agent], &scenario.sequence.terms);
    let mut next = 1;
    for (r, e) in trace.events() {
        if let TraceEvent::WalkStep { agent: a, index, from, to, .. } = e {
            if *a != agent {
                continue;
            }
            ensure(*index == next && next < walk.len(), || {
                format!("agent {agent} took walk step {index} in round {r}, expected {next}")
            })?;
            ensure(walk[next - 1] == *from && walk[next] == *to, || {
                format!(
                    "agent {agent} walk step {index} went {from}->{to}, the walk goes {}->{}",
                    walk[next - 1],
                    walk[next]
                )
            })?;
            next += 1;
        }
    }
    Ok(())
}

/// After an approach where only `x` stepped, the other agent steps at the next
/// one; and every election picks the agent that did not lead last time.
fn check_alternation(trace: &Trace, list: &[ApproachRecord]) -> Result<(), String> {
    for pair in list.windows(2) {
        if pair[1].truncated {
            continue;
        }
        if let Some(x) = pair[0].single_advancer() {
            ensure(pair[1].steps[1 - x] > 0, || {
                format!(
                    "only agent {x} advanced at the approach of round {}, and agent {} did not advance at round {}",
                    pair[0].start,
                    1 - x,
                    pair[1].start
                )
            })?;
        }
    }
    let mut last: [Option<usize>; 2] = [None, None];
    for (r, e) in trace.events() {
        if let TraceEvent::LeaderElected { agent, leader } = e {
            ensure(last[*agent] != Some(*leader), || {
                format!("agent {agent} saw agent {leader} elected twice in a row (round {r})")
            })?;
            last[*agent] = Some(*leader);
        }
    }
    Ok(())
}

/// Each exchanged string is the binary form of the port the sender takes at
/// its next step, and both agents read each other correctly.
fn check_bits(trace: &Trace) -> Result<(), String> {
    let events: Vec<(u64, &TraceEvent)> = trace.events().collect();
    let mut pending: Vec<(u64, usize, &str, &str)> = Vec::new();
    for (i, (r, e)) in events.iter().enumerate() {
        let TraceEvent::Bits { agent, mine, theirs } = e else { continue };
        pending.push((*r, *agent, mine, theirs));
        let next_port = events[i..].iter().find_map(|(_, e)| match e {
            TraceEvent::WalkStep { agent: a, port, .. } | TraceEvent::SyntheticStep { agent: a, port, .. }
                if a == agent =>
            {
                Some(*port)
            }
            _ => None,
        });
        if let Some(p) = next_port {
            let width = mine.len();
            ensure(width >= 64 - (p as u64).leading_zeros() as usize && format!("{p:0width$b}") == **mine, || {
                format!("agent {agent} sent {mine} in round {r} but its next step uses port {p}")
            })?;
        }
    }
    for (r, a, mine, _) in &pending {
        let echo = pending.iter().find(|(r2, b, _, _)| r2 == r && b != a);
        let Some((_, _, _, theirs)) = echo else {
            return Err(format!("only agent {a} finished a bit exchange in round {r}"));
        };
        ensure(theirs == mine, || format!("agent {a} sent {mine} in round {r}, the other read {theirs}"))?;
    }
    Ok(())
}

/// Evaluates every [`Property`] on a trace of `scenario`.
pub fn check_trace(trace: &Trace, scenario: &Scenario) -> CheckOutcome {
    let cfg = scenario.config();
    let s = &trace.summary;
    let time = time_measure(trace).ok();
    let approach_list = approaches(trace);
    let mut stats = TraceStats { time, ..TraceStats::default() };
    if let Ok(list) = &approach_list {
        stats.approaches = list.len();
        stats.max_progress_rounds = list.iter().flat_map(|a| a.rounds).max().unwrap_or(0);
    }
    let bound = 3 * cfg.sigma() + 64;
    let results = Property::ALL
        .iter()
        .map(|&p| {
            let r = match p {
                Property::NoCollision => ensure(s.collisions == 0, || {
                    let first = trace.events().find_map(|(r, e)| match e {
                        TraceEvent::Collision { node } => Some(format!("round {r} at node {node}")),
                        _ => None,
                    });
                    format!("{} collision rounds, first in {}", s.collisions, first.unwrap_or_default())
                }),
                Property::NoViolation => ensure(s.violation.is_none(), || s.violation.clone().unwrap_or_default()),
                Property::Coverage => (0..2).try_for_each(|i| match s.stop_round[i] {
                    None => Err(format!("agent {i} never stopped provisionally")),
                    Some(r) => ensure(s.covered_by(i, r), || {
                        let missing: Vec<usize> = (0..s.first_visit[i].len())
                            .filter(|&v| !s.first_visit[i][v].is_some_and(|x| x <= r))
                            .collect();
                        format!("agent {i} stopped in round {r} without visiting {missing:?}")
                    }),
                }),
                Property::Termination => ensure(!s.timed_out && s.termination.iter().all(Option::is_some), || {
                    format!("terminations {:?} after {} rounds", s.termination, s.last_round)
                }),
                Property::IdleAfterTermination => ensure(!s.moved_after_termination, || "moved after terminating".into()),
                Property::TimeBound => match time {
                    None => Err("not terminated".into()),
                    Some(t) => ensure(t <= bound, || format!("time {t} exceeds {bound}")),
                },
                Property::RedRound => check_red_round(trace),
                Property::ProgressBound => approach_list.as_ref().map_err(Clone::clone).and_then(|list| {
                    list.iter().try_for_each(|a| {
                        let worst = a.rounds[0].max(a.rounds[1]);
                        ensure(worst <= cfg.progress_bound(), || {
                            format!("Progress from round {} took {worst} rounds, bound {}", a.start, cfg.progress_bound())
                        })
                    })
                }),
                Property::ProgressAdvance => approach_list.as_ref().map_err(Clone::clone).and_then(|list| {
                    list.iter().filter(|a| !a.truncated).try_for_each(|a| {
                        ensure(a.steps != [0, 0], || format!("nobody advanced in the Progress from round {}", a.start))
                    })
                }),
                Property::Alternation => approach_list.as_ref().map_err(Clone::clone).and_then(|l| check_alternation(trace, l)),
                Property::BitExchange => check_bits(trace),
                Property::WalkFidelity => (0..2).try_for_each(|i| check_walk(trace, scenario, i)),
            };
            (p, r)
        })
        .collect();
    CheckOutcome { results, stats }
}
