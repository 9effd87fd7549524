//! First approach: bring both agents back to where they first saw each other
//! and agree on a common red round.

use std::collections::VecDeque;

use super::{Action, AgentState, Cx, Mutation, Phase, ProgressStage, ProtocolEvent, Scripted, SyncCase, SyncStage};
use crate::error::ProtocolError;
use crate::graph::{partition_neighbors, Handle};

pub(super) fn first_sight(state: &mut AgentState, cx: &mut Cx) -> Result<Action, ProtocolError> {
    cx.events.push(ProtocolEvent::FirstSight);
    let home = cx.obs.center;
    let other = cx.obs.other.expect("caller checked visibility");
    if state.phase == Phase::InitialWait && cx.cfg.mutated(Mutation::DropInitialWait) {
        return settle(state, cx, home, other);
    }
    if state.moved_last && cx.obs.is_adjacent(home, other) && cx.sees_moving() {
        // both moved into adjacency in the same round, and each can tell
        cx.events.push(ProtocolEvent::SyncCase(SyncCase::A));
        cx.events.push(ProtocolEvent::EventRound { local_round: cx.r - 1 });
        return script(state, cx, home, vec![Scripted::Stay]);
    }
    state.phase = Phase::Sync(SyncStage::Check { home });
    Ok(Action::Stay)
}

pub(super) fn advance(state: &mut AgentState, cx: &mut Cx, stage: SyncStage) -> Result<Action, ProtocolError> {
    match stage {
        SyncStage::Check { home } => check(state, cx, home),
        SyncStage::Oscillate { home, target } => oscillate(state, cx, home, target),
        SyncStage::AwaitMove { home, other_home, leaf } => await_move(state, cx, home, other_home, leaf),
        SyncStage::Script { home, mut moves, red } => match moves.pop_front() {
            Some(m) => {
                state.phase = Phase::Sync(SyncStage::Script { home, moves, red });
                cx.perform(m)
            }
            None if cx.r == red => red_round(state, cx, home),
            None => Err(cx.violation(format!("script ended before red round {red}"))),
        },
    }
}

/// Runs `moves[0]` now and the rest in the following rounds; the round after
/// the last move is red.
fn script(state: &mut AgentState, cx: &mut Cx, home: Handle, moves: Vec<Scripted>) -> Result<Action, ProtocolError> {
    let red = cx.r + moves.len() as u64;
    let mut moves: VecDeque<Scripted> = moves.into();
    let first = moves.pop_front().expect("scripts are non-empty");
    state.phase = Phase::Sync(SyncStage::Script { home, moves, red });
    cx.perform(first)
}

fn red_round(state: &mut AgentState, cx: &mut Cx, home: Handle) -> Result<Action, ProtocolError> {
    if cx.obs.center != home {
        return Err(cx.violation("not at the initial synch node in the red round"));
    }
    cx.events.push(ProtocolEvent::RedRound);
    state.synchronized = true;
    state.terminate_at = Some(cx.r + 1 + cx.cfg.sigma());
    state.phase = Phase::Progress(ProgressStage::Pending);
    Ok(Action::Stay)
}

fn check(state: &mut AgentState, cx: &mut Cx, home: Handle) -> Result<Action, ProtocolError> {
    if !cx.sees_moving() {
        let other = cx
            .obs
            .other
            .ok_or_else(|| cx.violation("other agent vanished without being seen moving"))?;
        return settle(state, cx, home, other);
    }
    let x = cx
        .prev
        .and_then(|p| p.other)
        .ok_or_else(|| cx.violation("movement seen without a previous position"))?;
    let y = cx.obs.other;
    let x_adj = cx.obs.is_adjacent(home, x);
    let y_adj = y.is_some_and(|y| cx.obs.is_adjacent(home, y));
    let (case, moves) = match (x_adj, y_adj, y) {
        (true, true, Some(y)) => (SyncCase::BothAdjacent, vec![Scripted::MoveTo(y), Scripted::MoveTo(home)]),
        (false, true, Some(y)) => (SyncCase::YAdjacent, vec![Scripted::MoveTo(y), Scripted::MoveTo(home)]),
        (true, false, _) => (
            SyncCase::XAdjacent,
            vec![Scripted::Stay, Scripted::MoveTo(x), Scripted::MoveTo(home)],
        ),
        _ => return Err(cx.violation("other agent moved between two nodes not adjacent to us")),
    };
    cx.events.push(ProtocolEvent::SyncCase(case));
    let event = cx.r + if case == SyncCase::XAdjacent { 1 } else { 0 };
    cx.events.push(ProtocolEvent::EventRound { local_round: event });
    script(state, cx, home, moves)
}

/// The other agent stood still at `other` during our wait.
fn settle(state: &mut AgentState, cx: &mut Cx, home: Handle, other: Handle) -> Result<Action, ProtocolError> {
    let part = partition_neighbors(cx.obs, home, other).map_err(|e| cx.violation(e))?;
    if part.common.is_empty() {
        if cx.obs.center_degree() == 1 {
            cx.events.push(ProtocolEvent::SyncCase(SyncCase::Leaf));
            state.phase = Phase::Sync(SyncStage::AwaitMove { home, other_home: other, leaf: true });
            return Ok(Action::Stay);
        }
        cx.events.push(ProtocolEvent::SyncCase(SyncCase::NoCommonOscillate));
        return start_oscillating(state, cx, home, part.private_u[0]);
    }
    if let Some(&target) = part.common_u.first() {
        cx.events.push(ProtocolEvent::SyncCase(SyncCase::CommonOscillate));
        return start_oscillating(state, cx, home, target);
    }
    cx.events.push(ProtocolEvent::SyncCase(SyncCase::CommonWait));
    state.phase = Phase::Sync(SyncStage::AwaitMove { home, other_home: other, leaf: false });
    Ok(Action::Stay)
}

fn start_oscillating(state: &mut AgentState, cx: &mut Cx, home: Handle, target: Handle) -> Result<Action, ProtocolError> {
    state.phase = Phase::Sync(SyncStage::Oscillate { home, target });
    cx.move_to(target)
}

fn oscillate(state: &mut AgentState, cx: &mut Cx, home: Handle, target: Handle) -> Result<Action, ProtocolError> {
    let at_home = cx.obs.center == home;
    if !cx.sees_moving() {
        return cx.move_to(if at_home { target } else { home });
    }
    cx.events.push(ProtocolEvent::EventRound { local_round: cx.r - 1 });
    if at_home {
        if cx.cfg.mutated(Mutation::DropTerminalWait) {
            return red_round(state, cx, home);
        }
        return script(state, cx, home, vec![Scripted::Stay]);
    }
    script(state, cx, home, vec![Scripted::MoveTo(home)])
}

fn await_move(
    state: &mut AgentState,
    cx: &mut Cx,
    home: Handle,
    other_home: Handle,
    leaf: bool,
) -> Result<Action, ProtocolError> {
    if !cx.sees_moving() {
        return Ok(Action::Stay);
    }
    if leaf {
        if cx.cfg.mutated(Mutation::SkipCompulsoryWaitLeaf) {
            cx.events.push(ProtocolEvent::EventRound { local_round: cx.r });
            return script(state, cx, home, vec![Scripted::MoveTo(other_home), Scripted::MoveTo(home)]);
        }
        cx.events.push(ProtocolEvent::EventRound { local_round: cx.r + 1 });
        return script(
            state,
            cx,
            home,
            vec![Scripted::Stay, Scripted::MoveTo(other_home), Scripted::MoveTo(home)],
        );
    }
    let there = cx
        .obs
        .other
        .ok_or_else(|| cx.violation("other agent left view while we awaited its move"))?;
    cx.events.push(ProtocolEvent::EventRound { local_round: cx.r });
    script(state, cx, home, vec![Scripted::MoveTo(there), Scripted::MoveTo(home)])
}
