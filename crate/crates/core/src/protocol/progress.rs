//! After a red round: let at least one agent take its next walk step without
//! meeting the other.

use super::bits::{bit_length, encode_port_bits, format_bits};
use super::{
    free, free_phase, next_port, take_step, Action, AgentState, Cx, Mutation, Phase, ProgressCase,
    ProgressStage, ProtocolEvent, Role,
};
use crate::error::ProtocolError;
use crate::graph::{approach_graph, elect_leader, is_symmetric, Handle, Side};

/// State of the bit exchange used on symmetric approach graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitExchange {
    start: u64,
    home: Handle,
    other_home: Handle,
    relay: Handle,
    common: Vec<Handle>,
    adjacent: bool,
    mine: Vec<bool>,
    theirs: Vec<bool>,
}

pub(super) fn advance(state: &mut AgentState, cx: &mut Cx, stage: ProgressStage) -> Result<Action, ProtocolError> {
    match stage {
        ProgressStage::Pending => begin(state, cx),
        ProgressStage::LeaderIdle { start } => {
            let a = take_step(state, cx)?;
            finish(state, cx, start, true);
            Ok(a)
        }
        ProgressStage::FollowerWatch { start, other_home } => {
            if cx.obs.other == Some(other_home) {
                let a = take_step(state, cx)?;
                finish(state, cx, start, true);
                return Ok(a);
            }
            // the leader already left: Progress took one round
            cx.events.push(ProtocolEvent::ProgressEnd { rounds: cx.r - start, advanced: false });
            state.phase = free_phase(state, cx.cfg);
            free(state, cx)
        }
        ProgressStage::Bits(x) => exchange(state, cx, x),
    }
}

fn finish(state: &mut AgentState, cx: &mut Cx, start: u64, advanced: bool) {
    cx.events.push(ProtocolEvent::ProgressEnd { rounds: cx.r - start + 1, advanced });
    state.phase = free_phase(state, cx.cfg);
}

/// First Progress round; the previous round was red and both agents stand
/// where this approach began.
pub(super) fn begin(state: &mut AgentState, cx: &mut Cx) -> Result<Action, ProtocolError> {
    state.phase = Phase::Progress(ProgressStage::Pending);
    let u = cx.obs.center;
    let v = cx
        .obs
        .other
        .ok_or_else(|| cx.violation("other agent not in view when Progress starts"))?;
    let ag = approach_graph(cx.obs, u, v).map_err(|e| cx.violation(e))?;
    let start = cx.r;
    if ag.common().is_empty() {
        cx.events.push(ProtocolEvent::ProgressStart(ProgressCase::NoCommon));
        let a = take_step(state, cx)?;
        finish(state, cx, start, true);
        return Ok(a);
    }
    let adjacent = ag.adjacent();
    let symmetric = is_symmetric(&ag);
    let case = match (symmetric, adjacent) {
        (true, _) => ProgressCase::Symmetric,
        (false, false) => ProgressCase::Leader,
        (false, true) => ProgressCase::AdjacentLeader,
    };
    cx.events.push(ProtocolEvent::ProgressStart(case));
    let history = if cx.cfg.mutated(Mutation::NoLeaderAlternation) { None } else { state.leader_history };
    if let Some(last) = history {
        return lead(state, cx, start, last == Role::Other, adjacent, v);
    }
    if !symmetric {
        let side = elect_leader(&ag).map_err(|e| cx.violation(e))?;
        return lead(state, cx, start, side == Side::U, adjacent, v);
    }
    let k = bit_length(cx.cfg, cx.obs.center_degree());
    let port = next_port(state, cx)?;
    let mine = encode_port_bits(port % (1 << k), k).map_err(|e| cx.violation(e))?;
    let x = BitExchange {
        start,
        home: u,
        other_home: v,
        relay: ag.common()[0],
        common: ag.common().to_vec(),
        adjacent,
        mine,
        theirs: Vec::new(),
    };
    exchange(state, cx, x)
}

fn lead(
    state: &mut AgentState,
    cx: &mut Cx,
    start: u64,
    me: bool,
    adjacent: bool,
    other_home: Handle,
) -> Result<Action, ProtocolError> {
    state.leader_history = Some(if me { Role::Me } else { Role::Other });
    cx.events.push(ProtocolEvent::LeaderElected(if me { Role::Me } else { Role::Other }));
    if me {
        let port = next_port(state, cx)?;
        let target = cx.obs.neighbor_via_port(cx.obs.center, port).map(|l| l.0);
        if adjacent && target == Some(other_home) {
            state.phase = Phase::Progress(ProgressStage::LeaderIdle { start });
            return Ok(Action::Stay);
        }
        let a = take_step(state, cx)?;
        finish(state, cx, start, true);
        return Ok(a);
    }
    if adjacent {
        state.phase = Phase::Progress(ProgressStage::FollowerWatch { start, other_home });
    } else {
        finish(state, cx, start, false);
    }
    Ok(Action::Stay)
}

/// Slot `i` of the exchange runs at local round `start + i`. Even slots send a
/// bit by stepping to the relay, odd slots return; each decision first reads
/// what the other agent did in the previous slot.
fn exchange(state: &mut AgentState, cx: &mut Cx, mut x: BitExchange) -> Result<Action, ProtocolError> {
    let i = (cx.r - x.start) as usize;
    let k = x.mine.len();
    if i >= 1 {
        let away = cx.obs.other != Some(x.other_home);
        if (i - 1).is_multiple_of(2) {
            if away && !cx.obs.other.is_some_and(|o| x.common.contains(&o)) {
                return Err(cx.violation("other agent left its node but not to a common neighbour"));
            }
            x.theirs.push(away);
        } else if away {
            return Err(cx.violation("other agent did not return during the bit exchange"));
        }
    }
    if i < 2 * k {
        let bit = x.mine[i / 2];
        let action = match (bit, i % 2) {
            (false, _) => Action::Stay,
            (true, 0) => cx.move_to(x.relay)?,
            (true, _) => cx.move_to(x.home)?,
        };
        state.phase = Phase::Progress(ProgressStage::Bits(x));
        return Ok(action);
    }
    cx.events.push(ProtocolEvent::Bits { mine: format_bits(&x.mine), theirs: format_bits(&x.theirs) });
    if x.mine == x.theirs {
        let a = take_step(state, cx)?;
        finish(state, cx, x.start, true);
        return Ok(a);
    }
    let me = x.mine < x.theirs;
    lead(state, cx, x.start, me, x.adjacent, x.other_home)
}
