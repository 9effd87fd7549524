//! The per-agent decision function.
//!
//! Every awake round an agent receives the ball around the node it occupied
//! at the end of the previous round and returns an [`Action`]. All round
//! arithmetic is local: round 1 is the first decision after waking up.

mod bits;
mod progress;
mod sync;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::exploration::walk_port;
use crate::graph::{Handle, Observation, Port};

pub use bits::{bits_to_port, decode_port_bits, encode_port_bits, format_bits};
pub use progress::BitExchange;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMode {
    /// Bit strings of length `ceil(log2 n) + 1` for the known bound `n`.
    Uniform,
    /// Bit strings sized by the agent's own degree.
    Strict,
}

/// Deliberate protocol defects used to check that the sweeps can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    DropInitialWait,
    DropTerminalWait,
    SkipCompulsoryWaitLeaf,
    WrongK,
    NoLeaderAlternation,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::DropInitialWait,
        Mutation::DropTerminalWait,
        Mutation::SkipCompulsoryWaitLeaf,
        Mutation::WrongK,
        Mutation::NoLeaderAlternation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::DropInitialWait => "drop-initial-wait",
            Mutation::DropTerminalWait => "drop-terminal-wait",
            Mutation::SkipCompulsoryWaitLeaf => "skip-compulsory-wait-leaf",
            Mutation::WrongK => "wrong-k",
            Mutation::NoLeaderAlternation => "no-leader-alternation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolConfig {
    /// Upper bound on the graph size known to both agents.
    pub n: usize,
    /// Exploration sequence shared by both agents; its length is the walk length.
    pub terms: Vec<usize>,
    pub k_mode: KMode,
    pub mutation: Option<Mutation>,
}

impl ProtocolConfig {
    pub fn new(n: usize, terms: Vec<usize>) -> Self {
        ProtocolConfig { n, terms, k_mode: KMode::Uniform, mutation: None }
    }

    pub fn walk_len(&self) -> usize {
        self.terms.len()
    }

    pub fn sigma(&self) -> u64 {
        compute_sigma(self.walk_len(), self.n)
    }

    /// Most rounds one Progress execution may take.
    pub fn progress_bound(&self) -> u64 {
        2 * ceil_log2(self.n) as u64 + 4
    }

    fn mutated(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }
}

pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Σ = L * (4 ceil(log2 n) + 8).
pub fn compute_sigma(walk_len: usize, n: usize) -> u64 {
    walk_len as u64 * (4 * ceil_log2(n) as u64 + 8)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Stay,
    Move(Port),
}

/// Who led the most recent approach that had a leader.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Me,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyncCase {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "B1.1.1")]
    NoCommonOscillate,
    #[serde(rename = "B1.1.2")]
    Leaf,
    #[serde(rename = "B1.2.1")]
    CommonOscillate,
    #[serde(rename = "B1.2.2")]
    CommonWait,
    #[serde(rename = "B2-both-adjacent")]
    BothAdjacent,
    #[serde(rename = "B2-y-adjacent")]
    YAdjacent,
    #[serde(rename = "B2-x-adjacent")]
    XAdjacent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ProgressCase {
    NoCommon,
    Leader,
    AdjacentLeader,
    Symmetric,
}

impl From<ProgressCase> for u8 {
    fn from(c: ProgressCase) -> u8 {
        match c {
            ProgressCase::NoCommon => 1,
            ProgressCase::Leader => 2,
            ProgressCase::AdjacentLeader => 3,
            ProgressCase::Symmetric => 4,
        }
    }
}

impl TryFrom<u8> for ProgressCase {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        Ok(match v {
            1 => ProgressCase::NoCommon,
            2 => ProgressCase::Leader,
            3 => ProgressCase::AdjacentLeader,
            4 => ProgressCase::Symmetric,
            _ => return Err(format!("no progress case {v}")),
        })
    }
}

/// Something the agent noticed or decided, reported alongside its action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProtocolEvent {
    FirstSight,
    SyncCase(SyncCase),
    EventRound { local_round: u64 },
    RedRound,
    Approach,
    ProgressStart(ProgressCase),
    LeaderElected(Role),
    Bits { mine: String, theirs: String },
    ProgressEnd { rounds: u64, advanced: bool },
    WalkStep { index: usize, port: Port },
    SyntheticStep { port: Port },
    ProvisionalStop,
    Termination,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scripted {
    Stay,
    MoveTo(Handle),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyncStage {
    /// Waited one round after the first sight; next decision classifies.
    Check { home: Handle },
    Oscillate { home: Handle, target: Handle },
    AwaitMove { home: Handle, other_home: Handle, leaf: bool },
    Script { home: Handle, moves: VecDeque<Scripted>, red: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgressStage {
    /// The red round has passed; Progress begins at the next decision.
    Pending,
    LeaderIdle { start: u64 },
    FollowerWatch { start: u64, other_home: Handle },
    Bits(BitExchange),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phase {
    InitialWait,
    Walking,
    ProvisionalStop,
    Sync(SyncStage),
    Progress(ProgressStage),
    Terminated,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::InitialWait => "initial-wait",
            Phase::Walking => "walking",
            Phase::ProvisionalStop => "provisional-stop",
            Phase::Sync(SyncStage::Check { .. }) => "sync-check",
            Phase::Sync(SyncStage::Oscillate { .. }) => "sync-oscillate",
            Phase::Sync(SyncStage::AwaitMove { .. }) => "sync-await",
            Phase::Sync(SyncStage::Script { .. }) => "sync-script",
            Phase::Progress(ProgressStage::Pending) => "progress-pending",
            Phase::Progress(ProgressStage::LeaderIdle { .. }) => "progress-leader-idle",
            Phase::Progress(ProgressStage::FollowerWatch { .. }) => "progress-follower-watch",
            Phase::Progress(ProgressStage::Bits(_)) => "progress-bits",
            Phase::Terminated => "terminated",
        }
    }

    fn is_free(&self) -> bool {
        matches!(self, Phase::InitialWait | Phase::Walking | Phase::ProvisionalStop)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WalkState {
    /// Walk steps taken so far.
    pub index: usize,
    /// Port by which the current walk node was entered.
    pub entry: Option<Port>,
    /// Extra steps owed after the walk is complete.
    pub synthetic: VecDeque<Port>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentState {
    pub phase: Phase,
    pub walk: WalkState,
    /// Decisions made so far.
    pub local_round: u64,
    pub synchronized: bool,
    pub leader_history: Option<Role>,
    /// Local round of the last walk step.
    pub stop_round: Option<u64>,
    /// Local round both agents terminate in, fixed at the first red round.
    pub terminate_at: Option<u64>,
    pub moved_last: bool,
    pub prev: Option<Observation>,
}

impl AgentState {
    pub fn new() -> Self {
        AgentState {
            phase: Phase::InitialWait,
            walk: WalkState::default(),
            local_round: 0,
            synchronized: false,
            leader_history: None,
            stop_round: None,
            terminate_at: None,
            moved_last: false,
            prev: None,
        }
    }

    pub fn terminated(&self) -> bool {
        self.phase == Phase::Terminated
    }
}

impl Default for AgentState {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug)]
pub struct Transition {
    pub state: AgentState,
    pub action: Action,
    pub events: Vec<ProtocolEvent>,
}

/// Whether the other agent appeared at or left some node visible in both
/// observations.
pub fn sees_moving(prev: &Observation, cur: &Observation) -> bool {
    if prev.other == cur.other {
        return false;
    }
    prev.other.is_some_and(|x| cur.contains(x)) || cur.other.is_some_and(|y| prev.contains(y))
}

/// Whether the other agent is in view while the agent is free to react to it.
pub fn detect_approach(obs: &Observation, state: &AgentState) -> bool {
    obs.other.is_some() && state.phase.is_free()
}

/// Per-decision context.
pub(crate) struct Cx<'a> {
    pub cfg: &'a ProtocolConfig,
    pub obs: &'a Observation,
    pub prev: Option<&'a Observation>,
    pub r: u64,
    pub events: Vec<ProtocolEvent>,
}

impl Cx<'_> {
    pub fn violation(&self, message: impl fmt::Display) -> ProtocolError {
        ProtocolError { local_round: self.r, message: message.to_string() }
    }

    pub fn sees_moving(&self) -> bool {
        self.prev.is_some_and(|p| sees_moving(p, self.obs))
    }

    pub fn move_to(&self, h: Handle) -> Result<Action, ProtocolError> {
        self.obs
            .port_toward(self.obs.center, h)
            .map(Action::Move)
            .ok_or_else(|| self.violation(format!("{h:?} is not adjacent")))
    }

    pub fn perform(&self, s: Scripted) -> Result<Action, ProtocolError> {
        match s {
            Scripted::Stay => Ok(Action::Stay),
            Scripted::MoveTo(h) => self.move_to(h),
        }
    }
}

/// One decision: the next state, the action and what happened.
pub fn step(cfg: &ProtocolConfig, mut state: AgentState, obs: Observation) -> Result<Transition, ProtocolError> {
    state.local_round += 1;
    let prev = state.prev.take();
    let mut cx = Cx { cfg, obs: &obs, prev: prev.as_ref(), r: state.local_round, events: Vec::new() };
    let action = decide(&mut state, &mut cx)?;
    let events = std::mem::take(&mut cx.events);
    state.moved_last = matches!(action, Action::Move(_));
    state.prev = Some(obs);
    Ok(Transition { state, action, events })
}

fn decide(state: &mut AgentState, cx: &mut Cx) -> Result<Action, ProtocolError> {
    if state.terminated() {
        return Ok(Action::Stay);
    }
    if let Some(t) = state.terminate_at {
        if cx.r >= t {
            return Ok(terminate(state, cx));
        }
    } else if let Some(sigma) = state.stop_round {
        // never met: the other agent finished its walk without approaching
        if cx.r >= sigma + cx.cfg.sigma() && state.phase.is_free() && cx.obs.other.is_none() {
            return Ok(terminate(state, cx));
        }
    }
    match state.phase.clone() {
        Phase::InitialWait | Phase::Walking | Phase::ProvisionalStop => free(state, cx),
        Phase::Sync(stage) => sync::advance(state, cx, stage),
        Phase::Progress(stage) => progress::advance(state, cx, stage),
        Phase::Terminated => Ok(Action::Stay),
    }
}

fn terminate(state: &mut AgentState, cx: &mut Cx) -> Action {
    state.phase = Phase::Terminated;
    cx.events.push(ProtocolEvent::Termination);
    Action::Stay
}

/// Walking, waiting initially or provisionally stopped: react to an
/// approach, otherwise follow the walk.
pub(crate) fn free(state: &mut AgentState, cx: &mut Cx) -> Result<Action, ProtocolError> {
    if cx.obs.other.is_some() {
        if !state.synchronized {
            return sync::first_sight(state, cx);
        }
        cx.events.push(ProtocolEvent::Approach);
        return progress::begin(state, cx);
    }
    if state.phase == Phase::InitialWait {
        state.phase = Phase::Walking;
        if !cx.cfg.mutated(Mutation::DropInitialWait) {
            return Ok(Action::Stay);
        }
    }
    if state.walk.index < cx.cfg.walk_len() || !state.walk.synthetic.is_empty() {
        return take_step(state, cx);
    }
    Ok(Action::Stay)
}

/// Phase to return to after synchronizing or progressing.
pub(crate) fn free_phase(state: &AgentState, cfg: &ProtocolConfig) -> Phase {
    if state.walk.index >= cfg.walk_len() {
        Phase::ProvisionalStop
    } else {
        Phase::Walking
    }
}

/// Port of the next walk step, loading the two extra steps to the port-0
/// neighbour and back once the walk is complete.
pub(crate) fn next_port(state: &mut AgentState, cx: &Cx) -> Result<Port, ProtocolError> {
    let obs = cx.obs;
    let degree = obs.center_degree();
    if state.walk.index < cx.cfg.walk_len() {
        return walk_port(&cx.cfg.terms, state.walk.index, state.walk.entry, degree)
            .map_err(|e| cx.violation(e));
    }
    if state.walk.synthetic.is_empty() {
        let (_, back) = obs
            .neighbor_via_port(obs.center, 0)
            .ok_or_else(|| cx.violation("isolated node"))?;
        state.walk.synthetic.extend([0, back]);
    }
    Ok(state.walk.synthetic[0])
}

/// Takes the next walk step (or owed extra step).
pub(crate) fn take_step(state: &mut AgentState, cx: &mut Cx) -> Result<Action, ProtocolError> {
    let port = next_port(state, cx)?;
    if state.walk.index < cx.cfg.walk_len() {
        let (_, back) = cx
            .obs
            .neighbor_via_port(cx.obs.center, port)
            .ok_or_else(|| cx.violation(format!("port {port} missing")))?;
        state.walk.index += 1;
        state.walk.entry = Some(back);
        cx.events.push(ProtocolEvent::WalkStep { index: state.walk.index, port });
        if state.walk.index == cx.cfg.walk_len() {
            state.stop_round = Some(cx.r);
            cx.events.push(ProtocolEvent::ProvisionalStop);
        }
    } else {
        state.walk.synthetic.pop_front();
        cx.events.push(ProtocolEvent::SyntheticStep { port });
    }
    if state.phase.is_free() {
        state.phase = free_phase(state, cx.cfg);
    }
    Ok(Action::Move(port))
}

/// Local round up to which (exclusive) the agent keeps staying put with no
/// events, provided its view does not change.
pub fn idle_until(cfg: &ProtocolConfig, state: &AgentState) -> Option<u64> {
    let prev = state.prev.as_ref()?;
    let deadline = state.terminate_at.or(state.stop_round.map(|sigma| sigma + cfg.sigma()));
    match &state.phase {
        Phase::Terminated => Some(u64::MAX),
        Phase::ProvisionalStop if prev.other.is_none() && state.walk.synthetic.is_empty() => deadline,
        Phase::Sync(SyncStage::AwaitMove { .. }) => Some(deadline.unwrap_or(u64::MAX)),
        _ => None,
    }
}

#[cfg(test)]
mod tests;
