use std::hash::{Hash, Hasher};
use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::leader_index;
use crate::graph::NodeId;
use crate::protocol::{Action, ProgressCase, ProtocolEvent, SyncCase};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceHeader {
    /// The graph in the text file format.
    pub graph: String,
    pub starts: [NodeId; 2],
    /// Wake rounds after shifting the earlier one to 0.
    pub wakes: [u64; 2],
    pub max_rounds: u64,
    pub handle_seeds: Option<[u64; 2]>,
    pub program: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceEvent {
    FirstSight { agent: usize, node: NodeId },
    SyncCase { agent: usize, case: SyncCase },
    /// Global round both agents first move together, as the agent computes it.
    EventRound { agent: usize, round: u64 },
    RedRound { agent: usize, node: NodeId },
    Approach { agent: usize, node: NodeId },
    ProgressStart { agent: usize, case: ProgressCase },
    LeaderElected { agent: usize, leader: usize },
    Bits { agent: usize, mine: String, theirs: String },
    ProgressEnd { agent: usize, rounds: u64, advanced: bool },
    WalkStep { agent: usize, index: usize, port: usize, from: NodeId, to: NodeId },
    SyntheticStep { agent: usize, port: usize, from: NodeId, to: NodeId },
    ProvisionalStop { agent: usize },
    Termination { agent: usize },
    Collision { node: NodeId },
    EdgeCrossing { u: NodeId, v: NodeId },
    Violation { agent: usize, message: String },
}

impl TraceEvent {
    pub(super) fn from_protocol(e: ProtocolEvent, agent: usize, wake: u64, from: NodeId, to: NodeId) -> Self {
        match e {
            ProtocolEvent::FirstSight => TraceEvent::FirstSight { agent, node: from },
            ProtocolEvent::SyncCase(case) => TraceEvent::SyncCase { agent, case },
            ProtocolEvent::EventRound { local_round } => TraceEvent::EventRound { agent, round: wake + local_round },
            ProtocolEvent::RedRound => TraceEvent::RedRound { agent, node: from },
            ProtocolEvent::Approach => TraceEvent::Approach { agent, node: from },
            ProtocolEvent::ProgressStart(case) => TraceEvent::ProgressStart { agent, case },
            ProtocolEvent::LeaderElected(role) => TraceEvent::LeaderElected { agent, leader: leader_index(role, agent) },
            ProtocolEvent::Bits { mine, theirs } => TraceEvent::Bits { agent, mine, theirs },
            ProtocolEvent::ProgressEnd { rounds, advanced } => TraceEvent::ProgressEnd { agent, rounds, advanced },
            ProtocolEvent::WalkStep { index, port } => TraceEvent::WalkStep { agent, index, port, from, to },
            ProtocolEvent::SyntheticStep { port } => TraceEvent::SyntheticStep { agent, port, from, to },
            ProtocolEvent::ProvisionalStop => TraceEvent::ProvisionalStop { agent },
            ProtocolEvent::Termination => TraceEvent::Termination { agent },
        }
    }

    /// The agent the event belongs to, if any.
    pub fn agent(&self) -> Option<usize> {
        match self {
            TraceEvent::Collision { .. } | TraceEvent::EdgeCrossing { .. } => None,
            TraceEvent::FirstSight { agent, .. }
            | TraceEvent::SyncCase { agent, .. }
            | TraceEvent::EventRound { agent, .. }
            | TraceEvent::RedRound { agent, .. }
            | TraceEvent::Approach { agent, .. }
            | TraceEvent::ProgressStart { agent, .. }
            | TraceEvent::LeaderElected { agent, .. }
            | TraceEvent::Bits { agent, .. }
            | TraceEvent::ProgressEnd { agent, .. }
            | TraceEvent::WalkStep { agent, .. }
            | TraceEvent::SyntheticStep { agent, .. }
            | TraceEvent::ProvisionalStop { agent }
            | TraceEvent::Termination { agent }
            | TraceEvent::Violation { agent, .. } => Some(*agent),
        }
    }
}

/// Configuration after round `round`'s actions.
#[derive(Clone, Debug, PartialEq, Hash, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    /// `None` while the agent is dormant.
    pub pos: [Option<NodeId>; 2],
    /// `None` for agents that did not decide this round.
    pub act: [Option<Action>; 2],
    pub phase: [&'static str; 2],
    pub events: Vec<TraceEvent>,
}

#[derive(Clone, Debug, PartialEq, Hash, Serialize)]
pub struct TraceSummary {
    /// Per agent and node, the first global round the agent stood there.
    pub first_visit: [Vec<Option<u64>>; 2],
    pub stop_round: [Option<u64>; 2],
    pub termination: [Option<u64>; 2],
    pub collisions: usize,
    pub moved_after_termination: bool,
    pub violation: Option<String>,
    pub timed_out: bool,
    pub last_round: u64,
}

impl TraceSummary {
    pub fn collided(&self) -> bool {
        self.collisions > 0
    }

    /// Whether agent `i` had visited every node by round `r`.
    pub fn covered_by(&self, i: usize, r: u64) -> bool {
        self.first_visit[i].iter().all(|v| v.is_some_and(|v| v <= r))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<RoundRecord>,
    pub summary: TraceSummary,
}

impl Trace {
    pub(super) fn new(header: TraceHeader, nodes: usize) -> Self {
        Trace {
            header,
            records: Vec::new(),
            summary: TraceSummary {
                first_visit: [vec![None; nodes], vec![None; nodes]],
                stop_round: [None; 2],
                termination: [None; 2],
                collisions: 0,
                moved_after_termination: false,
                violation: None,
                timed_out: false,
                last_round: 0,
            },
        }
    }

    pub(super) fn push(&mut self, record: RoundRecord) {
        self.records.push(record);
    }

    /// Every event with the global round it was reported in.
    pub fn events(&self) -> impl Iterator<Item = (u64, &TraceEvent)> {
        self.records.iter().flat_map(|rec| rec.events.iter().map(move |e| (rec.round, e)))
    }

    /// Header line, then one line per recorded round.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header = serde_json::json!({ "header": &self.header });
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for rec in &self.records {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = Vec::new();
        self.write_jsonl(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    /// SHA-256 over the header as JSON followed by a fixed little-endian
    /// encoding of records and summary.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = LeHasher(serde_json::to_vec(&self.header).expect("header serializes"));
        self.records.hash(&mut h);
        self.summary.hash(&mut h);
        Sha256::digest(&h.0).into()
    }
}

/// Collects `Hash` output as bytes with platform-independent integer widths.
struct LeHasher(Vec<u8>);

impl Hasher for LeHasher {
    fn finish(&self) -> u64 {
        unreachable!("only used as a byte sink")
    }

    fn write(&mut self, bytes: &[u8]) {
        self.0.extend_from_slice(bytes);
    }

    fn write_u8(&mut self, i: u8) {
        self.0.push(i);
    }

    fn write_u16(&mut self, i: u16) {
        self.0.extend_from_slice(&i.to_le_bytes());
    }

    fn write_u32(&mut self, i: u32) {
        self.0.extend_from_slice(&i.to_le_bytes());
    }

    fn write_u64(&mut self, i: u64) {
        self.0.extend_from_slice(&i.to_le_bytes());
    }

    fn write_usize(&mut self, i: usize) {
        self.write_u64(i as u64);
    }

    fn write_isize(&mut self, i: isize) {
        self.write_u64(i as i64 as u64);
    }
}
