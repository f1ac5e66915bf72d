//! Recorded activation orders.
//!
//! ```text
//! note 1: coordinate red={0,1,2} blue={} seed={}
//! round 1: 1 2
//! round 2: 2 1
//! ```
//!
//! Notes are replayed into the trace so that a replayed run reproduces the
//! original trace line for line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{RoundPlan, ScheduleError, Scheduler};
use crate::engine::{EngineState, Trace, TraceEvent};
use crate::model::NodeId;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    rounds: BTreeMap<u32, RoundPlan>,
}

impl Schedule {
    /// Extracts the permutation and notes of every round in `trace`.
    pub fn from_trace(trace: &Trace) -> Self {
        let mut rounds: BTreeMap<u32, RoundPlan> = BTreeMap::new();
        for e in trace.events() {
            match e {
                TraceEvent::Schedule { round, note } => {
                    rounds.entry(*round).or_default().notes.push(note.clone());
                }
                TraceEvent::Perm { round, order } => {
                    rounds.entry(*round).or_default().order = order.clone();
                }
                _ => {}
            }
        }
        Self { rounds }
    }

    pub fn parse(text: &str) -> Result<Self, ScheduleError> {
        let mut rounds: BTreeMap<u32, RoundPlan> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| ScheduleError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (head, rest) = line
                .split_once(':')
                .ok_or_else(|| err("expected `<kind> <round>: ...`"))?;
            let (kind, round) = head
                .split_once(' ')
                .ok_or_else(|| err("expected `<kind> <round>`"))?;
            let round: u32 = round.trim().parse().map_err(|_| err("bad round number"))?;
            let plan = rounds.entry(round).or_default();
            match kind {
                "note" => plan
                    .notes
                    .push(rest.strip_prefix(' ').unwrap_or(rest).to_string()),
                "round" => {
                    plan.order = rest
                        .split_whitespace()
                        .map(|t| t.parse().map(NodeId))
                        .collect::<Result<_, _>>()
                        .map_err(|_| err("bad node id"))?;
                }
                _ => return Err(err("unknown line kind")),
            }
        }
        Ok(Self { rounds })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (round, plan) in &self.rounds {
            for note in &plan.notes {
                let _ = writeln!(out, "note {round}: {note}");
            }
            let order: Vec<String> = plan.order.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "round {round}: {}", order.join(" "));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn round(&self, t: u32) -> Option<&RoundPlan> {
        self.rounds.get(&t)
    }
}

/// Plays back a [`Schedule`]; fails once it runs out of rounds.
#[derive(Debug, Clone)]
pub struct ReplayScheduler {
    schedule: Schedule,
}

impl ReplayScheduler {
    pub fn new(schedule: Schedule) -> Self {
        Self { schedule }
    }
}

impl Scheduler for ReplayScheduler {
    fn name(&self) -> &'static str {
        "replay"
    }

    fn plan(&mut self, state: &EngineState) -> Result<RoundPlan, ScheduleError> {
        let t = state.round() + 1;
        self.schedule
            .round(t)
            .cloned()
            .ok_or(ScheduleError::ReplayExhausted(t))
    }
}
