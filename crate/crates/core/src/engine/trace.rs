use std::fmt;

use crate::model::{NodeId, NodeSet};

/// One line of the simulation trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// Scheduler decision for the round (partition, tree, promoted node...).
    Schedule {
        round: u32,
        note: String,
    },
    /// The activation order used in the round.
    Perm {
        round: u32,
        order: Vec<NodeId>,
    },
    /// Adversary moved a cycling packet before the round.
    Place {
        round: u32,
        packet: usize,
        from: NodeId,
        to: NodeId,
    },
    Activate {
        round: u32,
        node: NodeId,
        choice: Option<NodeId>,
        path: Vec<NodeId>,
    },
    Forward {
        round: u32,
        packet: usize,
        from: NodeId,
        to: NodeId,
    },
    Delivered {
        round: u32,
        packet: usize,
    },
    Verify {
        round: u32,
        clear: NodeSet,
    },
}

impl TraceEvent {
    pub fn round(&self) -> u32 {
        match self {
            TraceEvent::Schedule { round, .. }
            | TraceEvent::Perm { round, .. }
            | TraceEvent::Place { round, .. }
            | TraceEvent::Activate { round, .. }
            | TraceEvent::Forward { round, .. }
            | TraceEvent::Delivered { round, .. }
            | TraceEvent::Verify { round, .. } => *round,
        }
    }
}

fn join(items: impl IntoIterator<Item = NodeId>, sep: &str) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// `{0,1,2}`
pub fn fmt_set(s: &NodeSet) -> String {
    format!("{{{}}}", join(s.iter().copied(), ","))
}

/// `(1,2,0)`; the empty path is `()`.
pub fn fmt_path(p: &[NodeId]) -> String {
    format!("({})", join(p.iter().copied(), ","))
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "round {} | ", self.round())?;
        match self {
            TraceEvent::Schedule { note, .. } => write!(f, "sched {note}"),
            TraceEvent::Perm { order, .. } => {
                write!(f, "perm {}", join(order.iter().copied(), " "))
            }
            TraceEvent::Place {
                packet, from, to, ..
            } => write!(f, "place pkt={packet} {from}->{to}"),
            TraceEvent::Activate {
                node, choice, path, ..
            } => match choice {
                Some(w) => write!(f, "activate {node} -> {w} path={}", fmt_path(path)),
                None => write!(f, "activate {node} -> none path={}", fmt_path(path)),
            },
            TraceEvent::Forward {
                packet, from, to, ..
            } => {
                write!(f, "forward pkt={packet} {from}->{to}")
            }
            TraceEvent::Delivered { packet, .. } => write!(f, "delivered pkt={packet}"),
            TraceEvent::Verify { clear, .. } => write!(f, "verify clear={}", fmt_set(clear)),
        }
    }
}

/// Append-only event log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(&mut self, e: TraceEvent) {
        self.events.push(e);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One event per line, newline-terminated.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_formats() {
        let e = TraceEvent::Activate {
            round: 1,
            node: NodeId(2),
            choice: Some(NodeId(0)),
            path: vec![NodeId(2), NodeId(0)],
        };
        assert_eq!(e.to_string(), "round 1 | activate 2 -> 0 path=(2,0)");
        let e = TraceEvent::Activate {
            round: 3,
            node: NodeId(1),
            choice: None,
            path: vec![],
        };
        assert_eq!(e.to_string(), "round 3 | activate 1 -> none path=()");
        let e = TraceEvent::Verify {
            round: 0,
            clear: [NodeId(0), NodeId(2)].into(),
        };
        assert_eq!(e.to_string(), "round 0 | verify clear={0,2}");
        let e = TraceEvent::Perm {
            round: 2,
            order: vec![NodeId(2), NodeId(1)],
        };
        assert_eq!(e.to_string(), "round 2 | perm 2 1");
        let e = TraceEvent::Forward {
            round: 2,
            packet: 1,
            from: NodeId(1),
            to: NodeId(0),
        };
        assert_eq!(e.to_string(), "round 2 | forward pkt=1 1->0");
    }
}
