//! Graphviz rendering of routing graphs. Arc labels are the tail's ranking
//! of the head (1 = most preferred).

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Network, NodeId, RoutingGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("trace line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

#[derive(Debug, Clone, Default)]
pub struct DotOptions<'a> {
    /// Optional per-node labels, indexed by node id.
    pub labels: Option<&'a [String]>,
    /// Also draw every unused network arc, dashed.
    pub all_arcs: bool,
}

fn node_line(out: &mut String, net: &Network, v: NodeId, labels: Option<&[String]>) {
    let label = labels
        .and_then(|l| l.get(v.0))
        .map(|s| format!("{v}:{s}"))
        .unwrap_or_else(|| v.to_string());
    let shape = if v == net.sink() {
        "doublecircle"
    } else {
        "circle"
    };
    let _ = writeln!(out, "  {v} [label=\"{label}\", shape={shape}];");
}

fn rank(net: &Network, u: NodeId, w: NodeId) -> usize {
    net.rank(u, w).unwrap_or(0)
}

pub fn to_dot(net: &Network, rg: &RoutingGraph, opts: &DotOptions<'_>) -> String {
    let mut out = String::from("digraph routing {\n  rankdir=BT;\n");
    for v in net.nodes() {
        node_line(&mut out, net, v, opts.labels);
    }
    for u in net.nodes() {
        if opts.all_arcs {
            for &w in net.prefs(u) {
                if rg.next(u) == Some(w) {
                    let _ = writeln!(
                        out,
                        "  {u} -> {w} [label=\"{}\", style=bold];",
                        rank(net, u, w)
                    );
                } else {
                    let _ = writeln!(
                        out,
                        "  {u} -> {w} [label=\"{}\", style=dashed];",
                        rank(net, u, w)
                    );
                }
            }
        } else if let Some(w) = rg.next(u) {
            let _ = writeln!(out, "  {u} -> {w} [label=\"{}\"];", rank(net, u, w));
        }
    }
    out.push_str("}\n");
    out
}

/// Routing graph after `round` completed, rebuilt from the `activate`
/// lines of a rendered trace on top of `initial`.
pub fn graph_at_round(
    initial: &RoutingGraph,
    trace: &str,
    round: u32,
) -> Result<RoutingGraph, SnapshotError> {
    let mut g = initial.clone();
    for (i, line) in trace.lines().enumerate() {
        let err = |msg: &str| SnapshotError::Syntax {
            line: i + 1,
            msg: msg.to_string(),
        };
        let Some((head, body)) = line.split_once(" | ") else {
            continue;
        };
        let t: u32 = head
            .strip_prefix("round ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err("expected `round <t> | ...`"))?;
        if t > round {
            break;
        }
        let Some(rest) = body.strip_prefix("activate ") else {
            continue;
        };
        let mut parts = rest.split_whitespace();
        let v: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("bad node"))?;
        if parts.next() != Some("->") {
            return Err(err("expected `->`"));
        }
        let w = match parts.next() {
            Some("none") => None,
            Some(s) => Some(NodeId(s.parse().map_err(|_| err("bad choice"))?)),
            None => return Err(err("missing choice")),
        };
        if v >= g.n() || w.is_some_and(|w| w.0 >= g.n()) {
            return Err(err("node out of range"));
        }
        g.set(NodeId(v), w);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    #[test]
    fn tri_first_choices() {
        let net = fixtures::tri();
        let dot = to_dot(&net, &net.first_choice_graph(), &DotOptions::default());
        let arcs: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(arcs, ["  1 -> 0 [label=\"1\"];", "  2 -> 1 [label=\"1\"];"]);
    }

    #[test]
    fn empty_graph_has_nodes_only() {
        let net = fixtures::nogood();
        let dot = to_dot(&net, &RoutingGraph::empty(3), &DotOptions::default());
        assert!(!dot.contains("->"));
        assert_eq!(dot.lines().filter(|l| l.contains("shape=")).count(), 3);
    }

    #[test]
    fn all_arcs_marks_the_chosen_ones() {
        let net = fixtures::tri();
        let opts = DotOptions {
            all_arcs: true,
            ..Default::default()
        };
        let dot = to_dot(&net, &net.first_choice_graph(), &opts);
        assert_eq!(dot.matches("style=bold").count(), 2);
        assert_eq!(dot.matches("style=dashed").count(), 2);
    }

    #[test]
    fn snapshot_from_trace() {
        let trace = "round 0 | verify clear={0}\n\
                     round 1 | activate 2 -> 0 path=(2,0)\n\
                     round 1 | activate 1 -> none path=()\n\
                     round 2 | activate 1 -> 2 path=(1,2,0)\n";
        let init = RoutingGraph::from_next(vec![None, Some(NodeId(0)), Some(NodeId(1))]);
        let g1 = graph_at_round(&init, trace, 1).unwrap();
        assert_eq!(g1.as_slice(), &[None, None, Some(NodeId(0))]);
        let g2 = graph_at_round(&init, trace, 2).unwrap();
        assert_eq!(g2.next(NodeId(1)), Some(NodeId(2)));
        assert_eq!(graph_at_round(&init, trace, 0).unwrap(), init);
    }
}
