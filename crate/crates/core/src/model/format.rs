//! Line-oriented instance text format.
//!
//! ```text
//! # comment
//! nodes 3
//! sink 0
//! prefs 1: 2 0        # decreasing preference
//! prefs 2: 1 0
//! filter 1: 1         # omitted => empty
//! next 1: 2           # optional initial routing graph, '-' for no arc
//! next 2: -
//! ```
//!
//! [`Instance::to_text`] writes the canonical form, which parses back to the
//! same text byte for byte.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Network, NetworkError, NodeId, NodeSet, RoutingGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` directive")]
    Missing(&'static str),
    #[error("invalid network: {0}")]
    Network(#[from] NetworkError),
}

/// A network plus an optional explicit initial routing graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub network: Network,
    pub initial: Option<RoutingGraph>,
}

impl Instance {
    pub fn new(network: Network) -> Self {
        Self {
            network,
            initial: None,
        }
    }

    /// The explicit initial graph, or the all-first-choice graph by default.
    pub fn initial_graph(&self) -> RoutingGraph {
        self.initial
            .clone()
            .unwrap_or_else(|| self.network.first_choice_graph())
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut n: Option<usize> = None;
        let mut sink: Option<usize> = None;
        let mut prefs: Vec<Option<Vec<NodeId>>> = Vec::new();
        let mut filters: Vec<NodeSet> = Vec::new();
        let mut initial: Option<RoutingGraph> = None;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ParseError::Syntax { line: line_no, msg };
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match head {
                "nodes" => {
                    if n.is_some() {
                        return Err(err("duplicate `nodes`".into()));
                    }
                    let count = parse_num(rest).map_err(err)?;
                    n = Some(count);
                    prefs = vec![None; count];
                    filters = vec![NodeSet::new(); count];
                }
                "sink" => {
                    let count = n.ok_or_else(|| err("`sink` before `nodes`".into()))?;
                    let s = parse_node(rest, count).map_err(err)?;
                    sink = Some(s.0);
                }
                "prefs" | "filter" | "next" => {
                    let count = n.ok_or_else(|| err(format!("`{head}` before `nodes`")))?;
                    let (lhs, rhs) = rest
                        .split_once(':')
                        .ok_or_else(|| err(format!("expected `{head} <v>: ...`")))?;
                    let v = parse_node(lhs.trim(), count).map_err(err)?;
                    match head {
                        "prefs" => {
                            if prefs[v.0].is_some() {
                                return Err(err(format!("duplicate `prefs` for node {v}")));
                            }
                            prefs[v.0] = Some(parse_list(rhs, count).map_err(err)?);
                        }
                        "filter" => {
                            filters[v.0].extend(parse_list(rhs, count).map_err(err)?);
                        }
                        _ => {
                            let g = initial.get_or_insert_with(|| RoutingGraph::empty(count));
                            let rhs = rhs.trim();
                            let w = if rhs == "-" {
                                None
                            } else {
                                Some(parse_node(rhs, count).map_err(err)?)
                            };
                            g.set(v, w);
                        }
                    }
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }

        n.ok_or(ParseError::Missing("nodes"))?;
        let sink = NodeId(sink.ok_or(ParseError::Missing("sink"))?);
        let prefs = prefs.into_iter().map(Option::unwrap_or_default).collect();
        let network = Network::new(sink, prefs, filters)?;
        if let Some(g) = &initial {
            if let Some((u, w)) = g.arcs().find(|&(u, w)| !network.has_arc(u, w)) {
                return Err(ParseError::Syntax {
                    line: 0,
                    msg: format!("initial arc {u}->{w} is not an arc of the network"),
                });
            }
        }
        Ok(Self { network, initial })
    }

    /// Canonical text. Sink has no `prefs` line; empty filters are omitted;
    /// `next` lines appear for every non-sink node iff an initial graph is set.
    pub fn to_text(&self) -> String {
        let net = &self.network;
        let mut out = String::new();
        let _ = writeln!(out, "nodes {}", net.n());
        let _ = writeln!(out, "sink {}", net.sink());
        for v in net.non_sink() {
            let _ = writeln!(out, "prefs {v}:{}", join(net.prefs(v).iter()));
        }
        for v in net.nodes() {
            let d = net.filters(v);
            if !d.is_empty() {
                let _ = writeln!(out, "filter {v}:{}", join(d.iter()));
            }
        }
        if let Some(g) = &self.initial {
            for v in net.non_sink() {
                match g.next(v) {
                    Some(w) => {
                        let _ = writeln!(out, "next {v}: {w}");
                    }
                    None => {
                        let _ = writeln!(out, "next {v}: -");
                    }
                }
            }
        }
        out
    }
}

fn join<'a>(items: impl Iterator<Item = &'a NodeId>) -> String {
    items.map(|x| format!(" {x}")).collect()
}

fn parse_num(s: &str) -> Result<usize, String> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

fn parse_node(s: &str, n: usize) -> Result<NodeId, String> {
    let v = parse_num(s)?;
    if v >= n {
        return Err(format!("node {v} out of range (nodes {n})"));
    }
    Ok(NodeId(v))
}

fn parse_list(s: &str, n: usize) -> Result<Vec<NodeId>, String> {
    s.split_whitespace().map(|t| parse_node(t, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    #[test]
    fn canonical_text_round_trips() {
        let text =
            "nodes 3\nsink 0\nprefs 1: 2 0\nprefs 2: 1 0\nfilter 0: 0\nfilter 1: 1\nfilter 2: 2\n";
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.network, fixtures::notme2());
        assert_eq!(inst.to_text(), text);
    }

    #[test]
    fn initial_graph_round_trips() {
        let text = "nodes 3\nsink 0\nprefs 1: 0 2\nprefs 2: 1 0\nnext 1: -\nnext 2: 1\n";
        let inst = Instance::parse(text).unwrap();
        let g = inst.initial.as_ref().unwrap();
        assert_eq!(g.next(NodeId(1)), None);
        assert_eq!(g.next(NodeId(2)), Some(NodeId(1)));
        assert_eq!(inst.to_text(), text);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# tri\nnodes 3\n\nsink 0  # the sink\nprefs 1: 0 2\nprefs 2: 1 0\n";
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.network, fixtures::tri());
        assert_eq!(inst.initial_graph(), fixtures::tri().first_choice_graph());
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(
            Instance::parse("sink 0\n"),
            Err(ParseError::Syntax { line: 1, .. })
        ));
        assert_eq!(
            Instance::parse("nodes 2\n"),
            Err(ParseError::Missing("sink"))
        );
        assert!(matches!(
            Instance::parse("nodes 2\nsink 0\nprefs 1: 5\n"),
            Err(ParseError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            Instance::parse("nodes 3\nsink 0\nprefs 1: 0\nprefs 2: 1 1\n"),
            Err(ParseError::Network(
                NetworkError::DuplicatePreference { .. }
            ))
        ));
        assert!(matches!(
            Instance::parse("nodes 3\nsink 0\nprefs 1: 0\nprefs 2: 1\nnext 1: 2\n"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(Instance::parse("nodes 2\nsink 0\nbogus\n").is_err());
    }
}
