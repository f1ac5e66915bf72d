use std::fmt;

use super::AnalysisError;
use crate::model::{
    actual_path, q_components, q_subtree, Network, NodeId, NodeSet, RoutingGraph, SpanningTree,
};

/// Why a tree is not stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// The parent's tree path meets the node's filter list.
    InvalidParent { node: NodeId, parent: NodeId },
    /// The node has a valid neighbour it ranks above its parent.
    Preferred { node: NodeId, neighbour: NodeId },
}

impl Violation {
    /// The offending (node, neighbour) pair.
    pub fn pair(&self) -> (NodeId, NodeId) {
        match *self {
            Violation::InvalidParent { node, parent } => (node, parent),
            Violation::Preferred { node, neighbour } => (node, neighbour),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidParent { node, parent } => {
                write!(f, "invalid-parent {node} -> {parent}")
            }
            Violation::Preferred { node, neighbour } => write!(f, "prefers {node} -> {neighbour}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableTreeReport {
    pub tree: RoutingGraph,
    /// Nodes of the tree, sink included.
    pub size: usize,
    pub violation: Option<Violation>,
    /// Nodes outside the tree that have a valid neighbour in it, each with
    /// its best one.
    pub external: Vec<(NodeId, NodeId)>,
}

impl StableTreeReport {
    pub fn is_stable(&self) -> bool {
        self.violation.is_none()
    }

    /// Stable, and no outside node could attach itself.
    pub fn is_closed(&self) -> bool {
        self.is_stable() && self.external.is_empty()
    }
}

/// Checks an in-arborescence `t` at the sink against the tree notion of
/// stability: every arc's head is valid for its tail, and no tail has a
/// valid neighbour it ranks higher. Validity of `x` for `u` means `x` is in
/// the tree and its tree path avoids `u`'s filter list.
pub fn is_stable_tree(net: &Network, t: &RoutingGraph) -> Result<StableTreeReport, AnalysisError> {
    let sink = net.sink();
    if t.n() != net.n() || !t.is_in_arborescence(sink) {
        return Err(AnalysisError::NotArborescence);
    }
    if let Some((u, v)) = t.arcs().find(|&(u, v)| !net.has_arc(u, v)) {
        return Err(AnalysisError::ForeignArc(u, v));
    }
    let nodes = t.nodes_with_root(sink);
    let paths: Vec<Vec<NodeId>> = net
        .nodes()
        .map(|x| {
            if nodes.contains(&x) {
                actual_path(t, sink, x)
            } else {
                Vec::new()
            }
        })
        .collect();
    let valid = |u: NodeId, x: NodeId| {
        let p = &paths[x.0];
        !p.is_empty() && !p.iter().any(|y| net.filters(u).contains(y))
    };

    let mut violation = None;
    for (u, v) in t.arcs() {
        if !valid(u, v) {
            violation = Some(Violation::InvalidParent { node: u, parent: v });
            break;
        }
        if let Some(&x) = net
            .prefs(u)
            .iter()
            .take_while(|&&x| x != v)
            .find(|&&x| valid(u, x))
        {
            violation = Some(Violation::Preferred {
                node: u,
                neighbour: x,
            });
            break;
        }
    }
    let external = net
        .non_sink()
        .filter(|x| !nodes.contains(x))
        .filter_map(|x| net.prefs(x).iter().find(|&&w| valid(x, w)).map(|&w| (x, w)))
        .collect();
    Ok(StableTreeReport {
        tree: t.clone(),
        size: nodes.len(),
        violation,
        external,
    })
}

/// Every node `v` of `o` ranks its parent above every neighbour outside its
/// `o`-subtree.
pub fn has_strong_stability(net: &Network, s: &SpanningTree, o: &NodeSet) -> bool {
    o.iter().filter(|&&v| v != s.sink()).all(|&v| {
        let sub = q_subtree(s.as_graph(), o, v).expect("v is in o");
        net.prefs(v).iter().copied().find(|x| !sub.contains(x)) == s.parent(v)
    })
}

/// Every maximal subtree `F` of `s[o]` either has all of its out-arcs in
/// `t` or shares no node with `t`.
pub fn is_skeleton(s: &SpanningTree, t: &RoutingGraph, o: &NodeSet) -> bool {
    let in_t = t.nodes_with_root(s.sink());
    q_components(s.as_graph(), o)
        .iter()
        .all(|f| f.is_disjoint(&in_t) || s.as_graph().out_plus(f).is_subset_of(t))
}
