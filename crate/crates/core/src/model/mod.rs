//! Static problem instances and pure graph structure.
//!
//! A [`Network`] is the all-choice graph together with every node's strict
//! next-hop ranking and its filtering list. Everything dynamic (routing
//! paths, packets) lives in [`crate::engine`]; this module only holds values
//! that never change once built.

mod first_class;
pub mod format;
mod graph;
mod tree;

pub use first_class::FirstClassDecomposition;
pub use format::{Instance, ParseError};
pub use graph::{actual_path, RoutingGraph};
pub use tree::{q_components, q_subtree, SpanningTree, TreeError};

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Dense node index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

/// Ordered node set. Iteration order is by ascending [`NodeId`].
pub type NodeSet = BTreeSet<NodeId>;

/// Believed (or actual) path to the sink. Empty means "opaque".
pub type RoutingPath = Vec<NodeId>;

/// Reasons a [`Network`] may be rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("network needs at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("node {node} out of range for a network of {n} nodes")]
    OutOfRange { node: usize, n: usize },
    #[error("the sink {0} has outgoing arcs")]
    SinkHasOutArc(NodeId),
    #[error("node {0} has no out-neighbour")]
    NoOutNeighbour(NodeId),
    #[error("node {node} lists {neighbour} more than once")]
    DuplicatePreference { node: NodeId, neighbour: NodeId },
    #[error("node {0} lists itself as a next hop")]
    SelfPreference(NodeId),
    #[error("node {0} cannot reach the sink in the all-choice graph")]
    Unreachable(NodeId),
    #[error("per-node tables have {got} entries, expected {expected}")]
    Shape { got: usize, expected: usize },
}

/// The static instance: all-choice graph, rankings and filtering lists.
///
/// `prefs[v][k]` is the `(k+1)`-th choice of `v`. The arc `(v, prefs[v][k])`
/// therefore belongs to the class of `(k+1)`-th choice arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    sink: NodeId,
    prefs: Vec<Vec<NodeId>>,
    filters: Vec<NodeSet>,
}

impl Network {
    /// Builds and validates a network.
    pub fn new(
        sink: NodeId,
        prefs: Vec<Vec<NodeId>>,
        filters: Vec<NodeSet>,
    ) -> Result<Self, NetworkError> {
        let net = Self::new_unchecked(sink, prefs, filters);
        net.validate()?;
        Ok(net)
    }

    /// Builds a network without checking any invariant. Call
    /// [`Network::validate`] before handing it to the engine.
    pub fn new_unchecked(sink: NodeId, prefs: Vec<Vec<NodeId>>, filters: Vec<NodeSet>) -> Self {
        Self {
            sink,
            prefs,
            filters,
        }
    }

    /// Network where every node has an empty filtering list.
    pub fn with_empty_filters(sink: NodeId, prefs: Vec<Vec<NodeId>>) -> Result<Self, NetworkError> {
        let n = prefs.len();
        Self::new(sink, prefs, vec![NodeSet::new(); n])
    }

    /// Network where every node filters only itself.
    pub fn with_self_filters(sink: NodeId, prefs: Vec<Vec<NodeId>>) -> Result<Self, NetworkError> {
        let filters = (0..prefs.len())
            .map(|v| NodeSet::from([NodeId(v)]))
            .collect();
        Self::new(sink, prefs, filters)
    }

    pub fn n(&self) -> usize {
        self.prefs.len()
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n()).map(NodeId)
    }

    /// All nodes except the sink, ascending.
    pub fn non_sink(&self) -> impl Iterator<Item = NodeId> + '_ {
        let sink = self.sink;
        self.nodes().filter(move |&v| v != sink)
    }

    pub fn prefs(&self, v: NodeId) -> &[NodeId] {
        &self.prefs[v.0]
    }

    pub fn filters(&self, v: NodeId) -> &NodeSet {
        &self.filters[v.0]
    }

    /// 1-based rank of `w` in `v`'s list, or `None` if `(v, w)` is not an arc.
    pub fn rank(&self, v: NodeId, w: NodeId) -> Option<usize> {
        self.prefs[v.0].iter().position(|&x| x == w).map(|k| k + 1)
    }

    pub fn has_arc(&self, v: NodeId, w: NodeId) -> bool {
        self.prefs[v.0].contains(&w)
    }

    /// Most preferred neighbour, the head of `v`'s first-choice arc.
    pub fn first_choice(&self, v: NodeId) -> Option<NodeId> {
        self.prefs[v.0].first().copied()
    }

    /// `true` iff `v` ranks `x` strictly above `y`. Non-neighbours rank below
    /// every neighbour.
    pub fn prefers(&self, v: NodeId, x: NodeId, y: NodeId) -> bool {
        match (self.rank(v, x), self.rank(v, y)) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        }
    }

    pub fn all_filters_empty(&self) -> bool {
        self.filters.iter().all(|d| d.is_empty())
    }

    /// Every node filters exactly itself.
    pub fn all_filters_self(&self) -> bool {
        self.filters
            .iter()
            .enumerate()
            .all(|(v, d)| d.len() == 1 && d.contains(&NodeId(v)))
    }

    /// Checks every structural assumption the dynamics rely on.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let n = self.n();
        if n < 2 {
            return Err(NetworkError::TooSmall(n));
        }
        if self.filters.len() != n {
            return Err(NetworkError::Shape {
                got: self.filters.len(),
                expected: n,
            });
        }
        if self.sink.0 >= n {
            return Err(NetworkError::OutOfRange {
                node: self.sink.0,
                n,
            });
        }
        for (v, list) in self.prefs.iter().enumerate() {
            let v = NodeId(v);
            let mut seen = NodeSet::new();
            for &w in list {
                if w.0 >= n {
                    return Err(NetworkError::OutOfRange { node: w.0, n });
                }
                if w == v {
                    return Err(NetworkError::SelfPreference(v));
                }
                if !seen.insert(w) {
                    return Err(NetworkError::DuplicatePreference {
                        node: v,
                        neighbour: w,
                    });
                }
            }
            if v == self.sink && !list.is_empty() {
                return Err(NetworkError::SinkHasOutArc(v));
            }
            if v != self.sink && list.is_empty() {
                return Err(NetworkError::NoOutNeighbour(v));
            }
        }
        for d in &self.filters {
            if let Some(bad) = d.iter().find(|x| x.0 >= n) {
                return Err(NetworkError::OutOfRange { node: bad.0, n });
            }
        }
        let dist = self.distances_to_sink();
        if let Some(v) = self.nodes().find(|v| dist[v.0].is_none()) {
            return Err(NetworkError::Unreachable(v));
        }
        Ok(())
    }

    /// Hop distance from each node to the sink in the all-choice graph.
    pub fn distances_to_sink(&self) -> Vec<Option<usize>> {
        let n = self.n();
        let mut rev: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for v in self.nodes() {
            for &w in self.prefs(v) {
                if w.0 < n {
                    rev[w.0].push(v);
                }
            }
        }
        let mut dist = vec![None; n];
        if self.sink.0 >= n {
            return dist;
        }
        dist[self.sink.0] = Some(0);
        let mut queue = VecDeque::from([self.sink]);
        while let Some(w) = queue.pop_front() {
            let d = dist[w.0].unwrap_or(0);
            for &v in &rev[w.0] {
                if dist[v.0].is_none() {
                    dist[v.0] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// The graph of first-choice arcs, as a routing graph.
    pub fn first_choice_graph(&self) -> RoutingGraph {
        RoutingGraph::from_next(self.nodes().map(|v| self.first_choice(v)).collect())
    }
}

/// Small named fixtures used throughout the tests and docs.
pub mod fixtures {
    use super::*;

    /// Sink 0; `a`=1 prefers `[r, b]`; `b`=2 prefers `[a, r]`; no filters.
    pub fn tri() -> Network {
        Network::with_empty_filters(
            NodeId(0),
            vec![
                vec![],
                vec![NodeId(0), NodeId(2)],
                vec![NodeId(1), NodeId(0)],
            ],
        )
        .expect("valid fixture")
    }

    /// Two nodes that each prefer the other over the sink; no filters.
    /// Has no equilibrium.
    pub fn nogood() -> Network {
        Network::with_empty_filters(
            NodeId(0),
            vec![
                vec![],
                vec![NodeId(2), NodeId(0)],
                vec![NodeId(1), NodeId(0)],
            ],
        )
        .expect("valid fixture")
    }

    /// Same topology as [`nogood`] but each node filters itself.
    pub fn notme2() -> Network {
        Network::with_self_filters(
            NodeId(0),
            vec![
                vec![],
                vec![NodeId(2), NodeId(0)],
                vec![NodeId(1), NodeId(0)],
            ],
        )
        .expect("valid fixture")
    }

    /// Every non-sink node's only arc is to the sink.
    pub fn star(n: usize) -> Network {
        let prefs = (0..n)
            .map(|v| if v == 0 { vec![] } else { vec![NodeId(0)] })
            .collect();
        Network::with_empty_filters(NodeId(0), prefs).expect("valid fixture")
    }
}
