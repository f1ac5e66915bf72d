use std::fmt;

use super::{NodeId, NodeSet, RoutingPath};

/// A set of arcs with out-degree at most one per node.
///
/// Used both for the routing graph proper and for every other arc set that
/// shows up in the analysis (sink components, subtrees, `out_plus` results):
/// all of them are partial next-hop functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoutingGraph {
    next: Vec<Option<NodeId>>,
}

impl RoutingGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            next: vec![None; n],
        }
    }

    pub fn from_next(next: Vec<Option<NodeId>>) -> Self {
        Self { next }
    }

    /// Builds from an arc list. Later arcs from the same tail win.
    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut g = Self::empty(n);
        for (u, v) in arcs {
            g.next[u.0] = Some(v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.next.len()
    }

    pub fn next(&self, v: NodeId) -> Option<NodeId> {
        self.next[v.0]
    }

    pub fn set(&mut self, v: NodeId, w: Option<NodeId>) {
        self.next[v.0] = w;
    }

    pub fn as_slice(&self) -> &[Option<NodeId>] {
        &self.next
    }

    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.next
            .iter()
            .enumerate()
            .filter_map(|(u, w)| w.map(|w| (NodeId(u), w)))
    }

    pub fn arc_count(&self) -> usize {
        self.next.iter().filter(|w| w.is_some()).count()
    }

    pub fn contains_arc(&self, u: NodeId, v: NodeId) -> bool {
        self.next[u.0] == Some(v)
    }

    /// `true` iff every arc of `self` is also an arc of `other`.
    pub fn is_subset_of(&self, other: &RoutingGraph) -> bool {
        self.arcs().all(|(u, v)| other.contains_arc(u, v))
    }

    /// Arcs whose tail lies in `u`: the arcs induced by `u` plus those leaving it.
    pub fn out_plus(&self, u: &NodeSet) -> RoutingGraph {
        let next = self
            .next
            .iter()
            .enumerate()
            .map(|(x, w)| if u.contains(&NodeId(x)) { *w } else { None })
            .collect();
        RoutingGraph { next }
    }

    /// Arcs with both endpoints in `u`.
    pub fn induced(&self, u: &NodeSet) -> RoutingGraph {
        let next = self
            .next
            .iter()
            .enumerate()
            .map(|(x, w)| match w {
                Some(w) if u.contains(&NodeId(x)) && u.contains(w) => Some(*w),
                _ => None,
            })
            .collect();
        RoutingGraph { next }
    }

    /// Nodes whose next-hop walk ends at `sink`, including `sink` itself.
    pub fn sink_component(&self, sink: NodeId) -> NodeSet {
        let n = self.n();
        // 0 unknown, 1 on stack, 2 reaches sink, 3 does not
        let mut state = vec![0u8; n];
        state[sink.0] = 2;
        let mut stack = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut cur = start;
            let verdict = loop {
                match state[cur] {
                    2 => break 2,
                    1 | 3 => break 3,
                    _ => {}
                }
                state[cur] = 1;
                stack.push(cur);
                match self.next[cur] {
                    Some(w) => cur = w.0,
                    None => break 3,
                }
            };
            for x in stack.drain(..) {
                state[x] = verdict;
            }
        }
        (0..n).filter(|&x| state[x] == 2).map(NodeId).collect()
    }

    /// The sink component as an arc set: arcs of every node that reaches the sink.
    pub fn sink_tree(&self, sink: NodeId) -> RoutingGraph {
        self.out_plus(&self.sink_component(sink))
    }

    /// Nodes incident to some arc, plus `root`. For an in-arborescence rooted
    /// at `root` these are exactly its nodes.
    pub fn nodes_with_root(&self, root: NodeId) -> NodeSet {
        let mut nodes: NodeSet = self.arcs().flat_map(|(u, v)| [u, v]).collect();
        nodes.insert(root);
        nodes
    }

    /// `true` iff every arc tail reaches `root` (no cycles, no dangling heads).
    pub fn is_in_arborescence(&self, root: NodeId) -> bool {
        if self.next[root.0].is_some() {
            return false;
        }
        let comp = self.sink_component(root);
        self.arcs().all(|(u, _)| comp.contains(&u))
    }

    /// The unique cycle reachable from `v` by following next hops, if any.
    /// Returned starting at its smallest node.
    pub fn cycle_from(&self, v: NodeId) -> Option<Vec<NodeId>> {
        let n = self.n();
        let mut seen = vec![usize::MAX; n];
        let mut walk = Vec::new();
        let mut cur = v;
        loop {
            if seen[cur.0] != usize::MAX {
                let cycle = &walk[seen[cur.0]..];
                return Some(rotate_to_min(cycle));
            }
            seen[cur.0] = walk.len();
            walk.push(cur);
            cur = self.next[cur.0]?;
        }
    }
}

pub(crate) fn rotate_to_min(cycle: &[NodeId]) -> Vec<NodeId> {
    let k = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, x)| **x)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle[k..].iter().chain(&cycle[..k]).copied().collect()
}

impl fmt::Display for RoutingGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (u, v)) in self.arcs().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}->{v}")?;
        }
        write!(f, "}}")
    }
}

/// Walks next hops from `v`. Returns the `v,sink`-path, or the empty path if
/// the walk runs into a cycle or a node without a next hop. The sink's own
/// path is `(sink)`.
pub fn actual_path(rg: &RoutingGraph, sink: NodeId, v: NodeId) -> RoutingPath {
    let n = rg.n();
    let mut path = vec![v];
    let mut cur = v;
    while cur != sink {
        match rg.next(cur) {
            Some(w) if path.len() <= n => {
                path.push(w);
                cur = w;
            }
            _ => return Vec::new(),
        }
    }
    if path.len() > n {
        return Vec::new();
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().map(NodeId).collect()
    }

    fn g(n: usize, arcs: &[(usize, usize)]) -> RoutingGraph {
        RoutingGraph::from_arcs(n, arcs.iter().map(|&(u, v)| (NodeId(u), NodeId(v))))
    }

    #[test]
    fn actual_path_examples() {
        let r = NodeId(0);
        let tree = g(3, &[(1, 0), (2, 1)]);
        assert_eq!(
            actual_path(&tree, r, NodeId(2)),
            vec![NodeId(2), NodeId(1), NodeId(0)]
        );
        let cyc = g(3, &[(1, 2), (2, 1)]);
        assert!(actual_path(&cyc, r, NodeId(1)).is_empty());
        assert_eq!(actual_path(&g(3, &[(1, 0)]), r, r), vec![r]);
        assert!(actual_path(&g(3, &[(1, 0)]), r, NodeId(2)).is_empty());
    }

    #[test]
    fn out_plus_examples() {
        let tree = g(3, &[(1, 0), (2, 1)]);
        assert_eq!(tree.out_plus(&set(&[2])), g(3, &[(2, 1)]));
        assert_eq!(tree.out_plus(&set(&[1, 2])), tree);
        assert_eq!(
            RoutingGraph::empty(3).out_plus(&set(&[0, 1, 2])),
            RoutingGraph::empty(3)
        );
        assert_eq!(tree.induced(&set(&[1, 2])), g(3, &[(2, 1)]));
    }

    #[test]
    fn sink_component_and_cycles() {
        let rg = g(5, &[(1, 0), (2, 3), (3, 2), (4, 2)]);
        assert_eq!(rg.sink_component(NodeId(0)), set(&[0, 1]));
        assert_eq!(rg.cycle_from(NodeId(4)), Some(vec![NodeId(2), NodeId(3)]));
        assert_eq!(rg.cycle_from(NodeId(1)), None);
        assert!(!rg.is_in_arborescence(NodeId(0)));
        assert!(rg.sink_tree(NodeId(0)).is_in_arborescence(NodeId(0)));
    }
}
