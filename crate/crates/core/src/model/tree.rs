use thiserror::Error;

use super::{Network, NodeId, NodeSet, RoutingGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree has {got} arcs, a spanning tree on {n} nodes needs {}", n - 1)]
    ArcCount { got: usize, n: usize },
    #[error("node {0} does not reach the root")]
    NotSpanning(NodeId),
    #[error("tree arc {0}->{1} is not an arc of the network")]
    ForeignArc(NodeId, NodeId),
    #[error("node {0} is not in the subtree node set")]
    NotInSet(NodeId),
}

/// An in-arborescence rooted at the sink covering every node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanningTree {
    sink: NodeId,
    parent: RoutingGraph,
}

impl SpanningTree {
    /// Checks the arc count, that every node reaches the sink and that every
    /// tree arc exists in `net`.
    pub fn new(net: &Network, parent: RoutingGraph) -> Result<Self, TreeError> {
        let n = net.n();
        let sink = net.sink();
        let got = parent.arc_count();
        if got != n - 1 || parent.next(sink).is_some() {
            return Err(TreeError::ArcCount { got, n });
        }
        if let Some((u, v)) = parent.arcs().find(|&(u, v)| !net.has_arc(u, v)) {
            return Err(TreeError::ForeignArc(u, v));
        }
        let comp = parent.sink_component(sink);
        if let Some(v) = net.nodes().find(|v| !comp.contains(v)) {
            return Err(TreeError::NotSpanning(v));
        }
        Ok(Self { sink, parent })
    }

    /// Shortest-path in-arborescence over the all-choice graph. Among the
    /// neighbours one hop closer to the sink, each node takes its best-ranked one.
    pub fn shortest_path(net: &Network) -> Self {
        let dist = net.distances_to_sink();
        let next = net
            .nodes()
            .map(|v| {
                let d = dist[v.0]?;
                net.prefs(v)
                    .iter()
                    .copied()
                    .find(|w| d > 0 && dist[w.0] == Some(d - 1))
            })
            .collect();
        Self::new(net, RoutingGraph::from_next(next))
            .expect("validated network has a shortest-path tree")
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent.next(v)
    }

    pub fn as_graph(&self) -> &RoutingGraph {
        &self.parent
    }

    pub fn into_graph(self) -> RoutingGraph {
        self.parent
    }

    /// Tree distance of every node to the sink.
    pub fn depths(&self) -> Vec<usize> {
        depths(&self.parent, self.sink)
    }

    /// `true` iff `anc` lies on the tree path from `v` to the sink.
    pub fn is_ancestor(&self, anc: NodeId, v: NodeId) -> bool {
        let mut cur = Some(v);
        while let Some(x) = cur {
            if x == anc {
                return true;
            }
            cur = self.parent.next(x);
        }
        false
    }
}

pub(crate) fn depths(parent: &RoutingGraph, sink: NodeId) -> Vec<usize> {
    let n = parent.n();
    let mut depth: Vec<Option<usize>> = vec![None; n];
    depth[sink.0] = Some(0);
    for start in 0..n {
        let mut chain = Vec::new();
        let mut cur = NodeId(start);
        let base = loop {
            if let Some(d) = depth[cur.0] {
                break d;
            }
            chain.push(cur);
            match parent.next(cur) {
                Some(w) if chain.len() <= n => cur = w,
                _ => break usize::MAX / 2,
            }
        };
        for (i, x) in chain.iter().rev().enumerate() {
            depth[x.0] = Some(base + i + 1);
        }
    }
    depth.into_iter().map(|d| d.unwrap_or(usize::MAX)).collect()
}

fn children(tree: &RoutingGraph) -> Vec<Vec<NodeId>> {
    let mut ch = vec![Vec::new(); tree.n()];
    for (u, v) in tree.arcs() {
        ch[v.0].push(u);
    }
    ch
}

/// The `Q`-subtree of `v`: the maximal subtree rooted at `v` of the forest
/// `tree[Q]`, i.e. `v` plus every node that reaches `v` through tree arcs
/// without leaving `Q`.
pub fn q_subtree(tree: &RoutingGraph, q: &NodeSet, v: NodeId) -> Result<NodeSet, TreeError> {
    if !q.contains(&v) {
        return Err(TreeError::NotInSet(v));
    }
    let ch = children(tree);
    let mut out = NodeSet::from([v]);
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for &c in &ch[x.0] {
            if q.contains(&c) && out.insert(c) {
                stack.push(c);
            }
        }
    }
    Ok(out)
}

/// Maximal subtrees of the forest `tree[Q]`, each given by its node set.
/// Ordered by their root.
pub fn q_components(tree: &RoutingGraph, q: &NodeSet) -> Vec<NodeSet> {
    q.iter()
        .filter(|&&v| tree.next(v).is_none_or(|p| !q.contains(&p)))
        .map(|&root| q_subtree(tree, q, root).expect("root is in q"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().map(NodeId).collect()
    }

    // r=0, a=1, b=2, c=3, d=4, e=5 on the path e->d->c->b->a->r
    fn path_tree() -> RoutingGraph {
        RoutingGraph::from_arcs(6, (1..6).map(|v| (NodeId(v), NodeId(v - 1))))
    }

    #[test]
    fn q_subtree_cut_by_missing_node() {
        let t = path_tree();
        assert_eq!(
            q_subtree(&t, &set(&[2, 3, 5]), NodeId(2)).unwrap(),
            set(&[2, 3])
        );
        assert_eq!(q_subtree(&t, &set(&[4]), NodeId(4)).unwrap(), set(&[4]));
        assert_eq!(
            q_subtree(&t, &set(&[0, 1, 2, 3, 4, 5]), NodeId(0)).unwrap(),
            set(&[0, 1, 2, 3, 4, 5])
        );
        assert_eq!(
            q_subtree(&t, &set(&[1]), NodeId(2)),
            Err(TreeError::NotInSet(NodeId(2)))
        );
    }

    #[test]
    fn components_of_restricted_forest() {
        let t = path_tree();
        let comps = q_components(&t, &set(&[2, 3, 5]));
        assert_eq!(comps, vec![set(&[2, 3]), set(&[5])]);
    }

    #[test]
    fn shortest_path_tree_prefers_rank() {
        let net = fixtures::tri();
        let s = SpanningTree::shortest_path(&net);
        assert_eq!(s.parent(NodeId(1)), Some(NodeId(0)));
        // b is adjacent to r, so distance 1 wins over its first choice a
        assert_eq!(s.parent(NodeId(2)), Some(NodeId(0)));
        assert_eq!(s.depths(), vec![0, 1, 1]);
    }

    #[test]
    fn spanning_tree_rejects_cycles_and_foreign_arcs() {
        let net = fixtures::nogood();
        let cyc = RoutingGraph::from_arcs(3, [(NodeId(1), NodeId(2)), (NodeId(2), NodeId(1))]);
        assert!(matches!(
            SpanningTree::new(&net, cyc),
            Err(TreeError::NotSpanning(_))
        ));
        let star = fixtures::star(3);
        let foreign = RoutingGraph::from_arcs(3, [(NodeId(1), NodeId(0)), (NodeId(2), NodeId(1))]);
        assert_eq!(
            SpanningTree::new(&star, foreign),
            Err(TreeError::ForeignArc(NodeId(2), NodeId(1)))
        );
    }
}
