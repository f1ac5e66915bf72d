//! Strongly stable trees and the fair stabilising schedule for networks in
//! which every node filters itself.

use thiserror::Error;

use super::{RoundPlan, ScheduleError, Scheduler};
use crate::analysis::{has_strong_stability, is_skeleton};
use crate::engine::trace::fmt_set;
use crate::engine::EngineState;
use crate::model::{
    actual_path, q_subtree, Network, NodeId, NodeSet, RoutingGraph, SpanningTree, TreeError,
};

/// Nodes of `u` other than the sink, by tree depth and then id.
pub fn bfs_order(u: &NodeSet, tree: &SpanningTree) -> Vec<NodeId> {
    let depth = tree.depths();
    let mut order: Vec<NodeId> = u.iter().copied().filter(|&v| v != tree.sink()).collect();
    order.sort_by_key(|v| (depth[v.0], *v));
    order
}

pub fn reverse_bfs_order(u: &NodeSet, tree: &SpanningTree) -> Vec<NodeId> {
    let mut order = bfs_order(u, tree);
    order.reverse();
    order
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FindStableError {
    #[error("input tree is not an in-arborescence at the sink")]
    NotArborescence,
    #[error("input spanning tree is not strongly stable on {0}")]
    NotStronglyStable(String),
    #[error("input spanning tree is not a skeleton of the input tree")]
    NotSkeleton,
    #[error("tree broke while re-targeting node {node}: {source}")]
    Broken { node: NodeId, source: TreeError },
}

/// Extends strong stability of `s_in` from `o_prev` to the nodes outside
/// `t_in`. `t_in` is the sink component as an arc set.
///
/// The nodes outside `t_in` take their `s_in` arcs; then, repeatedly, the
/// lowest-id leaf of what remains of that forest is re-pointed at its most
/// preferred neighbour outside its own subtree.
pub fn find_stable(
    net: &Network,
    t_in: &RoutingGraph,
    s_in: &SpanningTree,
    o_prev: &NodeSet,
) -> Result<SpanningTree, FindStableError> {
    let sink = net.sink();
    if !t_in.is_in_arborescence(sink) || t_in.arcs().any(|(u, v)| !net.has_arc(u, v)) {
        return Err(FindStableError::NotArborescence);
    }
    if !has_strong_stability(net, s_in, o_prev) {
        return Err(FindStableError::NotStronglyStable(fmt_set(o_prev)));
    }
    if !is_skeleton(s_in, t_in, o_prev) {
        return Err(FindStableError::NotSkeleton);
    }

    let inside = t_in.nodes_with_root(sink);
    let outside: NodeSet = net.nodes().filter(|v| !inside.contains(v)).collect();
    let mut out = t_in.clone();
    for &v in &outside {
        out.set(v, s_in.parent(v));
    }
    let mut forest = outside.clone();
    for _ in 0..outside.len() {
        let v = forest
            .iter()
            .copied()
            .find(|&v| !forest.iter().any(|&u| out.next(u) == Some(v)))
            .expect("a finite forest has a leaf");
        let sub = q_subtree(&out, &outside, v).expect("v is outside t_in");
        let w = net
            .prefs(v)
            .iter()
            .copied()
            .find(|x| !sub.contains(x))
            .expect("the current parent lies outside the subtree");
        out.set(v, Some(w));
        if !out.is_in_arborescence(sink) || out.sink_component(sink).len() != net.n() {
            return Err(FindStableError::Broken {
                node: v,
                source: TreeError::NotSpanning(v),
            });
        }
        forest.remove(&v);
    }
    SpanningTree::new(net, out).map_err(|source| FindStableError::Broken { node: sink, source })
}

/// The spanning tree and the set of nodes that have been opaque (or
/// promoted) so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabiliseState {
    pub tree: SpanningTree,
    pub ever_opaque: NodeSet,
}

impl StabiliseState {
    /// Shortest-path tree and no opaque history.
    pub fn initial(net: &Network) -> Self {
        Self {
            tree: SpanningTree::shortest_path(net),
            ever_opaque: NodeSet::new(),
        }
    }

    /// Complement of `ever_opaque`; always contains the sink.
    pub fn always_clear(&self, net: &Network) -> NodeSet {
        net.nodes()
            .filter(|v| !self.ever_opaque.contains(v))
            .collect()
    }
}

/// Per-round bookkeeping of [`FairStabiliseScheduler`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: u32,
    /// Opaque nodes at the start of the round.
    pub opaque: NodeSet,
    pub promoted: Option<NodeId>,
    /// Ever-opaque set at the end of the round, promotion included.
    pub ever_opaque: NodeSet,
    /// Some packet was still undelivered after the round.
    pub imperfect: bool,
}

#[derive(Debug, Clone, Default)]
pub struct FairStabiliseScheduler {
    state: Option<StabiliseState>,
    promote: Option<NodeId>,
    opaque: NodeSet,
    records: Vec<RoundRecord>,
    violations: Vec<String>,
}

impl FairStabiliseScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from a given tree instead of the shortest-path tree.
    pub fn with_tree(tree: SpanningTree) -> Self {
        Self {
            state: Some(StabiliseState {
                tree,
                ever_opaque: NodeSet::new(),
            }),
            ..Self::default()
        }
    }

    pub fn state(&self) -> Option<&StabiliseState> {
        self.state.as_ref()
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    /// Property failures seen so far, one line each.
    pub fn violations(&self) -> &[String] {
        &self.violations
    }
}

impl Scheduler for FairStabiliseScheduler {
    fn name(&self) -> &'static str {
        "fair-stabilise"
    }

    fn plan(&mut self, state: &EngineState) -> Result<RoundPlan, ScheduleError> {
        let net = state.network();
        if !net.all_filters_self() {
            return Err(ScheduleError::FilterMismatch {
                scheduler: "fair-stabilise",
                required: "self-only",
            });
        }
        let round = state.round() + 1;
        let sink = net.sink();
        let st = self
            .state
            .get_or_insert_with(|| StabiliseState::initial(net));

        let t = state.routing_graph().sink_tree(sink);
        let inside = t.nodes_with_root(sink);
        let opaque: NodeSet = net.nodes().filter(|v| !inside.contains(v)).collect();
        let tree = find_stable(net, &t, &st.tree, &st.ever_opaque).map_err(|e| {
            ScheduleError::Contract {
                round,
                msg: format!("find-stable: {e}"),
            }
        })?;
        st.tree = tree;
        st.ever_opaque.extend(opaque.iter().copied());
        let clear = st.always_clear(net);
        let head = bfs_order(&st.ever_opaque, &st.tree);
        let tail = reverse_bfs_order(&clear, &st.tree);

        // after the first block the ever-opaque nodes sit on their tree arcs
        let mut plane = state.plane().clone();
        for &v in &head {
            plane.activate(net, v);
        }
        let expected = st.tree.as_graph().out_plus(&st.ever_opaque);
        let rg = plane.routing_graph();
        let ok = st
            .ever_opaque
            .iter()
            .all(|&v| rg.next(v) == expected.next(v) && plane.path(v) == &actual_path(rg, sink, v));
        if !ok {
            self.violations.push(format!(
                "round {round}: ever-opaque nodes off their tree arcs after the first block"
            ));
        }

        self.promote = tail.first().copied();
        self.opaque = opaque;
        let notes = vec![format!(
            "stabilise tree={} ever-opaque={} promote={}",
            st.tree.as_graph(),
            fmt_set(&st.ever_opaque),
            self.promote.map_or("none".to_string(), |v| v.to_string())
        )];
        Ok(RoundPlan {
            order: head.into_iter().chain(tail).collect(),
            notes,
        })
    }

    fn observe(&mut self, state: &EngineState) -> Result<(), ScheduleError> {
        let net = state.network();
        let round = state.round();
        let Some(st) = self.state.as_mut() else {
            return Ok(());
        };
        let rg = state.routing_graph();
        if !st
            .tree
            .as_graph()
            .out_plus(&st.ever_opaque)
            .is_subset_of(rg)
        {
            self.violations.push(format!(
                "round {round}: tree arcs of ever-opaque nodes missing from the routing graph"
            ));
        }
        let promoted = self.promote.take();
        if let Some(v) = promoted {
            let mut g = st.tree.as_graph().clone();
            g.set(v, rg.next(v));
            st.tree = SpanningTree::new(net, g).map_err(|e| ScheduleError::Contract {
                round,
                msg: format!("promoting {v}: {e}"),
            })?;
            st.ever_opaque.insert(v);
        }
        if !has_strong_stability(net, &st.tree, &st.ever_opaque) {
            self.violations.push(format!(
                "round {round}: tree not strongly stable on the ever-opaque set"
            ));
        }
        self.records.push(RoundRecord {
            round,
            opaque: std::mem::take(&mut self.opaque),
            promoted,
            ever_opaque: st.ever_opaque.clone(),
            imperfect: !state.all_delivered(),
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::{run, AdversaryPolicy, StopCondition};
    use crate::model::fixtures;

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().map(NodeId).collect()
    }

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn g(n: usize, arcs: &[(usize, usize)]) -> RoutingGraph {
        RoutingGraph::from_arcs(n, arcs.iter().map(|&(u, v)| (NodeId(u), NodeId(v))))
    }

    #[test]
    fn bfs_orders() {
        let net = fixtures::tri();
        let tree = SpanningTree::new(&net, g(3, &[(1, 0), (2, 1)])).unwrap();
        assert_eq!(bfs_order(&set(&[1, 2]), &tree), ids(&[1, 2]));
        assert_eq!(reverse_bfs_order(&set(&[1, 2]), &tree), ids(&[2, 1]));
        assert!(bfs_order(&set(&[0]), &tree).is_empty());
        assert_eq!(reverse_bfs_order(&set(&[0, 2]), &tree), ids(&[2]));
        let star = fixtures::star(4);
        let tree = SpanningTree::shortest_path(&star);
        assert_eq!(bfs_order(&set(&[3, 2]), &tree), ids(&[2, 3]));
    }

    #[test]
    fn find_stable_on_notme2() {
        let net = fixtures::notme2();
        let s_in = SpanningTree::new(&net, g(3, &[(1, 0), (2, 0)])).unwrap();
        let out = find_stable(&net, &RoutingGraph::empty(3), &s_in, &NodeSet::new()).unwrap();
        assert_eq!(out.as_graph(), &g(3, &[(1, 2), (2, 0)]));
    }

    #[test]
    fn find_stable_keeps_a_spanning_input() {
        let net = fixtures::notme2();
        let t = g(3, &[(1, 2), (2, 0)]);
        let s_in = SpanningTree::new(&net, t.clone()).unwrap();
        let out = find_stable(&net, &t, &s_in, &NodeSet::new()).unwrap();
        assert_eq!(out.as_graph(), &t);
    }

    #[test]
    fn find_stable_checks_its_inputs() {
        let net = fixtures::notme2();
        let s_in = SpanningTree::new(&net, g(3, &[(1, 0), (2, 0)])).unwrap();
        // 1 prefers 2 over its parent 0, and 2 is outside 1's subtree
        assert!(matches!(
            find_stable(&net, &RoutingGraph::empty(3), &s_in, &set(&[1])),
            Err(FindStableError::NotStronglyStable(_))
        ));
        assert_eq!(
            find_stable(&net, &g(3, &[(1, 2), (2, 1)]), &s_in, &NodeSet::new()),
            Err(FindStableError::NotArborescence)
        );
    }

    #[test]
    fn notme2_first_round() {
        let net = Arc::new(fixtures::notme2());
        let mut state = EngineState::with_first_choices(net);
        let mut s = FairStabiliseScheduler::new();
        let plan = s.plan(&state).unwrap();
        assert_eq!(plan.order, ids(&[2, 1]));
        state.run_round(&plan.order, AdversaryPolicy::Stay).unwrap();
        s.observe(&state).unwrap();
        assert!(state.all_delivered());
        assert!(s.violations().is_empty(), "{:?}", s.violations());
    }

    #[test]
    fn notme2_reaches_equilibrium() {
        let net = Arc::new(fixtures::notme2());
        let mut state = EngineState::with_first_choices(net);
        let mut s = FairStabiliseScheduler::new();
        let out = run(
            &mut state,
            &mut s,
            3,
            StopCondition::Equilibrium,
            AdversaryPolicy::Stay,
        )
        .unwrap();
        assert!(out.met);
        assert!(out.rounds <= 3);
        assert_eq!(state.sink_component().len(), 3);
    }

    #[test]
    fn empty_filters_are_rejected() {
        let state = EngineState::with_first_choices(Arc::new(fixtures::nogood()));
        assert!(matches!(
            FairStabiliseScheduler::new().plan(&state),
            Err(ScheduleError::FilterMismatch { .. })
        ));
    }
}
