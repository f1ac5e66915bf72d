use std::sync::Arc;

use nexthop_core::analysis::{
    enumerate_equilibria, has_strong_stability, max_stable_tree, DEFAULT_BUDGET,
};
use nexthop_core::engine::{exhaustive_delivery, run, AdversaryPolicy, EngineState, StopCondition};
use nexthop_core::gadgets::{build_reduction, verify_dichotomy, CnfFormula};
use nexthop_core::model::{
    fixtures, q_subtree, Network, NodeId, NodeSet, RoutingGraph, SpanningTree,
};
use nexthop_core::schedulers::{CoordinateScheduler, FairStabiliseScheduler};

fn set(v: &[usize]) -> NodeSet {
    v.iter().copied().map(NodeId).collect()
}

// r=0, a=1, b=2, c=3, d=4, e=5; the tree is the path e -> d -> c -> b -> a -> r
fn path_network(b_prefs: &[usize]) -> (Network, SpanningTree) {
    let p = |v: &[usize]| v.iter().copied().map(NodeId).collect::<Vec<_>>();
    let net = Network::with_self_filters(
        NodeId(0),
        vec![vec![], p(&[0]), p(b_prefs), p(&[2]), p(&[3]), p(&[4])],
    )
    .unwrap();
    let tree = RoutingGraph::from_arcs(
        6,
        [(1, 0), (2, 1), (3, 2), (4, 3), (5, 4)].map(|(u, v)| (NodeId(u), NodeId(v))),
    );
    let s = SpanningTree::new(&net, tree).unwrap();
    (net, s)
}

#[test]
fn restricted_subtree_cuts_at_nodes_outside_the_set() {
    let (_, s) = path_network(&[1, 4, 5, 0]);
    assert_eq!(
        q_subtree(s.as_graph(), &set(&[2, 3, 5]), NodeId(2)).unwrap(),
        set(&[2, 3])
    );
}

#[test]
fn strong_stability_on_a_path() {
    // b ranks a above d, e and r
    let (net, s) = path_network(&[1, 4, 5, 0]);
    assert!(has_strong_stability(&net, &s, &set(&[2, 3, 5])));
    // e is not below b once d is left out, so preferring it breaks the property
    let (net, s) = path_network(&[5, 1, 4, 0]);
    assert!(!has_strong_stability(&net, &s, &set(&[2, 3, 5])));
    // d is below b in the restricted forest only if d is in the set
    let (net, s) = path_network(&[4, 1, 0]);
    assert!(!has_strong_stability(&net, &s, &set(&[2, 3, 5])));
    assert!(has_strong_stability(&net, &s, &set(&[2, 3, 4])));
}

#[test]
fn nogood_routes_every_packet_in_two_rounds() {
    let net = Arc::new(fixtures::nogood());
    assert!(enumerate_equilibria(&net, DEFAULT_BUDGET)
        .unwrap()
        .is_empty());
    assert_eq!(max_stable_tree(&net, DEFAULT_BUDGET).unwrap().size, 1);
    let clear = RoutingGraph::from_next(vec![None, Some(NodeId(0)), Some(NodeId(0))]);
    let mut state = EngineState::new(net.clone(), clear.clone());
    let o = run(
        &mut state,
        &mut CoordinateScheduler::new(),
        10,
        StopCondition::AllDelivered,
        AdversaryPolicy::Stay,
    )
    .unwrap();
    assert_eq!(o.all_delivered_round, Some(2));
    let mut state = EngineState::new(net, clear);
    let done = exhaustive_delivery(&mut state, &mut CoordinateScheduler::new(), 2).unwrap();
    assert_eq!(done, vec![Some(2), Some(2)]);
}

#[test]
fn notme2_reaches_equilibrium_within_n_rounds() {
    let net = Arc::new(fixtures::notme2());
    for initial in [
        RoutingGraph::empty(3),
        net.first_choice_graph(),
        RoutingGraph::from_next(vec![None, Some(NodeId(0)), Some(NodeId(0))]),
    ] {
        let mut state = EngineState::new(net.clone(), initial);
        let o = run(
            &mut state,
            &mut FairStabiliseScheduler::new(),
            3,
            StopCondition::Equilibrium,
            AdversaryPolicy::Stay,
        )
        .unwrap();
        assert!(o.met);
        assert!(o.equilibrium_round.unwrap() <= 3);
        assert_eq!(o.all_delivered_round, Some(1));
    }
}

#[test]
fn reduction_size_and_filters() {
    let f = CnfFormula::new(2, vec![[1, -2, 2]]).unwrap();
    let g = build_reduction(&f, 0);
    assert_eq!(g.net.n(), 4 * 2 + 5 + 2);
    let f = CnfFormula::new(2, vec![[1, 2, 2], [-1, -2, 1], [2, 2, -1]]).unwrap();
    let g = build_reduction(&f, 3);
    assert_eq!(g.net.n(), 4 * 2 + 5 * 3 + 3 + 2);
    assert!(g.net.nodes().all(|v| g.net.filters(v).len() == 1));
}

#[test]
fn satisfiable_formula_gives_a_spanning_stable_tree() {
    let f = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
    let r = verify_dichotomy(&f, 2, 50_000_000).unwrap();
    assert!(r.holds(), "{:?}", r.failures);
    assert_eq!(r.max_tree, r.nodes);
    assert!(r.spanning.is_some());
}

#[test]
fn unsatisfiable_formula_keeps_padding_out() {
    let f = CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap();
    let r = verify_dichotomy(&f, 2, 50_000_000).unwrap();
    assert!(r.holds(), "{:?}", r.failures);
    assert!(r.spanning.is_none());
    // 4N + 5M + 2 with N = 1, M = 2
    assert!(r.max_tree <= 16);
    assert!(!r.padding_reachable);
}
