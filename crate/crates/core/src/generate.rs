//! Seeded random instances for experiments and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::analysis::is_skeleton;
use crate::model::{q_components, q_subtree, Network, NodeId, NodeSet, RoutingGraph, SpanningTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Empty,
    SelfOnly,
    /// Each node filters up to this many random nodes.
    Random(usize),
}

/// Random network on `n` nodes with sink 0. Every non-sink node gets
/// between `min_deg` and `max_deg` out-neighbours (capped at `n - 1`), in a
/// random preference order. A random spanning in-tree is laid down first so
/// that every node reaches the sink.
pub fn random_network<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    min_deg: usize,
    max_deg: usize,
    filters: FilterKind,
) -> Network {
    assert!(n >= 2 && min_deg >= 1 && min_deg <= max_deg);
    let sink = NodeId(0);
    let mut order: Vec<NodeId> = (1..n).map(NodeId).collect();
    order.shuffle(rng);
    let mut prefs: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (k, &v) in order.iter().enumerate() {
        let parent = match rng.gen_range(0..=k) {
            0 => sink,
            i => order[i - 1],
        };
        prefs[v.0].push(parent);
        let deg = rng.gen_range(min_deg..=max_deg).min(n - 1);
        let mut others: Vec<NodeId> = (0..n)
            .map(NodeId)
            .filter(|&w| w != v && w != parent)
            .collect();
        others.shuffle(rng);
        prefs[v.0].extend(others.into_iter().take(deg.saturating_sub(1)));
        prefs[v.0].shuffle(rng);
    }
    let filters = (0..n)
        .map(|v| match filters {
            FilterKind::Empty => NodeSet::new(),
            FilterKind::SelfOnly => [NodeId(v)].into(),
            FilterKind::Random(k) => {
                let len = rng.gen_range(0..=k);
                (0..len).map(|_| NodeId(rng.gen_range(0..n))).collect()
            }
        })
        .collect();
    Network::new(sink, prefs, filters).expect("generator keeps every invariant")
}

/// Each non-sink node independently takes a random neighbour or no arc.
pub fn random_routing_graph<R: Rng + ?Sized>(rng: &mut R, net: &Network) -> RoutingGraph {
    let next = net
        .nodes()
        .map(|v| {
            let p = net.prefs(v);
            if p.is_empty() || rng.gen_bool(0.15) {
                None
            } else {
                Some(p[rng.gen_range(0..p.len())])
            }
        })
        .collect();
    RoutingGraph::from_next(next)
}

/// Random spanning in-tree made of network arcs, grown from the sink.
pub fn random_spanning_tree<R: Rng + ?Sized>(rng: &mut R, net: &Network) -> SpanningTree {
    let sink = net.sink();
    let mut inside = NodeSet::from([sink]);
    let mut g = RoutingGraph::empty(net.n());
    while inside.len() < net.n() {
        let frontier: Vec<NodeId> = net
            .nodes()
            .filter(|v| !inside.contains(v) && net.prefs(*v).iter().any(|w| inside.contains(w)))
            .collect();
        let v = *frontier
            .choose(rng)
            .expect("validated networks are connected to the sink");
        let parents: Vec<NodeId> = net
            .prefs(v)
            .iter()
            .copied()
            .filter(|w| inside.contains(w))
            .collect();
        g.set(v, parents.choose(rng).copied());
        inside.insert(v);
    }
    SpanningTree::new(net, g).expect("grown from the sink")
}

/// Shrinks `o` until `s` is strongly stable on it and a skeleton of `t`.
/// The empty set always qualifies.
pub fn shrink_to_valid(
    net: &Network,
    s: &SpanningTree,
    t: &RoutingGraph,
    mut o: NodeSet,
) -> NodeSet {
    let in_t = t.nodes_with_root(net.sink());
    loop {
        let bad = o.iter().copied().find(|&v| {
            let sub = q_subtree(s.as_graph(), &o, v).expect("v is in o");
            net.prefs(v).iter().copied().find(|x| !sub.contains(x)) != s.parent(v)
        });
        if let Some(v) = bad {
            o.remove(&v);
            continue;
        }
        if is_skeleton(s, t, &o) {
            return o;
        }
        let bad = q_components(s.as_graph(), &o)
            .into_iter()
            .find(|f| !f.is_disjoint(&in_t) && !s.as_graph().out_plus(f).is_subset_of(t))
            .expect("some component fails");
        o.retain(|v| !bad.contains(v));
    }
}

/// A random input for the strongly-stable-tree routine: `(t_in, s_in, o)`
/// with `t_in` an in-arborescence at the sink, `s_in` strongly stable on `o`
/// and a skeleton of `t_in`.
pub fn random_find_stable_input<R: Rng + ?Sized>(
    rng: &mut R,
    net: &Network,
) -> (RoutingGraph, SpanningTree, NodeSet) {
    let s = random_spanning_tree(rng, net);
    let sink = net.sink();
    let t = if rng.gen_bool(0.5) {
        random_routing_graph(rng, net).sink_tree(sink)
    } else {
        let mut g = s.as_graph().clone();
        for v in net.non_sink() {
            if rng.gen_bool(0.3) {
                g.set(v, None);
            }
        }
        g.sink_tree(sink)
    };
    let o: NodeSet = net.non_sink().filter(|_| rng.gen_bool(0.6)).collect();
    let o = shrink_to_valid(net, &s, &t, o);
    (t, s, o)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::analysis::has_strong_stability;

    #[test]
    fn networks_are_valid_and_deterministic() {
        for seed in 0..50 {
            let mut a = ChaCha8Rng::seed_from_u64(seed);
            let mut b = ChaCha8Rng::seed_from_u64(seed);
            let n = 2 + (seed as usize % 12);
            let x = random_network(&mut a, n, 2, 4, FilterKind::SelfOnly);
            let y = random_network(&mut b, n, 2, 4, FilterKind::SelfOnly);
            assert_eq!(x, y);
            assert!(x.validate().is_ok());
            assert!(x.all_filters_self());
            for v in x.non_sink() {
                let d = x.prefs(v).len();
                assert!(d >= 2.min(n - 1) && d <= 4.min(n - 1));
            }
        }
    }

    #[test]
    fn find_stable_inputs_meet_preconditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let net = random_network(&mut rng, 7, 2, 4, FilterKind::SelfOnly);
            let (t, s, o) = random_find_stable_input(&mut rng, &net);
            assert!(t.is_in_arborescence(net.sink()));
            assert!(has_strong_stability(&net, &s, &o));
            assert!(is_skeleton(&s, &t, &o));
        }
    }
}
