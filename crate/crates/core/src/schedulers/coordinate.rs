//! Red/blue coordination for networks without filters.

use super::{RoundPlan, ScheduleError, Scheduler};
use crate::engine::trace::fmt_set;
use crate::engine::{EngineState, Location};
use crate::model::{FirstClassDecomposition, Network, NodeId, NodeSet};

/// Output of [`coordinate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Nodes forced into the sink component. Contains the sink.
    pub red: NodeSet,
    /// Nodes kept out of the sink component.
    pub blue: NodeSet,
    /// Components whose first-class cycle had a clear node.
    pub seed: NodeSet,
    /// Order in which red nodes joined `red` in the final iteration.
    pub red_order: Vec<NodeId>,
}

impl Partition {
    /// `true` iff every first-class component lies wholly in red or in blue.
    pub fn is_coordinated(&self, fcd: &FirstClassDecomposition) -> bool {
        fcd.components()
            .iter()
            .all(|c| c.is_subset(&self.red) || c.is_subset(&self.blue))
    }
}

/// The first node of `v`'s list that lies in `red` or satisfies `rival` is red.
fn prefers_red(net: &Network, v: NodeId, red: &NodeSet, rival: impl Fn(NodeId) -> bool) -> bool {
    net.prefs(v)
        .iter()
        .find(|&&x| red.contains(&x) || rival(x))
        .is_some_and(|x| red.contains(x))
}

/// Union of the non-sink first-class components whose cycle meets `clear`.
pub fn blue_seed(fcd: &FirstClassDecomposition, clear: &NodeSet) -> NodeSet {
    (1..fcd.len())
        .filter(|&i| fcd.cycle(i).iter().any(|v| clear.contains(v)))
        .flat_map(|i| fcd.component(i).iter().copied())
        .collect()
}

/// Red/blue partition for the clear set `clear`. Among several nodes that
/// may turn red, the smallest id goes first.
pub fn coordinate(net: &Network, fcd: &FirstClassDecomposition, clear: &NodeSet) -> Partition {
    let sink = net.sink();
    let seed = blue_seed(fcd, clear);
    let mut blue_prev = seed.clone();
    loop {
        let mut red = NodeSet::from([sink]);
        let mut red_order = Vec::new();
        let mut rest: NodeSet = net
            .nodes()
            .filter(|v| *v != sink && !blue_prev.contains(v))
            .collect();
        while let Some(v) = rest.iter().copied().find(|&v| {
            prefers_red(net, v, &red, |x| {
                blue_prev.contains(&x) || (rest.contains(&x) && clear.contains(&x))
            })
        }) {
            rest.remove(&v);
            red.insert(v);
            red_order.push(v);
        }
        if rest.is_empty() {
            return Partition {
                red,
                blue: blue_prev,
                seed,
                red_order,
            };
        }
        blue_prev.extend(rest);
    }
}

/// Hops from `x` to `target` along first-choice arcs.
fn first_choice_distance(net: &Network, x: NodeId, target: NodeId) -> usize {
    let mut cur = x;
    let mut d = 0;
    while cur != target && d <= net.n() {
        match net.first_choice(cur) {
            Some(w) => cur = w,
            None => return usize::MAX,
        }
        d += 1;
    }
    d
}

/// Activation order realising `part` against the control plane of `state`.
///
/// Seed components go first, each ending with its smallest clear cycle node
/// and otherwise ordered by first-choice distance to it. The remaining blue
/// nodes follow greedily: the smallest id whose best clear neighbour (in the
/// simulated plane) is blue, else the smallest id with no clear neighbour.
/// Red nodes close the round in the order they turned red.
pub fn coordinate_sequence(
    part: &Partition,
    fcd: &FirstClassDecomposition,
    state: &EngineState,
) -> Result<Vec<NodeId>, ScheduleError> {
    let net = state.network();
    let clear = state.clear_set();
    let mut plane = state.plane().clone();
    let mut seq = Vec::with_capacity(net.n() - 1);

    for i in 1..fcd.len() {
        let comp = fcd.component(i);
        if !comp.is_subset(&part.seed) {
            continue;
        }
        let Some(&v) = fcd.cycle(i).iter().filter(|x| clear.contains(x)).min() else {
            continue;
        };
        let mut order: Vec<(usize, NodeId)> = comp
            .iter()
            .filter(|&&x| x != v)
            .map(|&x| (first_choice_distance(net, x, v), x))
            .collect();
        order.sort();
        for x in order.into_iter().map(|(_, x)| x).chain([v]) {
            plane.activate(net, x);
            seq.push(x);
        }
    }

    let mut rest: NodeSet = part.blue.difference(&part.seed).copied().collect();
    while !rest.is_empty() {
        let choices: Vec<(NodeId, Option<NodeId>)> = rest
            .iter()
            .map(|&x| (x, plane.best_valid_choice(net, x)))
            .collect();
        let pick = choices
            .iter()
            .find(|(_, c)| c.is_some_and(|w| part.blue.contains(&w)))
            .or_else(|| choices.iter().find(|(_, c)| c.is_none()))
            .map(|&(x, _)| x);
        let Some(x) = pick else {
            return Err(ScheduleError::Stall {
                round: state.round() + 1,
                remaining: rest.into_iter().collect(),
            });
        };
        plane.activate(net, x);
        seq.push(x);
        rest.remove(&x);
    }

    seq.extend(part.red_order.iter().copied());
    Ok(seq)
}

/// Runs [`coordinate`] and [`coordinate_sequence`] every round and checks
/// the coordination properties as it goes.
#[derive(Debug, Clone, Default)]
pub struct CoordinateScheduler {
    fcd: Option<FirstClassDecomposition>,
    history: Vec<Partition>,
    pending: Option<(Partition, NodeSet)>,
    violations: Vec<String>,
}

impl CoordinateScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Partitions used so far, one per executed round.
    pub fn history(&self) -> &[Partition] {
        &self.history
    }

    /// Property failures seen so far, one line each.
    pub fn violations(&self) -> &[String] {
        &self.violations
    }
}

impl Scheduler for CoordinateScheduler {
    fn name(&self) -> &'static str {
        "coordinate"
    }

    fn plan(&mut self, state: &EngineState) -> Result<RoundPlan, ScheduleError> {
        let net = state.network();
        if !net.all_filters_empty() {
            return Err(ScheduleError::FilterMismatch {
                scheduler: "coordinate",
                required: "empty",
            });
        }
        let fcd = self
            .fcd
            .get_or_insert_with(|| FirstClassDecomposition::new(net));
        let round = state.round() + 1;
        let clear = state.clear_set();
        let part = coordinate(net, fcd, &clear);

        if !part.is_coordinated(fcd) {
            self.violations.push(format!(
                "round {round}: first-class component split by partition"
            ));
        }
        for (k, old) in self.history.iter().enumerate() {
            if part.seed.is_subset(&old.blue) && !old.red.is_subset(&part.red) {
                self.violations.push(format!(
                    "round {round}: red set of round {} not contained in current red set",
                    k + 1
                ));
            }
        }

        let order = coordinate_sequence(&part, fcd, state)?;
        let notes = vec![format!(
            "coordinate red={} blue={} seed={}",
            fmt_set(&part.red),
            fmt_set(&part.blue),
            fmt_set(&part.seed)
        )];
        self.pending = Some((part, clear));
        Ok(RoundPlan { order, notes })
    }

    fn observe(&mut self, state: &EngineState) -> Result<(), ScheduleError> {
        let Some((part, clear)) = self.pending.take() else {
            return Ok(());
        };
        let round = state.round();
        let comp = state.sink_component();
        if !part.red.is_subset(&comp) {
            self.violations.push(format!(
                "round {round}: red node outside the sink component"
            ));
        }
        if !part.blue.is_disjoint(&comp) {
            self.violations.push(format!(
                "round {round}: blue node inside the sink component"
            ));
        }
        if clear == part.seed {
            for p in state.packets() {
                if let (Location::At(v), Some(_)) = (p.location, &p.last_cycle) {
                    if !clear.contains(&v) {
                        self.violations.push(format!(
                            "round {round}: packet {} cycles at {v}, which was not clear",
                            p.id
                        ));
                    }
                }
            }
        }
        self.history.push(part);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::{run, AdversaryPolicy, StopCondition};
    use crate::model::{fixtures, RoutingGraph};

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().map(NodeId).collect()
    }

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn nogood_all_clear_paints_the_cycle_blue() {
        let net = fixtures::nogood();
        let fcd = FirstClassDecomposition::new(&net);
        let p = coordinate(&net, &fcd, &set(&[0, 1, 2]));
        assert_eq!(p.seed, set(&[1, 2]));
        assert_eq!(p.red, set(&[0]));
        assert_eq!(p.blue, set(&[1, 2]));
        assert!(p.red_order.is_empty());
    }

    #[test]
    fn nogood_only_sink_clear_paints_everything_red() {
        let net = fixtures::nogood();
        let fcd = FirstClassDecomposition::new(&net);
        let p = coordinate(&net, &fcd, &set(&[0]));
        assert!(p.seed.is_empty());
        assert_eq!(p.red, set(&[0, 1, 2]));
        assert!(p.blue.is_empty());
        assert_eq!(p.red_order, ids(&[1, 2]));
    }

    #[test]
    fn tri_is_all_red() {
        let net = fixtures::tri();
        let fcd = FirstClassDecomposition::new(&net);
        let p = coordinate(&net, &fcd, &set(&[0, 1, 2]));
        assert!(p.seed.is_empty());
        assert_eq!(p.red, set(&[0, 1, 2]));
    }

    #[test]
    fn nogood_sequences() {
        let net = Arc::new(fixtures::nogood());
        let fcd = FirstClassDecomposition::new(&net);
        let all = RoutingGraph::from_arcs(3, [(NodeId(1), NodeId(0)), (NodeId(2), NodeId(0))]);
        let state = EngineState::new(Arc::clone(&net), all);
        let p = coordinate(&net, &fcd, &state.clear_set());
        assert_eq!(coordinate_sequence(&p, &fcd, &state).unwrap(), ids(&[2, 1]));

        let state = EngineState::with_first_choices(Arc::clone(&net));
        let p = coordinate(&net, &fcd, &state.clear_set());
        assert_eq!(coordinate_sequence(&p, &fcd, &state).unwrap(), ids(&[1, 2]));
    }

    #[test]
    fn nogood_delivers_within_two_rounds_from_all_clear() {
        let net = Arc::new(fixtures::nogood());
        let all = RoutingGraph::from_arcs(3, [(NodeId(1), NodeId(0)), (NodeId(2), NodeId(0))]);
        let mut state = EngineState::new(net, all);
        let mut s = CoordinateScheduler::new();
        let out = run(
            &mut state,
            &mut s,
            10,
            StopCondition::AllDelivered,
            AdversaryPolicy::Stay,
        )
        .unwrap();
        assert!(out.met);
        assert_eq!(out.rounds, 2);
        assert!(s.violations().is_empty(), "{:?}", s.violations());
    }

    #[test]
    fn first_choice_arborescence_delivers_in_one_round() {
        let net = Arc::new(fixtures::star(5));
        let mut state = EngineState::new(Arc::clone(&net), RoutingGraph::empty(5));
        let mut s = CoordinateScheduler::new();
        let out = run(
            &mut state,
            &mut s,
            4,
            StopCondition::AllDelivered,
            AdversaryPolicy::Stay,
        )
        .unwrap();
        assert_eq!(out.rounds, 1);
        assert_eq!(state.routing_graph(), &net.first_choice_graph());
    }

    #[test]
    fn filters_are_rejected() {
        let net = Arc::new(fixtures::notme2());
        let state = EngineState::with_first_choices(net);
        assert!(matches!(
            CoordinateScheduler::new().plan(&state),
            Err(ScheduleError::FilterMismatch { .. })
        ));
    }
}
