//! Round-based dynamics: activation, forwarding, route verification.
//!
//! Each round runs, in order:
//!
//! 1. adversarial placement of packets that were caught in a cycle,
//! 2. the control plane: every non-sink node activates once, in the
//!    scheduler's order,
//! 3. the forwarding plane: each packet moves up to `n` hops along the new
//!    routing graph or reaches the sink,
//! 4. route verification: every node learns its actual path.

mod explore;
mod plane;
pub mod trace;

pub use explore::{exhaustive_delivery, joint_exhaustive, BranchReport};
pub use plane::ControlPlane;
pub use trace::{Trace, TraceEvent};

use std::sync::Arc;

use thiserror::Error;

use crate::model::{Network, NodeId, NodeSet, RoutingGraph};
use crate::schedulers::{ScheduleError, Scheduler};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(
        "round {round}: activation order is not a permutation of the non-sink nodes ({detail})"
    )]
    Fairness { round: u32, detail: String },
    #[error("exhaustive placement needs {needed} branches, budget is {budget}")]
    PlacementBudget { needed: u128, budget: u128 },
    #[error("exhaustive placement forks the simulation; use the exploration API")]
    ExhaustiveInRound,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Where a packet is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    At(NodeId),
    Delivered,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    pub id: usize,
    pub origin: NodeId,
    pub location: Location,
    pub delivered_round: Option<u32>,
    /// Cycle the packet was caught in at the end of the last round.
    pub last_cycle: Option<Vec<NodeId>>,
}

impl Packet {
    pub fn is_delivered(&self) -> bool {
        self.location == Location::Delivered
    }
}

/// Deterministic choice of node within a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementRule {
    MinId,
    MaxId,
}

/// How the adversary repositions packets caught in a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdversaryPolicy {
    #[default]
    Stay,
    Fixed(PlacementRule),
    /// Every joint placement; only available through [`joint_exhaustive`].
    Exhaustive,
}

/// When [`run`] stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCondition {
    AllDelivered,
    Equilibrium,
    /// Run exactly `max_rounds` rounds.
    Rounds,
}

/// Summary of a [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub rounds: u32,
    pub met: bool,
    /// Rounds after which some round-0 packet was still undelivered.
    pub imperfect_rounds: u32,
    /// First round after which every packet was delivered.
    pub all_delivered_round: Option<u32>,
    /// First round after which the control plane was in equilibrium.
    pub equilibrium_round: Option<u32>,
}

/// Full simulation state.
#[derive(Debug, Clone)]
pub struct EngineState {
    net: Arc<Network>,
    round: u32,
    plane: ControlPlane,
    packets: Vec<Packet>,
    trace: Trace,
}

impl EngineState {
    /// Fresh state: paths verified on `initial`, one packet per non-sink
    /// node (packet id = origin node id), and a round-0 verify record.
    pub fn new(net: Arc<Network>, initial: RoutingGraph) -> Self {
        let plane = ControlPlane::verified(&net, initial);
        let packets = net
            .non_sink()
            .map(|v| Packet {
                id: v.0,
                origin: v,
                location: Location::At(v),
                delivered_round: None,
                last_cycle: None,
            })
            .collect();
        let mut trace = Trace::default();
        trace.push(TraceEvent::Verify {
            round: 0,
            clear: plane.clear_set(),
        });
        Self {
            net,
            round: 0,
            plane,
            packets,
            trace,
        }
    }

    /// State starting from the all-first-choice routing graph.
    pub fn with_first_choices(net: Arc<Network>) -> Self {
        let rg = net.first_choice_graph();
        Self::new(net, rg)
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_arc(&self) -> Arc<Network> {
        Arc::clone(&self.net)
    }

    /// Number of completed rounds.
    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn plane(&self) -> &ControlPlane {
        &self.plane
    }

    pub fn routing_graph(&self) -> &RoutingGraph {
        self.plane.routing_graph()
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn clear_set(&self) -> NodeSet {
        self.plane.clear_set()
    }

    pub fn opaque_set(&self) -> NodeSet {
        self.plane.opaque_set()
    }

    /// Nodes whose actual walk reaches the sink.
    pub fn sink_component(&self) -> NodeSet {
        self.routing_graph().sink_component(self.net.sink())
    }

    pub fn best_valid_choice(&self, v: NodeId) -> Option<NodeId> {
        self.plane.best_valid_choice(&self.net, v)
    }

    pub fn is_equilibrium(&self) -> bool {
        self.plane.is_equilibrium(&self.net)
    }

    pub fn all_delivered(&self) -> bool {
        self.packets.iter().all(Packet::is_delivered)
    }

    pub fn delivered_count(&self) -> usize {
        self.packets.iter().filter(|p| p.is_delivered()).count()
    }

    /// Appends a scheduler annotation for the upcoming round.
    pub fn note(&mut self, note: impl Into<String>) {
        self.trace.push(TraceEvent::Schedule {
            round: self.round + 1,
            note: note.into(),
        });
    }

    /// Activates a single node outside of a round. Used by schedulers that
    /// simulate activation orders.
    pub fn activate(&mut self, v: NodeId) -> Option<NodeId> {
        let choice = self.plane.activate(&self.net, v);
        self.trace.push(TraceEvent::Activate {
            round: self.round + 1,
            node: v,
            choice,
            path: self.plane.path(v).clone(),
        });
        choice
    }

    fn check_fair(&self, perm: &[NodeId]) -> Result<(), EngineError> {
        let n = self.net.n();
        let round = self.round + 1;
        let mut seen = vec![false; n];
        for &v in perm {
            if v.0 >= n || v == self.net.sink() {
                return Err(EngineError::Fairness {
                    round,
                    detail: format!("node {v} cannot be activated"),
                });
            }
            if std::mem::replace(&mut seen[v.0], true) {
                return Err(EngineError::Fairness {
                    round,
                    detail: format!("node {v} activated twice"),
                });
            }
        }
        if let Some(v) = self.net.non_sink().find(|v| !seen[v.0]) {
            return Err(EngineError::Fairness {
                round,
                detail: format!("node {v} not activated"),
            });
        }
        Ok(())
    }

    /// Relocates each cycling packet within its cycle. `Exhaustive` is
    /// rejected here; see [`EngineState::placements`].
    pub fn place_cycled_packets(&mut self, policy: AdversaryPolicy) -> Result<(), EngineError> {
        let rule = match policy {
            AdversaryPolicy::Stay => {
                for p in &mut self.packets {
                    p.last_cycle = None;
                }
                return Ok(());
            }
            AdversaryPolicy::Fixed(rule) => rule,
            AdversaryPolicy::Exhaustive => return Err(EngineError::ExhaustiveInRound),
        };
        let round = self.round + 1;
        for p in &mut self.packets {
            let (Some(cycle), Location::At(from)) = (p.last_cycle.take(), p.location) else {
                continue;
            };
            let to = match rule {
                PlacementRule::MinId => *cycle.iter().min().expect("cycles are non-empty"),
                PlacementRule::MaxId => *cycle.iter().max().expect("cycles are non-empty"),
            };
            if to != from {
                p.location = Location::At(to);
                self.trace.push(TraceEvent::Place {
                    round,
                    packet: p.id,
                    from,
                    to,
                });
            }
        }
        Ok(())
    }

    /// One successor state per joint placement of the cycling packets.
    pub fn placements(&self, budget: u128) -> Result<Vec<EngineState>, EngineError> {
        let cycling: Vec<usize> = (0..self.packets.len())
            .filter(|&i| self.packets[i].last_cycle.is_some() && !self.packets[i].is_delivered())
            .collect();
        let needed = cycling.iter().fold(1u128, |acc, &i| {
            acc.saturating_mul(self.packets[i].last_cycle.as_ref().map_or(1, |c| c.len()) as u128)
        });
        if needed > budget {
            return Err(EngineError::PlacementBudget { needed, budget });
        }
        let round = self.round + 1;
        let mut out = vec![self.clone()];
        for &i in &cycling {
            let cycle = self.packets[i].last_cycle.clone().expect("filtered above");
            let mut next = Vec::with_capacity(out.len() * cycle.len());
            for s in out {
                for &to in &cycle {
                    let mut t = s.clone();
                    let p = &mut t.packets[i];
                    if let Location::At(from) = p.location {
                        if from != to {
                            p.location = Location::At(to);
                            let id = p.id;
                            t.trace.push(TraceEvent::Place {
                                round,
                                packet: id,
                                from,
                                to,
                            });
                        }
                    }
                    next.push(t);
                }
            }
            out = next;
        }
        for s in &mut out {
            for p in &mut s.packets {
                p.last_cycle = None;
            }
        }
        Ok(out)
    }

    /// Forwarding plane: every undelivered packet moves up to `n` hops.
    pub fn forward_packets(&mut self) {
        let round = self.round + 1;
        let sink = self.net.sink();
        let rg = self.plane.routing_graph();
        for p in &mut self.packets {
            let Location::At(from) = p.location else {
                continue;
            };
            forward_packet(rg, sink, round, p);
            match p.location {
                Location::At(to) => self.trace.push(TraceEvent::Forward {
                    round,
                    packet: p.id,
                    from,
                    to,
                }),
                Location::Delivered => {
                    self.trace.push(TraceEvent::Forward {
                        round,
                        packet: p.id,
                        from,
                        to: sink,
                    });
                    self.trace.push(TraceEvent::Delivered {
                        round,
                        packet: p.id,
                    });
                }
            }
        }
    }

    /// Route verification and the end-of-round record.
    pub fn verify(&mut self) {
        self.plane.verify(&self.net);
        self.trace.push(TraceEvent::Verify {
            round: self.round + 1,
            clear: self.plane.clear_set(),
        });
    }

    /// Runs the control plane only, without advancing the round or touching
    /// packets.
    pub fn run_control_plane(&mut self, perm: &[NodeId]) -> Result<(), EngineError> {
        self.check_fair(perm)?;
        self.trace.push(TraceEvent::Perm {
            round: self.round + 1,
            order: perm.to_vec(),
        });
        for &v in perm {
            self.activate(v);
        }
        Ok(())
    }

    /// One full round: placement, activation in `perm` order, forwarding,
    /// verification.
    pub fn run_round(
        &mut self,
        perm: &[NodeId],
        policy: AdversaryPolicy,
    ) -> Result<(), EngineError> {
        self.check_fair(perm)?;
        self.place_cycled_packets(policy)?;
        self.run_control_plane(perm)?;
        self.finish_round();
        Ok(())
    }

    /// Forwarding and verification, then the round counter advances.
    pub fn finish_round(&mut self) {
        self.forward_packets();
        self.verify();
        self.round += 1;
    }
}

/// Moves one packet up to `n` hops along `rg`, where `n` is the node count.
/// A packet at a node without a next hop stays where it is.
pub(crate) fn forward_packet(rg: &RoutingGraph, sink: NodeId, round: u32, p: &mut Packet) {
    let Location::At(from) = p.location else {
        return;
    };
    let n = rg.n();
    let mut cur = from;
    let mut hops = 0;
    while cur != sink && hops < n {
        match rg.next(cur) {
            Some(w) => {
                cur = w;
                hops += 1;
            }
            None => break,
        }
    }
    if cur == sink {
        p.location = Location::Delivered;
        p.delivered_round = Some(round);
        p.last_cycle = None;
    } else {
        p.location = Location::At(cur);
        p.last_cycle = if hops == n { rg.cycle_from(cur) } else { None };
    }
}

/// Drives `scheduler` until `stop` holds or `max_rounds` rounds have run.
pub fn run(
    state: &mut EngineState,
    scheduler: &mut dyn Scheduler,
    max_rounds: u32,
    stop: StopCondition,
    policy: AdversaryPolicy,
) -> Result<RunOutcome, EngineError> {
    let start = state.round();
    let mut outcome = RunOutcome {
        rounds: 0,
        met: false,
        imperfect_rounds: 0,
        all_delivered_round: state.all_delivered().then_some(start),
        equilibrium_round: state.is_equilibrium().then_some(start),
    };
    let done = |s: &EngineState, executed: u32| match stop {
        StopCondition::AllDelivered => s.all_delivered(),
        StopCondition::Equilibrium => s.is_equilibrium(),
        StopCondition::Rounds => executed >= max_rounds,
    };
    while !done(state, outcome.rounds) && outcome.rounds < max_rounds {
        let plan = scheduler.plan(state)?;
        for note in plan.notes {
            state.note(note);
        }
        state.run_round(&plan.order, policy)?;
        scheduler.observe(state)?;
        outcome.rounds += 1;
        if !state.all_delivered() {
            outcome.imperfect_rounds += 1;
        }
        if outcome.all_delivered_round.is_none() && state.all_delivered() {
            outcome.all_delivered_round = Some(state.round());
        }
        if outcome.equilibrium_round.is_none() && state.is_equilibrium() {
            outcome.equilibrium_round = Some(state.round());
        }
    }
    outcome.met = done(state, outcome.rounds);
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn g(n: usize, arcs: &[(usize, usize)]) -> RoutingGraph {
        RoutingGraph::from_arcs(n, arcs.iter().map(|&(u, v)| (NodeId(u), NodeId(v))))
    }

    #[test]
    fn notme2_round_one_delivers_everything() {
        let net = Arc::new(fixtures::notme2());
        let mut s = EngineState::with_first_choices(net);
        assert!(s.clear_set() == [NodeId(0)].into());
        s.run_round(&ids(&[2, 1]), AdversaryPolicy::Stay).unwrap();
        assert_eq!(s.routing_graph(), &g(3, &[(1, 2), (2, 0)]));
        assert!(s.all_delivered());
        assert!(s.packets().iter().all(|p| p.delivered_round == Some(1)));
        assert!(s.is_equilibrium());
    }

    #[test]
    fn nogood_cycle_traps_packets() {
        let net = Arc::new(fixtures::nogood());
        let mut s = EngineState::new(net, g(3, &[(1, 0), (2, 0)]));
        assert_eq!(s.clear_set().len(), 3);
        s.run_round(&ids(&[2, 1]), AdversaryPolicy::Stay).unwrap();
        assert_eq!(s.routing_graph(), &g(3, &[(1, 2), (2, 1)]));
        assert_eq!(s.delivered_count(), 0);
        assert_eq!(s.clear_set(), [NodeId(0)].into());
    }

    #[test]
    fn forwarding_around_a_two_cycle() {
        let net = Arc::new(fixtures::nogood());
        let mut s = EngineState::new(net, g(3, &[(1, 2), (2, 1)]));
        s.forward_packets();
        let p = &s.packets()[0];
        assert_eq!(p.origin, NodeId(1));
        // three hops from 1 on 1<->2 end at 2
        assert_eq!(p.location, Location::At(NodeId(2)));
        assert_eq!(p.last_cycle, Some(ids(&[1, 2])));
    }

    #[test]
    fn delivered_packets_stay_delivered() {
        let net = Arc::new(fixtures::tri());
        let mut s = EngineState::with_first_choices(net);
        s.forward_packets();
        assert!(s.all_delivered());
        let before = s.packets().to_vec();
        s.forward_packets();
        assert_eq!(s.packets(), &before[..]);
    }

    #[test]
    fn packet_without_next_hop_stays() {
        let net = Arc::new(fixtures::nogood());
        let mut s = EngineState::new(net, RoutingGraph::empty(3));
        s.forward_packets();
        assert_eq!(s.packets()[0].location, Location::At(NodeId(1)));
        assert_eq!(s.packets()[0].last_cycle, None);
    }

    #[test]
    fn unfair_orders_are_rejected() {
        let net = Arc::new(fixtures::nogood());
        let mut s = EngineState::with_first_choices(net);
        for bad in [ids(&[1]), ids(&[1, 1]), ids(&[0, 1, 2]), ids(&[1, 2, 2])] {
            assert!(matches!(
                s.run_round(&bad, AdversaryPolicy::Stay),
                Err(EngineError::Fairness { .. })
            ));
        }
        assert_eq!(s.round(), 0);
    }

    #[test]
    fn placement_policies() {
        let net = Arc::new(fixtures::nogood());
        let mut s = EngineState::new(net, g(3, &[(1, 2), (2, 1)]));
        s.forward_packets();
        // packet 1 ends at 2, packet 2 ends at 1
        let mut stay = s.clone();
        stay.place_cycled_packets(AdversaryPolicy::Stay).unwrap();
        assert_eq!(stay.packets()[0].location, Location::At(NodeId(2)));
        let mut min = s.clone();
        min.place_cycled_packets(AdversaryPolicy::Fixed(PlacementRule::MinId))
            .unwrap();
        assert_eq!(min.packets()[0].location, Location::At(NodeId(1)));
        assert_eq!(min.packets()[1].location, Location::At(NodeId(1)));
        assert!(matches!(
            s.clone().place_cycled_packets(AdversaryPolicy::Exhaustive),
            Err(EngineError::ExhaustiveInRound)
        ));
        assert_eq!(s.placements(100).unwrap().len(), 4);
        assert!(matches!(
            s.placements(3),
            Err(EngineError::PlacementBudget { needed: 4, .. })
        ));
    }

    #[test]
    fn single_packet_on_two_cycle_has_two_placements() {
        let net = Arc::new(fixtures::nogood());
        let mut s = EngineState::new(net, g(3, &[(1, 2), (2, 1)]));
        s.forward_packets();
        s.packets[1].location = Location::Delivered;
        s.packets[1].last_cycle = None;
        assert_eq!(s.placements(100).unwrap().len(), 2);
    }
}
