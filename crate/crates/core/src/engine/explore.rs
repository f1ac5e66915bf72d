//! Worst-case exploration over every adversarial packet placement.
//!
//! Placement never feeds back into the control plane, so a single control
//! run fixes the routing graph of every round and only the packet positions
//! branch.

use std::collections::{BTreeSet, HashSet};

use super::{forward_packet, AdversaryPolicy, EngineError, EngineState, Location, Packet};
use crate::model::NodeId;
use crate::schedulers::Scheduler;

/// Result of an exhaustive exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchReport {
    pub rounds: u32,
    /// Largest number of distinct branches alive in any round.
    pub peak_branches: usize,
    /// Worst-case number of undelivered packets after each round.
    pub undelivered: Vec<usize>,
    /// First round after which every packet was delivered on every branch.
    pub all_delivered_round: Option<u32>,
}

fn expand(packets: &[Packet]) -> Vec<Vec<Packet>> {
    let mut out = vec![packets.to_vec()];
    for (i, p) in packets.iter().enumerate() {
        let Some(cycle) = &p.last_cycle else { continue };
        if p.is_delivered() {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * cycle.len());
        for b in &out {
            for &to in cycle {
                let mut b = b.clone();
                b[i].location = Location::At(to);
                next.push(b);
            }
        }
        out = next;
    }
    for b in &mut out {
        for p in b {
            p.last_cycle = None;
        }
    }
    out
}

fn placement_count(packets: &[Packet]) -> u128 {
    packets
        .iter()
        .filter(|p| !p.is_delivered())
        .filter_map(|p| p.last_cycle.as_ref())
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
}

/// Runs `rounds` rounds of `scheduler` on `control` and follows every joint
/// placement of the cycling packets, merging identical branches. `control`
/// itself runs with the `Stay` policy and keeps the full trace.
pub fn joint_exhaustive(
    control: &mut EngineState,
    scheduler: &mut dyn Scheduler,
    rounds: u32,
    budget: u128,
) -> Result<BranchReport, EngineError> {
    let sink = control.network().sink();
    let mut frontier: Vec<Vec<Packet>> = vec![control.packets().to_vec()];
    let mut report = BranchReport {
        rounds: 0,
        peak_branches: 1,
        undelivered: Vec::new(),
        all_delivered_round: control.all_delivered().then_some(control.round()),
    };
    for _ in 0..rounds {
        let needed: u128 = frontier.iter().map(|b| placement_count(b)).sum();
        if needed > budget {
            return Err(EngineError::PlacementBudget { needed, budget });
        }
        let plan = scheduler.plan(control)?;
        for note in plan.notes {
            control.note(note);
        }
        control.run_round(&plan.order, AdversaryPolicy::Stay)?;
        scheduler.observe(control)?;
        let round = control.round();
        let rg = control.routing_graph();

        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for b in &frontier {
            for mut b in expand(b) {
                for p in &mut b {
                    forward_packet(rg, sink, round, p);
                }
                let key: Vec<_> = b
                    .iter()
                    .map(|p| (p.location, p.last_cycle.clone()))
                    .collect();
                if seen.insert(key) {
                    next.push(b);
                }
            }
        }
        frontier = next;
        report.rounds += 1;
        report.peak_branches = report.peak_branches.max(frontier.len());
        let worst = frontier
            .iter()
            .map(|b| b.iter().filter(|p| !p.is_delivered()).count())
            .max()
            .unwrap_or(0);
        report.undelivered.push(worst);
        if worst == 0 && report.all_delivered_round.is_none() {
            report.all_delivered_round = Some(round);
        }
    }
    Ok(report)
}

/// Per-packet exploration: each packet's set of reachable positions is
/// tracked separately, which is exact because packets never interact.
/// Returns, for each packet in order, the first round after which it is
/// delivered on every branch.
pub fn exhaustive_delivery(
    control: &mut EngineState,
    scheduler: &mut dyn Scheduler,
    rounds: u32,
) -> Result<Vec<Option<u32>>, EngineError> {
    type Pos = (Location, Option<Vec<NodeId>>);
    let sink = control.network().sink();
    let mut sets: Vec<BTreeSet<Pos>> = control
        .packets()
        .iter()
        .map(|p| BTreeSet::from([(p.location, p.last_cycle.clone())]))
        .collect();
    let start_origin: Vec<NodeId> = control.packets().iter().map(|p| p.origin).collect();
    let mut done: Vec<Option<u32>> = control
        .packets()
        .iter()
        .map(|p| p.is_delivered().then_some(control.round()))
        .collect();
    for _ in 0..rounds {
        let plan = scheduler.plan(control)?;
        for note in plan.notes {
            control.note(note);
        }
        control.run_round(&plan.order, AdversaryPolicy::Stay)?;
        scheduler.observe(control)?;
        let round = control.round();
        let rg = control.routing_graph();
        for (i, set) in sets.iter_mut().enumerate() {
            let mut next = BTreeSet::new();
            for (loc, cycle) in set.iter() {
                let starts: Vec<Location> = match (loc, cycle) {
                    (Location::At(_), Some(c)) => c.iter().map(|&x| Location::At(x)).collect(),
                    _ => vec![*loc],
                };
                for start in starts {
                    let mut p = Packet {
                        id: i,
                        origin: start_origin[i],
                        location: start,
                        delivered_round: None,
                        last_cycle: None,
                    };
                    forward_packet(rg, sink, round, &mut p);
                    next.insert((p.location, p.last_cycle));
                }
            }
            *set = next;
            if done[i].is_none() && set.iter().all(|(l, _)| *l == Location::Delivered) {
                done[i] = Some(round);
            }
        }
    }
    Ok(done)
}
