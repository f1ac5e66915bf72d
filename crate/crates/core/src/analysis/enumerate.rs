use super::{is_stable_tree, AnalysisError, StableTreeReport};
use crate::engine::ControlPlane;
use crate::model::{Network, RoutingGraph};

/// Default cap on the number of choice functions examined.
pub const DEFAULT_BUDGET: u128 = 5_000_000;

/// Number of choice functions: each non-sink node picks a neighbour or none.
pub fn configuration_count(net: &Network) -> u128 {
    net.non_sink().fold(1u128, |acc, v| {
        acc.saturating_mul(net.prefs(v).len() as u128 + 1)
    })
}

/// Every routing graph that, with verified paths, is an equilibrium.
///
/// Choice functions are visited lexicographically: nodes by id, the lowest
/// id most significant; each node's options in preference order, with "no
/// arc" last. Output keeps that order.
pub fn enumerate_equilibria(
    net: &Network,
    budget: u128,
) -> Result<Vec<RoutingGraph>, AnalysisError> {
    let needed = configuration_count(net);
    if needed > budget {
        return Err(AnalysisError::Budget { needed, budget });
    }
    let nodes: Vec<_> = net.non_sink().collect();
    let mut digits = vec![0usize; nodes.len()];
    let mut out = Vec::new();
    loop {
        let mut rg = RoutingGraph::empty(net.n());
        for (&v, &d) in nodes.iter().zip(&digits) {
            rg.set(v, net.prefs(v).get(d).copied());
        }
        if ControlPlane::verified(net, rg.clone()).is_equilibrium(net) {
            out.push(rg);
        }
        // odometer, last node fastest
        let mut i = nodes.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] <= net.prefs(nodes[i]).len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Largest sink component over all equilibria; the first one in
/// enumeration order wins ties. With no equilibrium the report is for the
/// sink alone.
pub fn max_stable_tree(net: &Network, budget: u128) -> Result<StableTreeReport, AnalysisError> {
    let sink = net.sink();
    let best = enumerate_equilibria(net, budget)?
        .into_iter()
        .map(|rg| rg.sink_tree(sink))
        .fold(None::<RoutingGraph>, |best, t| match best {
            Some(b) if b.arc_count() >= t.arc_count() => Some(b),
            _ => Some(t),
        })
        .unwrap_or_else(|| RoutingGraph::empty(net.n()));
    is_stable_tree(net, &best)
}
