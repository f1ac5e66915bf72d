use std::collections::BTreeSet;

use super::{build_reduction, decode_assignment, CnfFormula, GadgetNetwork};
use crate::analysis::{search_stable_trees, AnalysisError, Notion, SearchOptions, Visit};
use crate::model::{actual_path, RoutingGraph};

/// Outcome of [`verify_dichotomy`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DichotomyReport {
    pub nodes: usize,
    /// `4N + 5M + 2`.
    pub core_size: usize,
    /// From the truth table.
    pub satisfying: Vec<Vec<bool>>,
    /// A spanning stable tree, if one exists.
    pub spanning: Option<RoutingGraph>,
    /// Largest stable tree, tree notion.
    pub max_tree: usize,
    /// Largest equilibrium sink tree.
    pub max_equilibrium: usize,
    /// Some padding node lies in a stable tree (tree notion).
    pub padding_reachable: bool,
    pub equilibria: usize,
    /// Assignments decoded from spanning equilibria, one per tree.
    pub decoded: Vec<Vec<bool>>,
    /// Per-check failures; empty when the instance behaves as predicted.
    pub failures: Vec<String>,
}

impl DichotomyReport {
    pub fn is_yes(&self) -> bool {
        self.spanning.is_some()
    }

    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the variable-gadget shape and the line path of `t_1` in `tree`.
fn gadget_failures(g: &GadgetNetwork, tree: &RoutingGraph) -> Vec<String> {
    let mut out = Vec::new();
    let sink = g.sink();
    let comp = tree.sink_component(sink);
    for i in 1..=g.num_vars {
        if !comp.contains(&g.a(i)) {
            continue;
        }
        let (a, ut, uf, b) = (g.a(i), g.u_true(i), g.u_false(i), g.b(i));
        let has = |u, v| tree.contains_arc(u, v);
        let truth = has(ut, b) && has(uf, a) && has(a, ut);
        let falsity = has(uf, b) && has(ut, a) && has(a, uf);
        if truth == falsity {
            out.push(format!(
                "variable {i}: gadget arcs match {} assignments",
                u8::from(truth) * 2
            ));
        }
    }
    let t1 = g.t(1);
    if comp.contains(&t1) {
        let path = actual_path(tree, sink, t1);
        for i in 1..=g.num_vars {
            let k = [g.u_true(i), g.u_false(i)]
                .iter()
                .filter(|u| path.contains(u))
                .count();
            if k != 1 {
                out.push(format!("variable {i}: t1 path holds {k} of its u nodes"));
            }
        }
    }
    out
}

/// Builds the reduction for `f` with `padding` padding nodes and checks,
/// by exhaustive search:
///
/// * a spanning stable tree exists iff `f` is satisfiable;
/// * if not, every stable tree (under both notions) has at most
///   `4N + 5M + 2` nodes and none contains a padding node;
/// * every equilibrium picks exactly one assignment per variable gadget,
///   and `t_1`'s path passes exactly one `u` node per gadget;
/// * the assignments read off spanning equilibria are exactly the
///   satisfying assignments, each once.
pub fn verify_dichotomy(
    f: &CnfFormula,
    padding: usize,
    budget: u64,
) -> Result<DichotomyReport, AnalysisError> {
    let g = build_reduction(f, padding);
    let net = &g.net;
    let n = net.n();
    let sink = g.sink();
    let satisfying = f.satisfying_assignments();
    let mut failures = Vec::new();

    let search = |notion: Notion, required: crate::model::NodeSet, min_size: usize| {
        let mut opts = SearchOptions::new(notion);
        opts.required = required;
        opts.min_size = min_size;
        opts.budget = budget;
        opts
    };

    let mut spanning = None;
    search_stable_trees(
        net,
        search(Notion::TreeOnly, net.nodes().collect(), n),
        &mut |t| {
            spanning = Some(t.clone());
            Visit::Stop
        },
    )?;

    let mut max_tree = 1;
    let mut padding_reachable = false;
    if spanning.is_some() {
        max_tree = n;
        padding_reachable = padding > 0;
    } else {
        search_stable_trees(
            net,
            search(Notion::TreeOnly, Default::default(), 1),
            &mut |t| {
                max_tree = max_tree.max(t.sink_component(sink).len());
                Visit::AtLeast(max_tree + 1)
            },
        )?;
        for d in g.padding_nodes() {
            search_stable_trees(net, search(Notion::TreeOnly, [d].into(), 1), &mut |_| {
                padding_reachable = true;
                Visit::Stop
            })?;
        }
    }

    let mut equilibria = Vec::new();
    search_stable_trees(
        net,
        search(Notion::Equilibrium, Default::default(), 1),
        &mut |t| {
            equilibria.push(t.clone());
            Visit::Continue
        },
    )?;
    let max_equilibrium = equilibria
        .iter()
        .map(|t| t.sink_component(sink).len())
        .max()
        .unwrap_or(1);

    let mut decoded = Vec::new();
    for t in &equilibria {
        failures.extend(gadget_failures(&g, t));
        if t.sink_component(sink).len() == n {
            match decode_assignment(&g, t) {
                Some(a) => decoded.push(a),
                None => failures.push("spanning equilibrium without a full assignment".into()),
            }
        }
    }
    if let Some(t) = &spanning {
        failures.extend(gadget_failures(&g, t));
    }

    let sat = !satisfying.is_empty();
    if sat != spanning.is_some() {
        failures.push(format!(
            "satisfiable={sat} but spanning stable tree exists={}",
            spanning.is_some()
        ));
    }
    if !sat {
        if max_tree > g.core_size() || max_equilibrium > g.core_size() {
            failures.push(format!(
                "unsatisfiable but stable tree of size {} exceeds {}",
                max_tree.max(max_equilibrium),
                g.core_size()
            ));
        }
        if padding_reachable {
            failures.push("unsatisfiable but a padding node joins a stable tree".into());
        }
    }
    let want: BTreeSet<_> = satisfying.iter().cloned().collect();
    let got: BTreeSet<_> = decoded.iter().cloned().collect();
    if want != got || got.len() != decoded.len() {
        failures.push(format!(
            "spanning equilibria encode {} assignments ({} distinct), truth table has {}",
            decoded.len(),
            got.len(),
            want.len()
        ));
    }

    Ok(DichotomyReport {
        nodes: n,
        core_size: g.core_size(),
        satisfying,
        spanning,
        max_tree,
        max_equilibrium,
        padding_reachable,
        equilibria: equilibria.len(),
        decoded,
        failures,
    })
}
