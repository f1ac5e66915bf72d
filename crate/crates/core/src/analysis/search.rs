//! Depth-first search over choice functions with early pruning.
//!
//! Nodes are decided closest-to-the-sink first. A node is either left out
//! of the tree or given a parent; after every decision each constraint whose
//! inputs are fully decided is checked. Paths are kept as bit sets, so the
//! search is limited to 64 nodes.

use super::AnalysisError;
use crate::model::{Network, NodeId, NodeSet, RoutingGraph};

/// Which stable trees to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Notion {
    /// Tree arcs are valid and best; nodes outside the tree are unconstrained.
    TreeOnly,
    /// Additionally, no node outside the tree has a valid neighbour. These
    /// are exactly the sink trees of equilibria.
    Equilibrium,
}

/// Returned by the visitor for each tree found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    Continue,
    Stop,
    /// Only trees with at least this many nodes are of further interest.
    AtLeast(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub notion: Notion,
    /// Nodes that must be in the tree.
    pub required: NodeSet,
    /// Smallest tree size (sink included) worth reporting.
    pub min_size: usize,
    /// Cap on the number of search nodes.
    pub budget: u64,
}

impl SearchOptions {
    pub fn new(notion: Notion) -> Self {
        Self {
            notion,
            required: NodeSet::new(),
            min_size: 1,
            budget: 200_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub visited: u64,
    pub found: u64,
    pub stopped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    Open,
    Out,
    To(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Unknown,
    Out,
    In(u64),
}

struct Dfs<'a> {
    net: &'a Network,
    opts: SearchOptions,
    order: Vec<NodeId>,
    filter_mask: Vec<u64>,
    choice: Vec<Choice>,
    status: Vec<Status>,
    stats: SearchStats,
}

impl Dfs<'_> {
    /// Recomputes every node's status. `false` on a cycle or an arc into a
    /// node that is out of the tree.
    fn resolve(&mut self) -> bool {
        let n = self.net.n();
        let mut known: Vec<Option<Status>> = vec![None; n];
        let sink = self.net.sink();
        known[sink.0] = Some(Status::In(1 << sink.0));
        let mut chain = Vec::with_capacity(n);
        for start in 0..n {
            chain.clear();
            let mut cur = NodeId(start);
            let base = loop {
                if let Some(s) = known[cur.0] {
                    break s;
                }
                match self.choice[cur.0] {
                    Choice::Open => {
                        known[cur.0] = Some(Status::Unknown);
                        break Status::Unknown;
                    }
                    Choice::Out => {
                        known[cur.0] = Some(Status::Out);
                        break Status::Out;
                    }
                    Choice::To(w) => {
                        if chain.contains(&cur) {
                            return false;
                        }
                        chain.push(cur);
                        cur = w;
                    }
                }
            };
            let mut acc = base;
            for &x in chain.iter().rev() {
                acc = match acc {
                    Status::In(m) => Status::In(m | 1 << x.0),
                    Status::Out => return false,
                    Status::Unknown => Status::Unknown,
                };
                known[x.0] = Some(acc);
            }
        }
        for (s, k) in self.status.iter_mut().zip(known) {
            *s = k.unwrap_or(Status::Unknown);
        }
        true
    }

    fn valid_for(&self, u: NodeId, x: NodeId) -> Option<bool> {
        match self.status[x.0] {
            Status::In(m) => Some(m & self.filter_mask[u.0] == 0),
            Status::Out => Some(false),
            Status::Unknown => None,
        }
    }

    fn consistent(&mut self) -> bool {
        if !self.resolve() {
            return false;
        }
        let possible = self
            .choice
            .iter()
            .filter(|c| !matches!(c, Choice::Out))
            .count();
        if possible < self.opts.min_size {
            return false;
        }
        for &u in &self.order {
            match self.choice[u.0] {
                Choice::Open => {}
                Choice::To(v) => {
                    if self.valid_for(u, v) == Some(false) {
                        return false;
                    }
                    for &x in self.net.prefs(u) {
                        if x == v {
                            break;
                        }
                        if self.valid_for(u, x) == Some(true) {
                            return false;
                        }
                    }
                }
                Choice::Out => {
                    if self.opts.notion == Notion::Equilibrium
                        && self
                            .net
                            .prefs(u)
                            .iter()
                            .any(|&x| self.valid_for(u, x) == Some(true))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn run(
        &mut self,
        depth: usize,
        visit: &mut dyn FnMut(&RoutingGraph) -> Visit,
    ) -> Result<bool, AnalysisError> {
        self.stats.visited += 1;
        if self.stats.visited > self.opts.budget {
            return Err(AnalysisError::Budget {
                needed: self.stats.visited as u128,
                budget: self.opts.budget as u128,
            });
        }
        if depth == self.order.len() {
            let mut rg = RoutingGraph::empty(self.net.n());
            for &v in &self.order {
                if let Choice::To(w) = self.choice[v.0] {
                    rg.set(v, Some(w));
                }
            }
            self.stats.found += 1;
            return Ok(match visit(&rg) {
                Visit::Continue => true,
                Visit::Stop => false,
                Visit::AtLeast(k) => {
                    self.opts.min_size = self.opts.min_size.max(k);
                    true
                }
            });
        }
        let v = self.order[depth];
        let mut options: Vec<Choice> = self.net.prefs(v).iter().map(|&w| Choice::To(w)).collect();
        if !self.opts.required.contains(&v) {
            options.push(Choice::Out);
        }
        for c in options {
            self.choice[v.0] = c;
            if self.consistent() && !self.run(depth + 1, visit)? {
                self.choice[v.0] = Choice::Open;
                return Ok(false);
            }
        }
        self.choice[v.0] = Choice::Open;
        Ok(true)
    }
}

/// Calls `visit` with every stable tree (as its arc set) meeting `opts`.
/// Trees are visited with parents tried in preference order before leaving
/// a node out.
pub fn search_stable_trees(
    net: &Network,
    opts: SearchOptions,
    visit: &mut dyn FnMut(&RoutingGraph) -> Visit,
) -> Result<SearchStats, AnalysisError> {
    let n = net.n();
    if n > 64 {
        return Err(AnalysisError::TooLarge(n));
    }
    let dist = net.distances_to_sink();
    let mut order: Vec<NodeId> = net.non_sink().collect();
    order.sort_by_key(|v| (dist[v.0], *v));
    let filter_mask = net
        .nodes()
        .map(|v| net.filters(v).iter().fold(0u64, |m, x| m | 1 << x.0))
        .collect();
    let mut dfs = Dfs {
        net,
        opts,
        order,
        filter_mask,
        choice: vec![Choice::Open; n],
        status: vec![Status::Unknown; n],
        stats: SearchStats::default(),
    };
    let finished = dfs.consistent() && dfs.run(0, visit)?;
    dfs.stats.stopped = !finished && dfs.stats.found > 0;
    Ok(dfs.stats)
}

/// Largest stable tree under `notion` as `(size, arcs)`; the sink alone if
/// nothing larger exists.
pub fn max_stable_tree_search(
    net: &Network,
    notion: Notion,
    budget: u64,
) -> Result<(usize, RoutingGraph), AnalysisError> {
    let sink = net.sink();
    let mut best: Option<(usize, RoutingGraph)> = None;
    let mut opts = SearchOptions::new(notion);
    opts.budget = budget;
    search_stable_trees(net, opts, &mut |t| {
        let size = t.sink_component(sink).len();
        if best.as_ref().is_none_or(|(b, _)| size > *b) {
            best = Some((size, t.clone()));
        }
        if size == net.n() {
            Visit::Stop
        } else {
            Visit::AtLeast(size + 1)
        }
    })?;
    Ok(best.unwrap_or_else(|| (1, RoutingGraph::empty(net.n()))))
}
