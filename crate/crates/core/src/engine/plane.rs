use crate::model::{actual_path, Network, NodeId, NodeSet, RoutingGraph, RoutingPath};

/// Routing graph plus every node's believed routing path.
///
/// This is all the control plane looks at, so schedulers that need to
/// simulate activations clone just this part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlPlane {
    rg: RoutingGraph,
    paths: Vec<RoutingPath>,
}

impl ControlPlane {
    /// Control plane whose paths are the actual paths in `rg`.
    pub fn verified(net: &Network, rg: RoutingGraph) -> Self {
        let mut plane = Self {
            paths: vec![Vec::new(); net.n()],
            rg,
        };
        plane.verify(net);
        plane
    }

    pub fn routing_graph(&self) -> &RoutingGraph {
        &self.rg
    }

    pub fn path(&self, v: NodeId) -> &RoutingPath {
        &self.paths[v.0]
    }

    pub fn is_clear(&self, v: NodeId) -> bool {
        !self.paths[v.0].is_empty()
    }

    pub fn clear_set(&self) -> NodeSet {
        (0..self.paths.len())
            .map(NodeId)
            .filter(|&v| self.is_clear(v))
            .collect()
    }

    pub fn opaque_set(&self) -> NodeSet {
        (0..self.paths.len())
            .map(NodeId)
            .filter(|&v| !self.is_clear(v))
            .collect()
    }

    /// `w` is clear and its believed path avoids `v`'s filtering list.
    pub fn is_valid_for(&self, net: &Network, v: NodeId, w: NodeId) -> bool {
        let p = &self.paths[w.0];
        let d = net.filters(v);
        !p.is_empty() && !p.iter().any(|x| d.contains(x))
    }

    /// The best-ranked valid neighbour of `v`, if any.
    pub fn best_valid_choice(&self, net: &Network, v: NodeId) -> Option<NodeId> {
        net.prefs(v)
            .iter()
            .copied()
            .find(|&w| self.is_valid_for(net, v, w))
    }

    /// Activates `v`: it takes its best valid choice and prepends itself to
    /// that neighbour's believed path, or drops its arc and goes opaque.
    /// Returns the new next hop.
    pub fn activate(&mut self, net: &Network, v: NodeId) -> Option<NodeId> {
        debug_assert_ne!(v, net.sink());
        let choice = self.best_valid_choice(net, v);
        self.rg.set(v, choice);
        self.paths[v.0] = match choice {
            Some(w) => {
                let mut p = Vec::with_capacity(self.paths[w.0].len() + 1);
                p.push(v);
                p.extend_from_slice(&self.paths[w.0]);
                p
            }
            None => Vec::new(),
        };
        choice
    }

    /// Route verification: every node learns its actual path.
    pub fn verify(&mut self, net: &Network) {
        for v in net.nodes() {
            self.paths[v.0] = actual_path(&self.rg, net.sink(), v);
        }
    }

    pub fn is_consistent(&self, net: &Network, v: NodeId) -> bool {
        self.paths[v.0] == actual_path(&self.rg, net.sink(), v)
    }

    /// Stable set of paths: all nodes consistent and every node sitting on
    /// its best valid choice (no valid choice iff empty path and no arc).
    pub fn is_equilibrium(&self, net: &Network) -> bool {
        net.nodes().all(|v| self.is_consistent(net, v))
            && net.non_sink().all(|v| {
                let best = self.best_valid_choice(net, v);
                if self.rg.next(v) != best {
                    return false;
                }
                match best {
                    Some(w) => {
                        let p = &self.paths[v.0];
                        p.len() == self.paths[w.0].len() + 1 && p[1..] == self.paths[w.0][..]
                    }
                    None => self.paths[v.0].is_empty(),
                }
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    fn g(n: usize, arcs: &[(usize, usize)]) -> RoutingGraph {
        RoutingGraph::from_arcs(n, arcs.iter().map(|&(u, v)| (NodeId(u), NodeId(v))))
    }

    #[test]
    fn best_valid_choice_respects_filters() {
        let net = fixtures::notme2();
        // P(u)=(u,w,r), P(w)=(w,r)
        let plane = ControlPlane::verified(&net, g(3, &[(1, 2), (2, 0)]));
        assert_eq!(plane.best_valid_choice(&net, NodeId(2)), Some(NodeId(0)));
        assert_eq!(plane.best_valid_choice(&net, NodeId(1)), Some(NodeId(2)));
    }

    #[test]
    fn no_clear_neighbour_means_no_choice() {
        // 3 only points at the 1<->2 cycle
        let net = crate::model::Network::with_empty_filters(
            NodeId(0),
            vec![
                vec![],
                vec![NodeId(2), NodeId(0)],
                vec![NodeId(1), NodeId(0)],
                vec![NodeId(1), NodeId(2)],
            ],
        )
        .unwrap();
        let mut plane = ControlPlane::verified(&net, g(4, &[(1, 2), (2, 1), (3, 1)]));
        assert_eq!(plane.best_valid_choice(&net, NodeId(3)), None);
        assert_eq!(plane.activate(&net, NodeId(3)), None);
        assert_eq!(plane.routing_graph().next(NodeId(3)), None);
        assert!(!plane.is_clear(NodeId(3)));
    }

    #[test]
    fn activation_sequence_on_notme2() {
        let net = fixtures::notme2();
        let mut plane = ControlPlane::verified(&net, RoutingGraph::empty(3));
        assert_eq!(plane.activate(&net, NodeId(2)), Some(NodeId(0)));
        assert_eq!(plane.path(NodeId(2)), &vec![NodeId(2), NodeId(0)]);
        assert_eq!(plane.activate(&net, NodeId(1)), Some(NodeId(2)));
        assert_eq!(
            plane.path(NodeId(1)),
            &vec![NodeId(1), NodeId(2), NodeId(0)]
        );
    }

    #[test]
    fn equilibrium_examples() {
        let notme = fixtures::notme2();
        assert!(ControlPlane::verified(&notme, g(3, &[(1, 2), (2, 0)])).is_equilibrium(&notme));
        let nogood = fixtures::nogood();
        assert!(!ControlPlane::verified(&nogood, g(3, &[(1, 0), (2, 0)])).is_equilibrium(&nogood));
        assert!(!ControlPlane::verified(&nogood, RoutingGraph::empty(3)).is_equilibrium(&nogood));
    }
}
