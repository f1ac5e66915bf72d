use super::graph::rotate_to_min;
use super::{Network, NodeId, NodeSet};

/// Components of the first-choice graph `F = (V, A_1)`.
///
/// Component 0 always contains the sink; its cycle is the degenerate `[sink]`.
/// Every other component has exactly one cycle, of length at least two.
/// Non-sink components are numbered by their smallest cycle node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstClassDecomposition {
    component_of: Vec<usize>,
    components: Vec<NodeSet>,
    cycles: Vec<Vec<NodeId>>,
}

impl FirstClassDecomposition {
    pub fn new(net: &Network) -> Self {
        let n = net.n();
        let first = net.first_choice_graph();
        let sink = net.sink();

        // Find each cycle once; label cycle nodes with a component index.
        let mut cycles: Vec<Vec<NodeId>> = vec![vec![sink]];
        let mut component_of = vec![usize::MAX; n];
        component_of[sink.0] = 0;
        let mut cycle_starts: Vec<Vec<NodeId>> = Vec::new();
        let mut on_cycle = vec![false; n];
        for v in net.nodes() {
            if let Some(c) = first.cycle_from(v) {
                if !on_cycle[c[0].0] {
                    for x in &c {
                        on_cycle[x.0] = true;
                    }
                    cycle_starts.push(c);
                }
            }
        }
        cycle_starts.sort();
        for c in cycle_starts {
            let idx = cycles.len();
            for x in &c {
                component_of[x.0] = idx;
            }
            cycles.push(rotate_to_min(&c));
        }

        // Every other node inherits the component of wherever its walk lands.
        for v in net.nodes() {
            if component_of[v.0] != usize::MAX {
                continue;
            }
            let mut chain = vec![v];
            let mut cur = v;
            let idx = loop {
                let w = first.next(cur).expect("non-sink nodes have a first choice");
                if component_of[w.0] != usize::MAX {
                    break component_of[w.0];
                }
                chain.push(w);
                cur = w;
            };
            for x in chain {
                component_of[x.0] = idx;
            }
        }

        let mut components = vec![NodeSet::new(); cycles.len()];
        for v in net.nodes() {
            components[component_of[v.0]].insert(v);
        }
        Self {
            component_of,
            components,
            cycles,
        }
    }

    pub fn component_of(&self, v: NodeId) -> usize {
        self.component_of[v.0]
    }

    pub fn components(&self) -> &[NodeSet] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &NodeSet {
        &self.components[i]
    }

    pub fn cycle(&self, i: usize) -> &[NodeId] {
        &self.cycles[i]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn tri_is_one_component() {
        let fcd = FirstClassDecomposition::new(&fixtures::tri());
        assert_eq!(fcd.len(), 1);
        assert_eq!(fcd.component(0), &set(&[0, 1, 2]));
        assert_eq!(fcd.cycle(0), &[NodeId(0)]);
    }

    #[test]
    fn nogood_has_a_two_cycle() {
        let fcd = FirstClassDecomposition::new(&fixtures::nogood());
        assert_eq!(fcd.len(), 2);
        assert_eq!(fcd.component(0), &set(&[0]));
        assert_eq!(fcd.component(1), &set(&[1, 2]));
        assert_eq!(fcd.cycle(1), &[NodeId(1), NodeId(2)]);
        assert_eq!(fcd.component_of(NodeId(2)), 1);
    }

    #[test]
    fn star_is_one_component() {
        let fcd = FirstClassDecomposition::new(&fixtures::star(6));
        assert_eq!(fcd.len(), 1);
        assert_eq!(fcd.component(0).len(), 6);
    }

    #[test]
    fn tails_join_their_cycle() {
        // 1 <-> 2 cycle, 3 -> 1 tail, 4 -> 0
        let net = Network::with_empty_filters(
            NodeId(0),
            vec![
                vec![],
                vec![NodeId(2), NodeId(0)],
                vec![NodeId(1), NodeId(0)],
                vec![NodeId(1)],
                vec![NodeId(0)],
            ],
        )
        .unwrap();
        let fcd = FirstClassDecomposition::new(&net);
        assert_eq!(fcd.component(0), &set(&[0, 4]));
        assert_eq!(fcd.component(1), &set(&[1, 2, 3]));
    }
}
