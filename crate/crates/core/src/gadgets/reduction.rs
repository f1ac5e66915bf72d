use std::fmt::Write as _;

use super::CnfFormula;
use crate::model::{Network, NodeId, NodeSet};

/// The stable-tree hardness network of a 3-CNF formula.
///
/// Node ids: `r`=0, `d0`=1, then per variable `i` the block
/// `b_i, uT_i, uF_i, a_i`, then per clause `j` the block
/// `s_j, q_{1,j}, q_{2,j}, q_{3,j}, t_j`, then the padding nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetNetwork {
    pub net: Network,
    pub labels: Vec<String>,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub padding: usize,
}

impl GadgetNetwork {
    pub fn sink(&self) -> NodeId {
        NodeId(0)
    }

    /// The dummy sink.
    pub fn d0(&self) -> NodeId {
        NodeId(1)
    }

    fn var_base(&self, i: usize) -> usize {
        assert!(
            (1..=self.num_vars).contains(&i),
            "variable {i} out of range"
        );
        2 + 4 * (i - 1)
    }

    fn clause_base(&self, j: usize) -> usize {
        assert!(
            (1..=self.num_clauses).contains(&j),
            "clause {j} out of range"
        );
        2 + 4 * self.num_vars + 5 * (j - 1)
    }

    pub fn b(&self, i: usize) -> NodeId {
        NodeId(self.var_base(i))
    }

    pub fn u_true(&self, i: usize) -> NodeId {
        NodeId(self.var_base(i) + 1)
    }

    pub fn u_false(&self, i: usize) -> NodeId {
        NodeId(self.var_base(i) + 2)
    }

    pub fn a(&self, i: usize) -> NodeId {
        NodeId(self.var_base(i) + 3)
    }

    pub fn s(&self, j: usize) -> NodeId {
        NodeId(self.clause_base(j))
    }

    /// `z` in 1..=3.
    pub fn q(&self, z: usize, j: usize) -> NodeId {
        assert!((1..=3).contains(&z));
        NodeId(self.clause_base(j) + z)
    }

    pub fn t(&self, j: usize) -> NodeId {
        NodeId(self.clause_base(j) + 4)
    }

    /// Padding node `d_k`, `k` in 1..=L.
    pub fn pad(&self, k: usize) -> NodeId {
        assert!((1..=self.padding).contains(&k));
        NodeId(2 + 4 * self.num_vars + 5 * self.num_clauses + k - 1)
    }

    pub fn padding_nodes(&self) -> NodeSet {
        (1..=self.padding).map(|k| self.pad(k)).collect()
    }

    /// Number of non-padding nodes, `4N + 5M + 2`.
    pub fn core_size(&self) -> usize {
        4 * self.num_vars + 5 * self.num_clauses + 2
    }

    /// The exponent `e` with `n^e` equal to the core size.
    pub fn implied_epsilon(&self) -> f64 {
        (self.core_size() as f64).ln() / (self.net.n() as f64).ln()
    }

    /// `label <id> <role>` lines.
    pub fn labels_text(&self) -> String {
        let mut out = String::new();
        for (v, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "label {v} {l}");
        }
        out
    }
}

/// Builds the reduction network with `padding` padding nodes.
///
/// Within a variable gadget every node filters itself, `u` nodes rank `a`
/// over `b`, and `a` ranks `uT` over `uF`. The gadgets form a line: `b_1`
/// reaches the sink, `b_i` points to `a_{i-1}`, `t_1` to `a_N`, `t_j` to
/// `s_{j-1}`. Each `q_{z,j}` ranks `t_j` over `d0` and filters the `u` node
/// that lies on `t_j`'s line path exactly when its literal is false. `s_j`,
/// `t_j` and the padding nodes (which all point to `s_M`) filter `d0`.
pub fn build_reduction(f: &CnfFormula, padding: usize) -> GadgetNetwork {
    let nv = f.num_vars();
    let nc = f.clauses().len();
    let n = 4 * nv + 5 * nc + padding + 2;
    let mut g = GadgetNetwork {
        net: Network::new_unchecked(NodeId(0), vec![Vec::new(); n], vec![NodeSet::new(); n]),
        labels: vec![String::new(); n],
        num_vars: nv,
        num_clauses: nc,
        padding,
    };
    let mut prefs: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut filters: Vec<NodeSet> = vec![NodeSet::new(); n];
    let (r, d0) = (g.sink(), g.d0());
    g.labels[r.0] = "r".into();
    g.labels[d0.0] = "d0".into();
    prefs[d0.0] = vec![r];
    filters[r.0] = [r].into();
    filters[d0.0] = [d0].into();

    for i in 1..=nv {
        let (a, ut, uf, b) = (g.a(i), g.u_true(i), g.u_false(i), g.b(i));
        g.labels[a.0] = format!("a{i}");
        g.labels[ut.0] = format!("uT{i}");
        g.labels[uf.0] = format!("uF{i}");
        g.labels[b.0] = format!("b{i}");
        prefs[ut.0] = vec![a, b];
        prefs[uf.0] = vec![a, b];
        prefs[a.0] = vec![ut, uf];
        prefs[b.0] = vec![if i == 1 { r } else { g.a(i - 1) }];
        for v in [a, ut, uf, b] {
            filters[v.0] = [v].into();
        }
    }

    for (idx, clause) in f.clauses().iter().enumerate() {
        let j = idx + 1;
        let (s, t) = (g.s(j), g.t(j));
        g.labels[s.0] = format!("s{j}");
        g.labels[t.0] = format!("t{j}");
        prefs[s.0] = (1..=3).map(|z| g.q(z, j)).collect();
        prefs[t.0] = vec![if j == 1 { g.a(nv) } else { g.s(j - 1) }];
        filters[s.0] = [d0].into();
        filters[t.0] = [d0].into();
        for (z, &lit) in (1..=3).zip(clause) {
            let q = g.q(z, j);
            let var = lit.unsigned_abs() as usize;
            g.labels[q.0] = format!("q{z}_{j}");
            prefs[q.0] = vec![t, d0];
            let blocked = if lit > 0 {
                g.u_false(var)
            } else {
                g.u_true(var)
            };
            filters[q.0] = [blocked].into();
        }
    }

    for k in 1..=padding {
        let d = g.pad(k);
        g.labels[d.0] = format!("d{k}");
        prefs[d.0] = vec![g.s(nc)];
        filters[d.0] = [d0].into();
    }

    g.net = Network::new_unchecked(r, prefs, filters);
    g
}

/// Reads back the assignment encoded by a tree: `x_i` is true iff `a_i`
/// points to `uT_i`, false iff it points to `uF_i`.
pub fn decode_assignment(
    g: &GadgetNetwork,
    tree: &crate::model::RoutingGraph,
) -> Option<Vec<bool>> {
    (1..=g.num_vars)
        .map(|i| match tree.next(g.a(i)) {
            Some(w) if w == g.u_true(i) => Some(true),
            Some(w) if w == g.u_false(i) => Some(false),
            _ => None,
        })
        .collect()
}
