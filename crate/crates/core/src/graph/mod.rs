//! Mixed graphs with endpoint marks.
//!
//! One representation covers DAGs, CPDAGs, MAGs and PAGs: an edge is an
//! unordered pair of nodes carrying one mark per endpoint. A directed edge
//! A -> B is (Tail at A, Arrow at B), a bidirected edge is (Arrow, Arrow),
//! an undirected CPDAG edge is (Tail, Tail) and circle marks encode the
//! undetermined endpoints of a PAG.

mod cpdag;
mod format;
mod project;

pub use cpdag::dag_to_cpdag;
pub use format::{parse_graph, render_graph};
pub use project::latent_project;

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    names: Vec<String>,
    /// keyed by (min, max); marks stored as (mark at min node, mark at max node)
    edges: BTreeMap<(NodeId, NodeId), (Mark, Mark)>,
}

impl MixedGraph {
    pub fn new(names: Vec<String>) -> Self {
        let mut seen = BTreeSet::new();
        for n in &names {
            assert!(seen.insert(n.clone()), "duplicate node name {n}");
        }
        MixedGraph {
            names,
            edges: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Insert or replace the edge between `a` and `b`.
    pub fn set_edge(&mut self, a: NodeId, b: NodeId, mark_at_a: Mark, mark_at_b: Mark) {
        assert!(a != b, "self-loop on node {a}");
        assert!(a < self.names.len() && b < self.names.len());
        if a < b {
            self.edges.insert((a, b), (mark_at_a, mark_at_b));
        } else {
            self.edges.insert((b, a), (mark_at_b, mark_at_a));
        }
    }

    pub fn add_directed(&mut self, from: NodeId, to: NodeId) {
        self.set_edge(from, to, Mark::Tail, Mark::Arrow);
    }

    pub fn add_undirected(&mut self, a: NodeId, b: NodeId) {
        self.set_edge(a, b, Mark::Tail, Mark::Tail);
    }

    pub fn add_bidirected(&mut self, a: NodeId, b: NodeId) {
        self.set_edge(a, b, Mark::Arrow, Mark::Arrow);
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.remove(&key);
    }

    /// Marks as seen from `a`: (mark at a, mark at b).
    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<(Mark, Mark)> {
        if a < b {
            self.edges.get(&(a, b)).copied()
        } else {
            self.edges.get(&(b, a)).map(|&(mb, ma)| (ma, mb))
        }
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_between(a, b).is_some()
    }

    pub fn has_directed_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edge_between(from, to) == Some((Mark::Tail, Mark::Arrow))
    }

    pub fn has_undirected_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_between(a, b) == Some((Mark::Tail, Mark::Tail))
    }

    pub fn has_bidirected_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_between(a, b) == Some((Mark::Arrow, Mark::Arrow))
    }

    /// Edges in deterministic order: (a, b, mark at a, mark at b) with a < b.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Mark, Mark)> + '_ {
        self.edges.iter().map(|(&(a, b), &(ma, mb))| (a, b, ma, mb))
    }

    pub fn neighbors(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&u| u != v && self.adjacent(u, v))
            .collect()
    }

    /// Parents with respect to directed (Tail-Arrow) edges only.
    pub fn parents(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&u| self.has_directed_edge(u, v))
            .collect()
    }

    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&u| self.has_directed_edge(v, u))
            .collect()
    }

    pub fn is_dag(&self) -> bool {
        self.edges
            .values()
            .all(|&(ma, mb)| matches!((ma, mb), (Mark::Tail, Mark::Arrow) | (Mark::Arrow, Mark::Tail)))
            && !self.has_directed_cycle()
    }

    /// Cycle among Tail-Arrow edges.
    pub fn has_directed_cycle(&self) -> bool {
        self.topological_order().is_err()
    }

    /// Deterministic topological order over directed edges; ties broken by
    /// node index.
    pub fn topological_order(&self) -> Result<Vec<NodeId>> {
        let n = self.node_count();
        let mut indeg = vec![0usize; n];
        for (a, b, ma, mb) in self.edges() {
            match (ma, mb) {
                (Mark::Tail, Mark::Arrow) => indeg[b] += 1,
                (Mark::Arrow, Mark::Tail) => indeg[a] += 1,
                _ => {}
            }
        }
        let mut ready: BTreeSet<NodeId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for c in self.children(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvalidGraph("directed cycle detected".into()));
        }
        Ok(order)
    }

    /// Nodes with a directed path to `v` (strict: v not included).
    pub fn ancestors(&self, v: NodeId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        let mut stack = self.parents(v);
        while let Some(u) = stack.pop() {
            if out.insert(u) {
                stack.extend(self.parents(u));
            }
        }
        out
    }

    /// True iff a directed cycle exists among Tail-Arrow edges, or a
    /// bidirected edge A <-> B coexists with a directed path between its
    /// endpoints (an almost directed cycle).
    pub fn has_almost_directed_cycle(&self) -> bool {
        if self.has_directed_cycle() {
            return true;
        }
        for (a, b, ma, mb) in self.edges() {
            if (ma, mb) == (Mark::Arrow, Mark::Arrow)
                && (self.ancestors(a).contains(&b) || self.ancestors(b).contains(&a))
            {
                return true;
            }
        }
        false
    }

    /// Unshielded triples (a, b, c) with a-b and b-c adjacent, a,c not,
    /// reported once with a < c.
    pub fn unshielded_triples(&self) -> Vec<(NodeId, NodeId, NodeId)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for b in 0..n {
            let nb = self.neighbors(b);
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    let (a, c) = (nb[i], nb[j]);
                    if !self.adjacent(a, c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }
}
