//! Edmonds–Karp max flow over exact rational capacities.
//!
//! Shortest augmenting paths bound the number of augmentations by
//! `O(V·E)` independently of the capacities, so termination does not depend
//! on the capacities being integral. BFS visits arcs in insertion order,
//! which makes the resulting flow reproducible.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::rational::Q;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    residual: Q,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { arcs: Vec::new(), adjacency: vec![Vec::new(); nodes] }
    }

    /// Adds `from -> to` and returns the arc id.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: Q) -> usize {
        debug_assert!(!capacity.is_negative());
        let id = self.arcs.len();
        self.arcs.push(Arc { to, residual: capacity });
        self.arcs.push(Arc { to: from, residual: Q::zero() });
        self.adjacency[from].push(id);
        self.adjacency[to].push(id + 1);
        id
    }

    /// Flow currently carried by arc `id`.
    pub fn flow(&self, id: usize) -> Q {
        self.arcs[id ^ 1].residual.clone()
    }

    /// Runs to completion and returns the value of a maximum flow.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> Q {
        let mut total = Q::zero();
        while let Some(path) = self.shortest_augmenting_path(source, sink) {
            let delta = path
                .iter()
                .map(|&arc| &self.arcs[arc].residual)
                .min()
                .expect("path from source to sink is non-empty")
                .clone();
            for arc in path {
                self.arcs[arc].residual -= &delta;
                self.arcs[arc ^ 1].residual += &delta;
            }
            total += delta;
        }
        total
    }

    fn shortest_augmenting_path(&self, source: usize, sink: usize) -> Option<Vec<usize>> {
        let mut parent: Vec<Option<usize>> = vec![None; self.adjacency.len()];
        let mut seen = vec![false; self.adjacency.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for &arc in &self.adjacency[u] {
                let v = self.arcs[arc].to;
                if !seen[v] && self.arcs[arc].residual.is_positive() {
                    seen[v] = true;
                    parent[v] = Some(arc);
                    queue.push_back(v);
                }
            }
        }
        if !seen[sink] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = sink;
        while let Some(arc) = parent[v] {
            path.push(arc);
            v = self.arcs[arc ^ 1].to;
        }
        Some(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn diamond() {
        // 0 -> {1,2} -> 3
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, q(1, 2));
        net.add_arc(0, 2, q(1, 3));
        net.add_arc(1, 3, q(1, 4));
        net.add_arc(2, 3, q(1, 1));
        net.add_arc(1, 2, q(5, 1));
        assert_eq!(net.max_flow(0, 3), q(5, 6));
    }

    #[test]
    fn two_disjoint_routes() {
        let mut net = FlowNetwork::new(4);
        let s = 0;
        let t = 3;
        net.add_arc(s, 1, q(1, 1));
        net.add_arc(s, 2, q(1, 1));
        net.add_arc(1, 2, q(5, 1));
        net.add_arc(1, t, q(1, 1));
        net.add_arc(2, t, q(1, 1));
        assert_eq!(net.max_flow(s, t), q(2, 1));
    }

    #[test]
    fn disconnected_is_zero() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, q(1, 1));
        assert_eq!(net.max_flow(0, 2), q(0, 1));
    }
}
