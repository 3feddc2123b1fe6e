//! Lexicographical topological sort extended to cyclic graphs.
//!
//! Kahn-style ordering where ties at equal in-degree break by
//! lexicographic path order. When every remaining node still has incoming
//! edges (the residual minimum in-degree is positive), the
//! lexicographically smallest node among those with minimum in-degree is
//! forcibly removed — recorded in `cycle_broken` — and the walk continues.
//! One node is removed per iteration, so the output is a unique, stable
//! total order: for each edge `(u, v)` with `v` not cycle-broken, `u`
//! precedes `v`.
//!
//! Node ids are lexicographic path ranks by construction, so comparing ids
//! and comparing paths is the same order; the implementation keys its heap
//! by `(in-degree, id)`.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::repo::graph::{ImportGraph, NodeId};

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("order is not a permutation of the graph's nodes")]
    NotAPermutation,
}

/// A total order over the graph's nodes plus the set of nodes that were
/// emitted while they still had incoming edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopoOrder {
    pub order: Vec<NodeId>,
    pub cycle_broken: BTreeSet<NodeId>,
}

impl TopoOrder {
    pub fn paths<'g>(&self, graph: &'g ImportGraph) -> Vec<&'g str> {
        self.order.iter().map(|&id| graph.path(id)).collect()
    }
}

/// Sort a graph's nodes so dependencies precede dependents, breaking
/// cycles at the minimum-in-degree, lexicographically-smallest node.
pub fn lex_topo_sort(graph: &ImportGraph) -> TopoOrder {
    let n = graph.node_count();
    let mut successors: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut in_degree: Vec<usize> = vec![0; n];
    for (u, v) in graph.edges() {
        successors[u as usize].push(v);
        in_degree[v as usize] += 1;
    }

    // Lazy-deletion heap keyed by (in-degree, id). Stale entries are
    // skipped on pop; decrements push fresh entries.
    let mut heap: BinaryHeap<Reverse<(usize, NodeId)>> = BinaryHeap::with_capacity(n);
    for (id, &degree) in in_degree.iter().enumerate() {
        heap.push(Reverse((degree, id as NodeId)));
    }
    let mut emitted = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cycle_broken = BTreeSet::new();

    while let Some(Reverse((degree, id))) = heap.pop() {
        if emitted[id as usize] || degree != in_degree[id as usize] {
            continue;
        }
        emitted[id as usize] = true;
        if degree > 0 {
            cycle_broken.insert(id);
        }
        order.push(id);
        for &succ in &successors[id as usize] {
            if !emitted[succ as usize] {
                in_degree[succ as usize] -= 1;
                heap.push(Reverse((in_degree[succ as usize], succ)));
            }
        }
    }

    TopoOrder {
        order,
        cycle_broken,
    }
}

/// Return every edge `(u, v)` whose dependent `v` comes before its
/// dependency `u` in the order. Pure checker.
pub fn validate_order(
    graph: &ImportGraph,
    topo: &TopoOrder,
) -> Result<Vec<(NodeId, NodeId)>, TopoError> {
    let n = graph.node_count();
    if topo.order.len() != n {
        return Err(TopoError::NotAPermutation);
    }
    let mut position = vec![usize::MAX; n];
    for (pos, &id) in topo.order.iter().enumerate() {
        let slot = position
            .get_mut(id as usize)
            .ok_or(TopoError::NotAPermutation)?;
        if *slot != usize::MAX {
            return Err(TopoError::NotAPermutation);
        }
        *slot = pos;
    }
    let mut violated = Vec::new();
    for (u, v) in graph.edges() {
        if position[v as usize] < position[u as usize] {
            violated.push((u, v));
        }
    }
    Ok(violated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> ImportGraph {
        let names: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        let id = |name: &str| sorted.iter().position(|p| p == name).unwrap() as NodeId;
        ImportGraph::new(names, edges.iter().map(|(u, v)| (id(u), id(v)))).unwrap()
    }

    #[test]
    fn empty_graph() {
        let g = graph(&[], &[]);
        let t = lex_topo_sort(&g);
        assert!(t.order.is_empty());
        assert!(t.cycle_broken.is_empty());
    }

    #[test]
    fn diamond_dag_breaks_ties_lexicographically() {
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")],
        );
        let t = lex_topo_sort(&g);
        assert_eq!(t.paths(&g), vec!["a", "b", "c", "d"]);
        assert!(t.cycle_broken.is_empty());
        assert!(validate_order(&g, &t).unwrap().is_empty());
    }

    #[test]
    fn three_cycle_breaks_at_smallest() {
        let g = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]);
        let t = lex_topo_sort(&g);
        assert_eq!(t.paths(&g), vec!["a", "b", "c"]);
        let broken: Vec<&str> = t.cycle_broken.iter().map(|&i| g.path(i)).collect();
        assert_eq!(broken, vec!["a"]);
        // The only violated edge is (c, a), whose head a was cycle-broken.
        let violations = validate_order(&g, &t).unwrap();
        assert_eq!(violations.len(), 1);
        let (u, v) = violations[0];
        assert_eq!(g.path(u), "c");
        assert_eq!(g.path(v), "a");
        assert!(t.cycle_broken.contains(&v));
    }

    #[test]
    fn single_node_order_is_valid() {
        let g = graph(&["n"], &[]);
        let t = lex_topo_sort(&g);
        assert_eq!(t.order, vec![0]);
        assert!(validate_order(&g, &t).unwrap().is_empty());
    }

    #[test]
    fn cycle_broken_empty_iff_acyclic() {
        let dag = graph(&["a", "b"], &[("a", "b")]);
        assert!(lex_topo_sort(&dag).cycle_broken.is_empty());
        let cyc = graph(&["a", "b"], &[("a", "b"), ("b", "a")]);
        assert!(!lex_topo_sort(&cyc).cycle_broken.is_empty());
    }

    #[test]
    fn validate_rejects_non_permutation() {
        let g = graph(&["a", "b"], &[("a", "b")]);
        let bad = TopoOrder {
            order: vec![0, 0],
            cycle_broken: BTreeSet::new(),
        };
        assert!(matches!(
            validate_order(&g, &bad),
            Err(TopoError::NotAPermutation)
        ));
        let short = TopoOrder {
            order: vec![0],
            cycle_broken: BTreeSet::new(),
        };
        assert!(validate_order(&g, &short).is_err());
    }

    #[test]
    fn min_in_degree_is_preferred_over_name() {
        // b has in-degree 0, a has in-degree 1: b goes first even though
        // a is lexicographically smaller.
        let g = graph(&["a", "b"], &[("b", "a")]);
        let t = lex_topo_sort(&g);
        assert_eq!(t.paths(&g), vec!["b", "a"]);
        assert!(t.cycle_broken.is_empty());
    }

    #[test]
    fn two_cycles_break_independently() {
        // Cycle {a, b} and cycle {c, d} with no edges between them.
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")],
        );
        let t = lex_topo_sort(&g);
        assert_eq!(t.paths(&g), vec!["a", "b", "c", "d"]);
        let broken: Vec<&str> = t.cycle_broken.iter().map(|&i| g.path(i)).collect();
        assert_eq!(broken, vec!["a", "c"]);
    }
}
