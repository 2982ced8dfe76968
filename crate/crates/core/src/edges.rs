//! Directed edges between coding vectors: renewal, decay, pruning and the
//! symmetric view used by the other training steps.
//!
//! Edges are stored sparsely. Every node keeps its outgoing edges sorted by
//! target, plus the sorted list of nodes that point at it, so one row of the
//! symmetric matrix `E_s = (E + Eᵀ) / 2` can be assembled without touching
//! the rest of the graph.

use ndarray::Array2;

use crate::neighbors::NeighborSet;

/// Sparse directed adjacency with strengths in `(0, 1]`; absent entries are 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeGraph {
    outgoing: Vec<Vec<(usize, f64)>>,
    incoming: Vec<Vec<usize>>,
}

/// What one call to [`curate_edges`] did to the winner's outgoing edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeUpdateOutcome {
    pub renewed: usize,
    pub decayed: usize,
    pub pruned: usize,
    /// The set `{ j : E_s(i_1, j) > 0 }` differs before and after.
    pub neighbor_set_changed: bool,
}

impl EdgeGraph {
    pub fn new(nodes: usize) -> Self {
        Self {
            outgoing: vec![Vec::new(); nodes],
            incoming: vec![Vec::new(); nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.outgoing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outgoing.is_empty()
    }

    /// Appends an isolated node and returns its index.
    pub fn add_node(&mut self) -> usize {
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        self.outgoing.len() - 1
    }

    /// `E(from, to)`.
    pub fn get(&self, from: usize, to: usize) -> f64 {
        let row = &self.outgoing[from];
        row.binary_search_by_key(&to, |&(j, _)| j)
            .map_or(0.0, |pos| row[pos].1)
    }

    /// Sets `E(from, to)`; a value of exactly 0 removes the edge.
    ///
    /// # Panics
    /// On self-loops or values outside `[0, 1]`.
    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        assert!(from != to, "self-loop on node {from}");
        assert!((0.0..=1.0).contains(&value), "edge strength {value} outside [0, 1]");
        let row = &mut self.outgoing[from];
        match row.binary_search_by_key(&to, |&(j, _)| j) {
            Ok(pos) if value == 0.0 => {
                row.remove(pos);
                remove_sorted(&mut self.incoming[to], from);
            }
            Ok(pos) => row[pos].1 = value,
            Err(_) if value == 0.0 => {}
            Err(pos) => {
                row.insert(pos, (to, value));
                insert_sorted(&mut self.incoming[to], from);
            }
        }
    }

    /// Outgoing edges of `node`, sorted by target.
    pub fn outgoing(&self, node: usize) -> &[(usize, f64)] {
        &self.outgoing[node]
    }

    /// Nodes with an edge pointing at `node`, ascending.
    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    /// Total number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.outgoing.iter().map(Vec::len).sum()
    }

    /// Row `node` of `E_s` as `(j, ê)` pairs with `ê > 0`, ascending in `j`.
    pub fn symmetric_row(&self, node: usize) -> Vec<(usize, f64)> {
        let out = &self.outgoing[node];
        let inc = &self.incoming[node];
        let mut row = Vec::with_capacity(out.len() + inc.len());
        let (mut a, mut b) = (0, 0);
        while a < out.len() || b < inc.len() {
            let next_out = out.get(a).map(|&(j, _)| j);
            let next_in = inc.get(b).copied();
            let j = match (next_out, next_in) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) => x,
                (None, Some(y)) => y,
                (None, None) => unreachable!(),
            };
            let mut sum = 0.0;
            if next_out == Some(j) {
                sum += out[a].1;
                a += 1;
            }
            if next_in == Some(j) {
                sum += self.get(j, node);
                b += 1;
            }
            row.push((j, sum / 2.0));
        }
        row
    }

    /// Indices `j` with `E_s(node, j) > 0`, ascending.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        self.symmetric_row(node).into_iter().map(|(j, _)| j).collect()
    }

    /// Dense copy of `E`.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.len();
        let mut dense = Array2::zeros((n, n));
        for (i, row) in self.outgoing.iter().enumerate() {
            for &(j, v) in row {
                dense[[i, j]] = v;
            }
        }
        dense
    }

    /// Builds a graph from a dense square matrix; the diagonal is ignored.
    pub fn from_dense(dense: &Array2<f64>) -> Self {
        let n = dense.nrows();
        let mut g = Self::new(n);
        for ((i, j), &v) in dense.indexed_iter() {
            if i != j && v > 0.0 {
                g.set(i, j, v);
            }
        }
        g
    }
}

fn insert_sorted(list: &mut Vec<usize>, v: usize) {
    if let Err(pos) = list.binary_search(&v) {
        list.insert(pos, v);
    }
}

fn remove_sorted(list: &mut Vec<usize>, v: usize) {
    if let Ok(pos) = list.binary_search(&v) {
        list.remove(pos);
    }
}

/// Renews, decays and prunes the outgoing edges of the winner `i_1`.
///
/// Every `j ≠ i_1` in the neighbor set is reset to 1. Every other outgoing
/// edge of `i_1` is multiplied by `epsilon`, then removed if it fell below
/// `e_min`.
pub fn curate_edges(
    edges: &mut EdgeGraph,
    neighbors: &NeighborSet,
    epsilon: f64,
    e_min: f64,
) -> EdgeUpdateOutcome {
    let winner = neighbors.winner();
    let before = edges.neighbors(winner);
    let renew: Vec<usize> = neighbors
        .indices()
        .iter()
        .copied()
        .filter(|&j| j != winner)
        .collect();

    let mut outcome = EdgeUpdateOutcome::default();
    let existing: Vec<(usize, f64)> = edges.outgoing(winner).to_vec();
    for (j, strength) in existing {
        if renew.contains(&j) {
            continue;
        }
        let decayed = strength * epsilon;
        outcome.decayed += 1;
        if decayed < e_min {
            edges.set(winner, j, 0.0);
            outcome.pruned += 1;
        } else {
            edges.set(winner, j, decayed);
        }
    }
    for &j in &renew {
        edges.set(winner, j, 1.0);
        outcome.renewed += 1;
    }

    outcome.neighbor_set_changed = edges.neighbors(winner) != before;
    outcome
}

/// `E_s = (E + Eᵀ) / 2` for a dense square matrix.
pub fn symmetrize(edges: &Array2<f64>) -> Array2<f64> {
    (edges + &edges.t()) / 2.0
}

/// Indices `j ≠ node` with `edges_sym[node, j] > 0`, ascending.
pub fn neighbor_list(edges_sym: &Array2<f64>, node: usize) -> Vec<usize> {
    edges_sym
        .row(node)
        .iter()
        .enumerate()
        .filter(|&(j, &v)| j != node && v > 0.0)
        .map(|(j, _)| j)
        .collect()
}
