//! Random-graph adjacency structures for the sparse-coupling variant.
//!
//! Graphs are undirected and loop-free. Storage is CSR-style neighbor lists,
//! which is what the vector-field evaluation iterates; an edge list view is
//! available for export.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::rng::{stream_rng, Rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphModel {
    ErdosRenyi { p: f64 },
    Regular { d: usize },
    WattsStrogatz { m: usize, p: f64 },
}

/// Symmetric, loop-free adjacency with one uniform weight per edge.
#[derive(Debug, Clone)]
pub struct Adjacency {
    n: usize,
    /// CSR offsets, length n + 1.
    offsets: Vec<usize>,
    /// Neighbor indices, ascending within each row.
    neighbors: Vec<usize>,
    pub model: GraphModel,
    pub seed: u64,
}

impl Adjacency {
    fn from_edges(n: usize, edges: &[(usize, usize)], model: GraphModel, seed: u64) -> Self {
        let mut degree = vec![0usize; n];
        for &(a, b) in edges {
            debug_assert!(a != b && a < n && b < n);
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0usize; 2 * edges.len()];
        for &(a, b) in edges {
            neighbors[cursor[a]] = b;
            cursor[a] += 1;
            neighbors[cursor[b]] = a;
            cursor[b] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self {
            n,
            offsets,
            neighbors,
            model,
            seed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.neighbors.len() as f64 / self.n as f64
        }
    }

    /// Neighbors of `v`, ascending.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Edges as (i, j) with i < j, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for v in 0..self.n {
            for &w in self.neighbors(v) {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    /// Whether the graph is connected (true for n <= 1).
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Writes one `i j weight` line per edge.
    pub fn write_edge_list<W: Write>(&self, weight: f64, mut out: W) -> std::io::Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{} {} {}", i, j, weight)?;
        }
        Ok(())
    }
}

/// Erdős–Rényi G(n, p): each unordered pair included independently with
/// probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Adjacency> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability p = {p} outside [0, 1]")));
    }
    let mut rng = stream_rng(seed, crate::rng::stream::GRAPH);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    Ok(Adjacency::from_edges(
        n,
        &edges,
        GraphModel::ErdosRenyi { p },
        seed,
    ))
}

/// Random d-regular graph via the pairing model, resampling on self-loops or
/// duplicate edges.
pub fn regular_graph(n: usize, d: usize, seed: u64) -> Result<Adjacency> {
    if d >= n && !(n == 1 && d == 0) {
        return Err(invalid(format!("degree {d} not attainable with {n} nodes")));
    }
    if (n * d) % 2 != 0 {
        return Err(invalid(format!(
            "n * d = {} is odd; no {d}-regular graph on {n} nodes exists",
            n * d
        )));
    }
    let mut rng = stream_rng(seed, crate::rng::stream::GRAPH);
    if d == 0 {
        return Ok(Adjacency::from_edges(n, &[], GraphModel::Regular { d }, seed));
    }
    // Pairing model with local repair: shuffle d stubs per vertex, pair them
    // off in order, and when a pair would form a self-loop or duplicate edge,
    // swap in a later stub that doesn't. Restart on the rare dead end.
    'attempt: for _ in 0..1000 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        stubs.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::with_capacity(n * d / 2);
        let total = stubs.len();
        let mut i = 0;
        while i < total {
            let a = stubs[i];
            let mut j = i + 1;
            loop {
                if j == total {
                    continue 'attempt;
                }
                let b = stubs[j];
                let key = (a.min(b), a.max(b));
                if a != b && !seen.contains(&key) {
                    seen.insert(key);
                    edges.push(key);
                    stubs.swap(i + 1, j);
                    break;
                }
                j += 1;
            }
            i += 2;
        }
        return Ok(Adjacency::from_edges(n, &edges, GraphModel::Regular { d }, seed));
    }
    Err(invalid(format!(
        "pairing model failed to produce a simple {d}-regular graph on {n} nodes"
    )))
}

/// Watts–Strogatz ring lattice with `m` nearest neighbors (m even), each edge
/// rewired with probability `p`. Rewiring preserves the edge count and avoids
/// self-loops and duplicates.
pub fn watts_strogatz(n: usize, m: usize, p: f64, seed: u64) -> Result<Adjacency> {
    if m % 2 != 0 {
        return Err(invalid(format!("mean degree m = {m} must be even")));
    }
    if m >= n {
        return Err(invalid(format!("mean degree m = {m} must be below n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("rewiring probability p = {p} outside [0, 1]")));
    }
    let mut rng = stream_rng(seed, crate::rng::stream::GRAPH);
    let mut present: Vec<std::collections::HashSet<usize>> =
        (0..n).map(|_| std::collections::HashSet::new()).collect();
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * m / 2);
    for v in 0..n {
        for k in 1..=(m / 2) {
            let w = (v + k) % n;
            edges.push((v, w));
            present[v].insert(w);
            present[w].insert(v);
        }
    }
    for idx in 0..edges.len() {
        if rng.gen::<f64>() >= p {
            continue;
        }
        let (a, b) = edges[idx];
        // Keep endpoint a, redraw the other endpoint.
        let candidate = pick_free_endpoint(a, n, &present, &mut rng);
        let Some(c) = candidate else { continue };
        present[a].remove(&b);
        present[b].remove(&a);
        present[a].insert(c);
        present[c].insert(a);
        edges[idx] = (a, c);
    }
    Ok(Adjacency::from_edges(
        n,
        &edges,
        GraphModel::WattsStrogatz { m, p },
        seed,
    ))
}

fn pick_free_endpoint(
    a: usize,
    n: usize,
    present: &[std::collections::HashSet<usize>],
    rng: &mut Rng,
) -> Option<usize> {
    if present[a].len() >= n - 1 {
        return None; // a is saturated; keep the original edge
    }
    loop {
        let c = rng.gen_range(0..n);
        if c != a && !present[a].contains(&c) {
            return Some(c);
        }
    }
}
