//! Brandes betweenness on directed graphs.
//!
//! Hop-count mode runs one BFS per source. Inverse-weight mode runs Dijkstra
//! with edge length `1 / weight`, so heavier co-occurrence means a shorter
//! link. Path lengths within a relative `1e-9` of each other are treated as
//! equal; sums of reciprocals rarely agree to the last bit.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Adjacency, GraphError, SOURCE_BLOCK};
use crate::semnet::SemanticGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetweennessMode {
    Unweighted,
    InverseWeight,
}

const REL_TOL: f64 = 1e-9;

fn same_length(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Per-source scratch space.
struct Workspace {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    preds: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
        }
    }

    fn reset(&mut self) {
        self.dist.fill(f64::INFINITY);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.preds.iter_mut().for_each(Vec::clear);
        self.order.clear();
    }
}

fn bfs(adj: &Adjacency, s: usize, ws: &mut Workspace, queue: &mut VecDeque<usize>) {
    queue.clear();
    ws.dist[s] = 0.0;
    ws.sigma[s] = 1.0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        ws.order.push(v);
        let next = ws.dist[v] + 1.0;
        for (w, _) in adj.out(v) {
            if ws.dist[w].is_infinite() {
                ws.dist[w] = next;
                queue.push_back(w);
            }
            if ws.dist[w] == next {
                ws.sigma[w] += ws.sigma[v];
                ws.preds[w].push(v);
            }
        }
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &Adjacency, s: usize, ws: &mut Workspace, heap: &mut BinaryHeap<Entry>, settled: &mut [bool]) {
    heap.clear();
    settled.fill(false);
    ws.dist[s] = 0.0;
    ws.sigma[s] = 1.0;
    heap.push(Entry { dist: 0.0, node: s });
    while let Some(Entry { dist, node: v }) = heap.pop() {
        if settled[v] || dist > ws.dist[v] {
            continue;
        }
        settled[v] = true;
        ws.order.push(v);
        for (w, weight) in adj.out(v) {
            if settled[w] {
                continue;
            }
            let candidate = ws.dist[v] + 1.0 / weight as f64;
            if ws.dist[w].is_finite() && same_length(candidate, ws.dist[w]) {
                ws.sigma[w] += ws.sigma[v];
                ws.preds[w].push(v);
            } else if candidate < ws.dist[w] {
                ws.dist[w] = candidate;
                ws.sigma[w] = ws.sigma[v];
                ws.preds[w].clear();
                ws.preds[w].push(v);
                heap.push(Entry {
                    dist: candidate,
                    node: w,
                });
            }
        }
    }
}

fn accumulate(ws: &mut Workspace, s: usize, scores: &mut [f64]) {
    // nondecreasing distance, ties by node id: identical across both modes
    // whenever their shortest-path structure is identical
    let dist = &ws.dist;
    ws.order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    for &w in ws.order.iter().rev() {
        let coeff = (1.0 + ws.delta[w]) / ws.sigma[w];
        for &v in &ws.preds[w] {
            ws.delta[v] += ws.sigma[v] * coeff;
        }
        if w != s {
            scores[w] += ws.delta[w];
        }
    }
}

/// Unnormalized directed betweenness, indexed like `graph.nodes`.
pub fn betweenness(graph: &SemanticGraph, mode: BetweennessMode) -> Result<Vec<f64>, GraphError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    let adj = Adjacency::new(graph);
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_BLOCK)
        .map(|block| {
            let mut scores = vec![0.0; n];
            let mut ws = Workspace::new(n);
            let mut queue = VecDeque::new();
            let mut heap = BinaryHeap::new();
            let mut settled = vec![false; n];
            for &s in block {
                ws.reset();
                match mode {
                    BetweennessMode::Unweighted => bfs(&adj, s, &mut ws, &mut queue),
                    BetweennessMode::InverseWeight => dijkstra(&adj, s, &mut ws, &mut heap, &mut settled),
                }
                accumulate(&mut ws, s, &mut scores);
            }
            scores
        })
        .collect();
    let mut total = vec![0.0; n];
    for partial in partials {
        for (t, p) in total.iter_mut().zip(partial) {
            *t += p;
        }
    }
    Ok(total)
}
