//! Macro (density, average path length), meso (Louvain communities,
//! modularity) and micro (betweenness) metrics for semantic graphs, plus
//! random directed baselines.

mod betweenness;
mod community;
mod paths;
mod random;

pub use betweenness::{betweenness, BetweennessMode};
pub use community::{louvain_communities, modularity, Partition};
pub use paths::{average_path_length, density};
pub use random::{random_directed_gnp, RandomGraphSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semnet::SemanticGraph;

/// Sources handled per work unit. Fixed so that floating-point accumulation
/// order does not depend on the thread count.
const SOURCE_BLOCK: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, has {0}")]
    TooFewNodes(usize),
    #[error("graph has no edges")]
    NoEdges,
    #[error("no node pair is connected by a path")]
    NoReachablePair,
    #[error("partition covers {partition} nodes but graph has {graph}")]
    PartitionSize { partition: usize, graph: usize },
    #[error("community ids are not contiguous from 0")]
    PartitionIds,
    #[error("wiring probability must lie in [0, 1], got {0}")]
    Probability(f64),
}

/// Compressed out-adjacency; targets of each source are ascending.
#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<u64>,
}

impl Adjacency {
    pub(crate) fn new(graph: &SemanticGraph) -> Self {
        let n = graph.node_count();
        let mut offsets = vec![0usize; n + 1];
        for e in &graph.edges {
            offsets[e.source + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        // edges are sorted by (source, target)
        let targets = graph.edges.iter().map(|e| e.target).collect();
        let weights = graph.edges.iter().map(|e| e.weight).collect();
        Self {
            offsets,
            targets,
            weights,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub(crate) fn out(&self, v: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub term: String,
    pub frequency: u64,
    pub community: usize,
    pub betweenness: f64,
    /// Betweenness divided by `(n − 1)(n − 2)`.
    pub betweenness_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetricsReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub average_path_length: f64,
    pub modularity: f64,
    pub community_count: usize,
    pub betweenness_mode: BetweennessMode,
    pub nodes: Vec<NodeMetrics>,
    pub top_betweenness: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub seed: u64,
    pub mode: BetweennessMode,
    pub top_k: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            mode: BetweennessMode::InverseWeight,
            top_k: 5,
        }
    }
}

/// Computes every metric for one graph.
pub fn graph_report(graph: &SemanticGraph, opts: &ReportOptions) -> Result<GraphMetricsReport, GraphError> {
    let n = graph.node_count();
    let density = density(graph)?;
    let average_path_length = average_path_length(graph)?;
    let partition = louvain_communities(graph, opts.seed)?;
    let modularity = modularity(graph, &partition)?;
    let scores = betweenness(graph, opts.mode)?;
    let norm = if n > 2 { ((n - 1) * (n - 2)) as f64 } else { 1.0 };

    let nodes: Vec<NodeMetrics> = graph
        .nodes
        .iter()
        .zip(&scores)
        .zip(&partition.assignment)
        .map(|((node, &b), &community)| NodeMetrics {
            term: node.term.clone(),
            frequency: node.frequency,
            community,
            betweenness: b,
            betweenness_normalized: b / norm,
        })
        .collect();
    let mut ranked: Vec<(String, f64)> = nodes.iter().map(|m| (m.term.clone(), m.betweenness)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(opts.top_k);

    Ok(GraphMetricsReport {
        node_count: n,
        edge_count: graph.edge_count(),
        density,
        average_path_length,
        modularity,
        community_count: partition.community_count,
        betweenness_mode: opts.mode,
        nodes,
        top_betweenness: ranked,
    })
}

/// Full report on one sampled random graph. The graph is unweighted, so
/// betweenness uses hop counts.
pub fn benchmark_report(spec: &RandomGraphSpec) -> Result<GraphMetricsReport, GraphError> {
    let graph = random_directed_gnp(spec)?;
    graph_report(
        &graph,
        &ReportOptions {
            seed: spec.seed,
            mode: BetweennessMode::Unweighted,
            top_k: 5,
        },
    )
}
