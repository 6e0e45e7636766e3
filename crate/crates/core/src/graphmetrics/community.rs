//! Louvain community detection and directed modularity.
//!
//! Communities are searched on the symmetrized graph (`w'(u,v) = w(u,v) + w(v,u)`);
//! the quality of the result is reported with the directed modularity of the
//! original graph.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::semnet::SemanticGraph;

/// Community id per node, ids contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub community_count: usize,
}

impl Partition {
    /// Relabels arbitrary ids to `0..k` in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Self {
            assignment,
            community_count: remap.len(),
        }
    }

    pub fn all_in_one(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            community_count: usize::from(n > 0),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            community_count: n,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    fn check(&self, n: usize) -> Result<(), GraphError> {
        if self.assignment.len() != n {
            return Err(GraphError::PartitionSize {
                partition: self.assignment.len(),
                graph: n,
            });
        }
        let mut seen = vec![false; self.community_count];
        for &c in &self.assignment {
            if c >= self.community_count {
                return Err(GraphError::PartitionIds);
            }
            seen[c] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(GraphError::PartitionIds);
        }
        Ok(())
    }
}

/// Directed weighted modularity
/// `Q = (1/W) Σ_ij [w_ij − s_i^out s_j^in / W] δ(c_i, c_j)`.
pub fn modularity(graph: &SemanticGraph, partition: &Partition) -> Result<f64, GraphError> {
    partition.check(graph.node_count())?;
    let total = graph.total_weight() as f64;
    if total == 0.0 {
        return Err(GraphError::NoEdges);
    }
    let k = partition.community_count;
    let mut inside = vec![0.0; k];
    let mut out_strength = vec![0.0; k];
    let mut in_strength = vec![0.0; k];
    for e in &graph.edges {
        let (cu, cv) = (partition.assignment[e.source], partition.assignment[e.target]);
        let w = e.weight as f64;
        if cu == cv {
            inside[cu] += w;
        }
        out_strength[cu] += w;
        in_strength[cv] += w;
    }
    let q: f64 = (0..k)
        .map(|c| inside[c] / total - (out_strength[c] / total) * (in_strength[c] / total))
        .sum();
    Ok(q)
}

/// Undirected weighted graph for the Louvain passes. `adj` holds each
/// neighbor once per direction; `loops[i]` is the full diagonal entry `A_ii`.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    degree: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(graph: &SemanticGraph) -> Self {
        let n = graph.node_count();
        let mut sym: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        for e in &graph.edges {
            let w = e.weight as f64;
            *sym[e.source].entry(e.target).or_insert(0.0) += w;
            *sym[e.target].entry(e.source).or_insert(0.0) += w;
        }
        Self::from_maps(sym, vec![0.0; n])
    }

    fn from_maps(maps: Vec<HashMap<usize, f64>>, loops: Vec<f64>) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = maps
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_by_key(|&(j, _)| j);
                v
            })
            .collect();
        let degree: Vec<f64> = adj
            .iter()
            .zip(&loops)
            .map(|(nbrs, &l)| nbrs.iter().map(|&(_, w)| w).sum::<f64>() + l)
            .collect();
        let two_m = degree.iter().sum();
        Self {
            adj,
            loops,
            degree,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Local moving phase. Returns the community of each node and whether
    /// anything moved.
    fn local_moves(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut total: Vec<f64> = self.degree.clone();
        let mut link = vec![0.0; n];
        let mut marked = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        let mut any_move = false;
        let eps = 1e-12 * self.two_m.max(1.0);

        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let own = community[i];
                let ki = self.degree[i];
                for &c in &touched {
                    link[c] = 0.0;
                    marked[c] = false;
                }
                touched.clear();
                touched.push(own);
                marked[own] = true;
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if !marked[c] {
                        marked[c] = true;
                        touched.push(c);
                    }
                    link[c] += w;
                }

                total[own] -= ki;
                let gain = |c: usize, link: &[f64], total: &[f64]| link[c] - total[c] * ki / self.two_m;
                let stay = gain(own, &link, &total);
                let mut best = own;
                let mut best_gain = stay;
                for &c in &touched {
                    let g = gain(c, &link, &total);
                    if g > best_gain + eps || ((g - best_gain).abs() <= eps && c < best && best != own) {
                        best = c;
                        best_gain = g;
                    }
                }
                if best_gain <= stay + eps {
                    best = own;
                }
                total[best] += ki;
                if best != own {
                    community[i] = best;
                    moved = true;
                    any_move = true;
                }
            }
            if !moved {
                break;
            }
        }
        (community, any_move)
    }

    fn aggregate(&self, community: &[usize], count: usize) -> Self {
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); count];
        let mut loops = vec![0.0; count];
        for (i, nbrs) in self.adj.iter().enumerate() {
            let ci = community[i];
            loops[ci] += self.loops[i];
            for &(j, w) in nbrs {
                let cj = community[j];
                if ci == cj {
                    loops[ci] += w;
                } else {
                    *maps[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        Self::from_maps(maps, loops)
    }
}

/// Louvain local moving plus aggregation, repeated until no node moves.
///
/// Node visiting order is shuffled by a ChaCha8 generator seeded with `seed`.
/// A node leaves its community only for a strictly better gain; equal gains
/// among other communities go to the smallest community id.
pub fn louvain_communities(graph: &SemanticGraph, seed: u64) -> Result<Partition, GraphError> {
    let n = graph.node_count();
    if graph.edge_count() == 0 {
        return Err(GraphError::NoEdges);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(graph);
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let (community, moved) = level.local_moves(&mut rng);
        if !moved {
            break;
        }
        let relabeled = Partition::from_labels(&community);
        for m in membership.iter_mut() {
            *m = relabeled.assignment[*m];
        }
        level = level.aggregate(&relabeled.assignment, relabeled.community_count);
    }
    Ok(Partition::from_labels(&membership))
}
