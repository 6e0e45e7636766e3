use std::collections::VecDeque;

use rayon::prelude::*;

use super::{Adjacency, GraphError, SOURCE_BLOCK};
use crate::semnet::SemanticGraph;

/// `m / (n(n − 1))`.
pub fn density(graph: &SemanticGraph) -> Result<f64, GraphError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    Ok(graph.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// Hop distances from `source`; `u32::MAX` marks unreachable nodes.
pub(crate) fn bfs_hops(adj: &Adjacency, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    dist.fill(u32::MAX);
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        for (w, _) in adj.out(v) {
            if dist[w] == u32::MAX {
                dist[w] = next;
                queue.push_back(w);
            }
        }
    }
}

/// Mean hop count over ordered pairs `(u, v)`, `u ≠ v`, where `v` is
/// reachable from `u`. Unreachable pairs are left out entirely.
pub fn average_path_length(graph: &SemanticGraph) -> Result<f64, GraphError> {
    let adj = Adjacency::new(graph);
    let n = adj.len();
    let sources: Vec<usize> = (0..n).collect();
    let (total, pairs) = sources
        .par_chunks(SOURCE_BLOCK)
        .map(|block| {
            let mut dist = vec![u32::MAX; n];
            let mut queue = VecDeque::with_capacity(n);
            let mut total = 0u64;
            let mut pairs = 0u64;
            for &s in block {
                bfs_hops(&adj, s, &mut dist, &mut queue);
                for (v, &d) in dist.iter().enumerate() {
                    if v != s && d != u32::MAX {
                        total += d as u64;
                        pairs += 1;
                    }
                }
            }
            (total, pairs)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if pairs == 0 {
        return Err(GraphError::NoReachablePair);
    }
    Ok(total as f64 / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{complete, graph, random_weighted};
    use super::*;

    /// Floyd-Warshall over hop counts.
    fn apl_oracle(g: &SemanticGraph) -> Option<f64> {
        let n = g.node_count();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for e in &g.edges {
            d[e.source][e.target] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        let mut total = 0usize;
        let mut pairs = 0usize;
        for (i, row) in d.iter().enumerate() {
            for (j, &dij) in row.iter().enumerate() {
                if i != j && dij < inf {
                    total += dij;
                    pairs += 1;
                }
            }
        }
        (pairs > 0).then(|| total as f64 / pairs as f64)
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&complete(3)).unwrap(), 1.0);
        assert_eq!(density(&graph(3, &[(0, 1, 1)])).unwrap(), 1.0 / 6.0);
        assert_eq!(density(&graph(1, &[])), Err(GraphError::TooFewNodes(1)));
    }

    #[test]
    fn apl_examples() {
        let path = graph(3, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(average_path_length(&path).unwrap(), 4.0 / 3.0);
        assert_eq!(average_path_length(&complete(5)).unwrap(), 1.0);
        assert_eq!(average_path_length(&graph(2, &[(0, 1, 1)])).unwrap(), 1.0);
        assert_eq!(average_path_length(&graph(3, &[])), Err(GraphError::NoReachablePair));
    }

    #[test]
    fn apl_matches_oracle() {
        for seed in 0..20u64 {
            let n = 20 + (seed as usize * 9) % 180;
            let g = random_weighted(n, 3.0 / n as f64, 3, seed);
            assert_eq!(average_path_length(&g).ok(), apl_oracle(&g), "seed {seed}");
        }
    }

    #[test]
    fn density_times_pairs_is_edge_count() {
        for seed in 0..10u64 {
            let g = random_weighted(30, 0.2, 1, seed);
            let d = density(&g).unwrap();
            assert_eq!((d * 30.0 * 29.0).round() as usize, g.edge_count());
        }
    }
}
