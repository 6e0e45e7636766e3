use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::semnet::{Edge, SemanticGraph};

/// Directed G(n, p) parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomGraphSpec {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

/// Each ordered pair `(u, v)`, `u ≠ v`, gets a weight-1 edge with probability `p`.
///
/// Nodes are labelled `v0`, `v1`, ... zero-padded so that term order equals
/// index order.
pub fn random_directed_gnp(spec: &RandomGraphSpec) -> Result<SemanticGraph, GraphError> {
    if spec.n < 2 {
        return Err(GraphError::TooFewNodes(spec.n));
    }
    if !(0.0..=1.0).contains(&spec.p) {
        return Err(GraphError::Probability(spec.p));
    }
    let width = (spec.n - 1).to_string().len();
    let terms = (0..spec.n).map(|i| format!("v{i:0width$}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for source in 0..spec.n {
        for target in 0..spec.n {
            if source != target && rng.random::<f64>() < spec.p {
                edges.push(Edge {
                    source,
                    target,
                    weight: 1,
                });
            }
        }
    }
    Ok(SemanticGraph::from_edges(terms, edges).expect("generated edges are valid"))
}
