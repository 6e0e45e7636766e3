//! Directed co-occurrence matrices and the semantic graphs built from them.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::PreparedText;

#[derive(Debug, Error)]
pub enum SemnetError {
    #[error("no co-occurrences")]
    NoCooccurrences,
    #[error("matrix csv: {0}")]
    Csv(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

/// Span inside which ordered term pairs are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Sentence,
    WholeText,
}

/// Sparse counts of ordered term pairs.
///
/// Terms are indexed in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CooccurrenceMatrix {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    counts: BTreeMap<(usize, usize), u64>,
}

impl CooccurrenceMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    fn intern(&mut self, term: &str) -> usize {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len();
        self.terms.push(term.to_string());
        self.index.insert(term.to_string(), id);
        id
    }

    /// Every earlier occurrence points at every later occurrence of a different term.
    pub fn add_window<S: AsRef<str>>(&mut self, window: &[S]) {
        let ids: Vec<usize> = window.iter().map(|t| self.intern(t.as_ref())).collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if a != b {
                    *self.counts.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
    }

    /// Adds `count` to the cell `(source, target)`.
    pub fn add_count(&mut self, source: &str, target: &str, count: u64) -> Result<(), SemnetError> {
        if source == target {
            return Err(SemnetError::Csv(format!("self pair {source:?}")));
        }
        if count == 0 {
            return Err(SemnetError::Csv(format!("zero count for {source:?} -> {target:?}")));
        }
        let a = self.intern(source);
        let b = self.intern(target);
        *self.counts.entry((a, b)).or_insert(0) += count;
        Ok(())
    }

    pub fn get(&self, source: &str, target: &str) -> u64 {
        match (self.term_id(source), self.term_id(target)) {
            (Some(a), Some(b)) => self.counts.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Non-zero cells as `(source, target, count)`, ordered by term index.
    pub fn cells(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.counts
            .iter()
            .map(|(&(a, b), &c)| (self.terms[a].as_str(), self.terms[b].as_str(), c))
    }

    pub fn cell_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Cell-wise sum. Terms new to `self` are appended in `other`'s order.
    pub fn merge(&mut self, other: &CooccurrenceMatrix) {
        let remap: Vec<usize> = other.terms.iter().map(|t| self.intern(t)).collect();
        for (&(a, b), &c) in &other.counts {
            *self.counts.entry((remap[a], remap[b])).or_insert(0) += c;
        }
    }

    fn merged(mut self, other: CooccurrenceMatrix) -> Self {
        self.merge(&other);
        self
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SemnetError> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| SemnetError::Csv(e.to_string());
        w.write_record(["source", "target", "count"]).map_err(err)?;
        for (s, t, c) in self.cells() {
            w.write_record([s, t, &c.to_string()]).map_err(err)?;
        }
        w.flush().map_err(|e| SemnetError::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, SemnetError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(|e| SemnetError::Csv(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != ["source", "target", "count"] {
            return Err(SemnetError::Csv("expected header source,target,count".into()));
        }
        let mut matrix = Self::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| SemnetError::Csv(e.to_string()))?;
            if rec.len() != 3 {
                return Err(SemnetError::Csv(format!("row {}: expected 3 fields", i + 1)));
            }
            let count = rec[2]
                .trim()
                .parse::<u64>()
                .map_err(|_| SemnetError::Csv(format!("row {}: bad count {:?}", i + 1, &rec[2])))?;
            matrix.add_count(&rec[0], &rec[1], count)?;
        }
        Ok(matrix)
    }
}

fn windows_of(text: &PreparedText, window: Window) -> Vec<Vec<&str>> {
    match window {
        Window::Sentence => text
            .filtered_sentences
            .iter()
            .map(|s| s.iter().map(|t| t.surface.as_str()).collect())
            .collect(),
        Window::WholeText => vec![text.filtered_tokens().map(|t| t.surface.as_str()).collect()],
    }
}

fn matrix_of(text: &PreparedText, window: Window) -> CooccurrenceMatrix {
    let mut m = CooccurrenceMatrix::new();
    for w in windows_of(text, window) {
        m.add_window(&w);
    }
    m
}

/// Accumulates co-occurrences over the filtered tokens of every text.
pub fn cooccurrence_matrix(texts: &[PreparedText], window: Window) -> CooccurrenceMatrix {
    let mut m = CooccurrenceMatrix::new();
    for text in texts {
        for w in windows_of(text, window) {
            m.add_window(&w);
        }
    }
    m
}

/// Same result as [`cooccurrence_matrix`], one partial matrix per text.
pub fn cooccurrence_matrix_par(texts: &[PreparedText], window: Window) -> CooccurrenceMatrix {
    texts
        .par_iter()
        .map(|t| matrix_of(t, window))
        .reduce(CooccurrenceMatrix::new, CooccurrenceMatrix::merged)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub term: String,
    /// Total co-occurrence weight the term takes part in (in + out).
    pub frequency: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: u64,
}

/// Directed weighted graph over terms. Nodes are sorted by term and edges by
/// `(source, target)`; there are no self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl SemanticGraph {
    /// Builds a graph from labelled nodes and weighted edges, computing node strengths.
    pub fn from_edges(terms: Vec<String>, mut edges: Vec<Edge>) -> Result<Self, SemnetError> {
        let n = terms.len();
        edges.sort_by_key(|e| (e.source, e.target));
        for pair in edges.windows(2) {
            if (pair[0].source, pair[0].target) == (pair[1].source, pair[1].target) {
                return Err(SemnetError::InvalidGraph("parallel edge".into()));
            }
        }
        let mut frequency = vec![0u64; n];
        for e in &edges {
            if e.source >= n || e.target >= n {
                return Err(SemnetError::InvalidGraph("edge endpoint out of range".into()));
            }
            if e.source == e.target {
                return Err(SemnetError::InvalidGraph("self-loop".into()));
            }
            if e.weight == 0 {
                return Err(SemnetError::InvalidGraph("zero weight".into()));
            }
            frequency[e.source] += e.weight;
            frequency[e.target] += e.weight;
        }
        let nodes = terms
            .into_iter()
            .zip(frequency)
            .map(|(term, frequency)| Node { term, frequency })
            .collect();
        Ok(Self { nodes, edges })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn find(&self, term: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.term.as_str().cmp(term)).ok()
    }

    /// The graph's cells as a matrix, for export.
    pub fn to_matrix(&self) -> CooccurrenceMatrix {
        let mut m = CooccurrenceMatrix::new();
        for e in &self.edges {
            m.add_count(&self.nodes[e.source].term, &self.nodes[e.target].term, e.weight)
                .expect("graph edges are valid cells");
        }
        m
    }
}

/// One edge per non-zero cell; terms without any cell are left out.
pub fn build_graph(matrix: &CooccurrenceMatrix) -> Result<SemanticGraph, SemnetError> {
    if matrix.is_empty() {
        return Err(SemnetError::NoCooccurrences);
    }
    let mut used = vec![false; matrix.terms.len()];
    for &(a, b) in matrix.counts.keys() {
        used[a] = true;
        used[b] = true;
    }
    let mut order: Vec<usize> = (0..matrix.terms.len()).filter(|&i| used[i]).collect();
    order.sort_by(|&a, &b| matrix.terms[a].cmp(&matrix.terms[b]));
    let mut node_of = vec![usize::MAX; matrix.terms.len()];
    for (node, &term) in order.iter().enumerate() {
        node_of[term] = node;
    }
    let terms = order.iter().map(|&i| matrix.terms[i].clone()).collect();
    let edges = matrix
        .counts
        .iter()
        .map(|(&(a, b), &weight)| Edge {
            source: node_of[a],
            target: node_of[b],
            weight,
        })
        .collect();
    SemanticGraph::from_edges(terms, edges)
}

/// The `k` most frequent filtered terms; ties in ascending term order.
pub fn term_frequencies(texts: &[PreparedText], k: usize) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in texts.iter().flat_map(PreparedText::filtered_tokens) {
        *counts.entry(t.surface.as_str()).or_insert(0) += 1;
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().map(|(t, c)| (t.to_string(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{prepare, StopPolicy};
    use proptest::prelude::*;

    fn matrix(windows: &[&[&str]]) -> CooccurrenceMatrix {
        let mut m = CooccurrenceMatrix::new();
        for w in windows {
            m.add_window(w);
        }
        m
    }

    fn prep(text: &str) -> PreparedText {
        prepare(text, &StopPolicy::default()).unwrap()
    }

    #[test]
    fn minimal_pair() {
        let m = matrix(&[&["a", "b"]]);
        assert_eq!(m.cells().collect::<Vec<_>>(), [("a", "b", 1)]);
    }

    #[test]
    fn strict_occurrence_order() {
        let m = matrix(&[&["a", "b", "a"]]);
        assert_eq!(m.get("a", "b"), 1);
        assert_eq!(m.get("b", "a"), 1);
        assert_eq!(m.cell_count(), 2);
    }

    #[test]
    fn counts_accumulate_across_windows() {
        let m = matrix(&[&["a", "b"], &["a", "b", "c"], &["z"]]);
        assert_eq!(m.get("a", "b"), 2);
        assert_eq!(m.total(), 4);
        assert_eq!(m.terms(), ["a", "b", "c", "z"]);
    }

    #[test]
    fn worked_example_with_plural_merge() {
        let text = "A co-occurrence matrix was assembled to compute the number and direction of \
                    co-occurrences of tokens";
        let merged = StopPolicy {
            merge_plural_singular: true,
            ..StopPolicy::default()
        };
        let p = prepare(text, &merged).unwrap();
        let m = cooccurrence_matrix(&[p], Window::Sentence);
        // two occurrences of the merged term, each pointing at "tokens"
        assert_eq!(m.get("co-occurrence", "token"), 2);
        // strict order: the second occurrence follows "matrix"
        assert_eq!(m.get("co-occurrence", "matrix"), 1);
        assert_eq!(m.get("matrix", "co-occurrence"), 1);

        let p = prepare(text, &StopPolicy::default()).unwrap();
        let m = cooccurrence_matrix(&[p], Window::Sentence);
        assert_eq!(m.get("co-occurrence", "tokens"), 1);
        assert_eq!(m.get("co-occurrences", "tokens"), 1);
    }

    #[test]
    fn window_choice() {
        let p = prep("Markets grow. Firms adapt.");
        let by_sentence = cooccurrence_matrix(std::slice::from_ref(&p), Window::Sentence);
        let whole = cooccurrence_matrix(&[p], Window::WholeText);
        assert_eq!(by_sentence.total(), 2);
        assert_eq!(whole.total(), 6);
        assert_eq!(whole.get("grow", "firms"), 1);
    }

    #[test]
    fn graph_from_single_cell() {
        let mut m = CooccurrenceMatrix::new();
        m.add_count("a", "b", 3).unwrap();
        let g = build_graph(&m).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(
            g.edges,
            [Edge {
                source: 0,
                target: 1,
                weight: 3
            }]
        );
        assert_eq!(g.nodes[0].frequency, 3);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let m = matrix(&[&["alone"]]);
        assert!(matches!(build_graph(&m), Err(SemnetError::NoCooccurrences)));
    }

    #[test]
    fn isolated_terms_excluded() {
        let m = matrix(&[&["b", "a"], &["solo"]]);
        let g = build_graph(&m).unwrap();
        let terms: Vec<_> = g.nodes.iter().map(|n| n.term.as_str()).collect();
        assert_eq!(terms, ["a", "b"]);
        assert_eq!(
            g.edges,
            [Edge {
                source: 1,
                target: 0,
                weight: 1
            }]
        );
    }

    #[test]
    fn titles_fixture_matches_hand_adjacency() {
        let titles = [
            "Journal of Marketing",
            "Marketing Science",
            "Journal of Marketing Research",
            "Management Science",
            "Strategic Management Journal",
            "Journal of Management Studies",
            "Research Policy",
            "Journal of Business Research",
            "Business Strategy and the Environment",
            "Journal of Business Ethics",
            "Tourism Management",
            "Annals of Tourism Research",
        ];
        let texts: Vec<PreparedText> = titles.iter().map(|t| prep(t)).collect();
        let g = build_graph(&cooccurrence_matrix(&texts, Window::WholeText)).unwrap();
        let expected: &[(&str, &str, u64)] = &[
            ("annals", "research", 1),
            ("annals", "tourism", 1),
            ("business", "environment", 1),
            ("business", "ethics", 1),
            ("business", "research", 1),
            ("business", "strategy", 1),
            ("management", "science", 1),
            ("management", "studies", 1),
            ("marketing", "research", 1),
            ("marketing", "science", 1),
            ("research", "policy", 1),
            ("strategic", "management", 1),
            ("strategy", "environment", 1),
            ("tourism", "management", 1),
            ("tourism", "research", 1),
        ];
        let mut got: Vec<(&str, &str, u64)> = g
            .edges
            .iter()
            .map(|e| {
                (
                    g.nodes[e.source].term.as_str(),
                    g.nodes[e.target].term.as_str(),
                    e.weight,
                )
            })
            .collect();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(g.node_count(), 13);
    }

    #[test]
    fn top_terms() {
        let texts = vec![
            prep("International business and international markets."),
            prep("International finance review."),
            prep("Finance letters"),
        ];
        let top = term_frequencies(&texts, 2);
        assert_eq!(top, [("international".to_string(), 3), ("finance".to_string(), 2)]);
        assert_eq!(term_frequencies(&texts, 100).len(), 6);
        let tie = term_frequencies(&[prep("zeta alpha")], 2);
        assert_eq!(tie[0].0, "alpha");
        assert_eq!(tie[1].0, "zeta");
    }

    #[test]
    fn csv_round_trip_reproduces_graph() {
        let texts: Vec<_> = [
            "Strategy meets markets. Markets reward strategy and innovation.",
            "Innovation policy matters",
        ]
        .iter()
        .map(|t| prep(t))
        .collect();
        let m = cooccurrence_matrix(&texts, Window::Sentence);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("source,target,count\n"));
        let back = CooccurrenceMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(build_graph(&back).unwrap(), build_graph(&m).unwrap());
    }

    #[test]
    fn bad_matrix_csv() {
        assert!(CooccurrenceMatrix::read_csv("a,b,c\n".as_bytes()).is_err());
        assert!(CooccurrenceMatrix::read_csv("source,target,count\na,a,1\n".as_bytes()).is_err());
        assert!(CooccurrenceMatrix::read_csv("source,target,count\na,b,x\n".as_bytes()).is_err());
    }

    fn arb_windows() -> impl Strategy<Value = Vec<Vec<String>>> {
        proptest::collection::vec(proptest::collection::vec("[a-h]", 0..8), 0..12)
    }

    proptest! {
        #[test]
        fn distinct_windows_mass(lens in proptest::collection::vec(0usize..12, 0..20)) {
            let mut m = CooccurrenceMatrix::new();
            let mut expected = 0u64;
            for (w, &len) in lens.iter().enumerate() {
                let window: Vec<String> = (0..len).map(|i| format!("w{w}t{i}")).collect();
                m.add_window(&window);
                expected += (len * len.saturating_sub(1) / 2) as u64;
            }
            prop_assert_eq!(m.total(), expected);
        }

        #[test]
        fn graph_mirrors_matrix(windows in arb_windows()) {
            let mut m = CooccurrenceMatrix::new();
            for w in &windows {
                m.add_window(w);
            }
            prop_assume!(!m.is_empty());
            let g = build_graph(&m).unwrap();
            prop_assert_eq!(g.edge_count(), m.cell_count());
            prop_assert_eq!(g.total_weight(), m.total());
            let n = g.node_count();
            prop_assert!(g.edge_count() <= n * (n - 1));
            for e in &g.edges {
                prop_assert!(e.source != e.target && e.weight >= 1);
                prop_assert!(g.nodes[e.source].frequency >= e.weight);
                prop_assert!(g.nodes[e.target].frequency >= e.weight);
            }
            prop_assert_eq!(build_graph(&g.to_matrix()).unwrap(), g);
        }

        #[test]
        fn merge_is_associative(a in arb_windows(), b in arb_windows(), c in arb_windows()) {
            let build = |ws: &[Vec<String>]| {
                let mut m = CooccurrenceMatrix::new();
                for w in ws {
                    m.add_window(w);
                }
                m
            };
            let (ma, mb, mc) = (build(&a), build(&b), build(&c));
            let left = ma.clone().merged(mb.clone()).merged(mc.clone());
            let right = ma.merged(mb.merged(mc));
            prop_assert_eq!(&left, &right);
            let serial = build(&[a, b, c].concat());
            prop_assert_eq!(left, serial);
        }
    }
}
