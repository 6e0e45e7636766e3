//! End-to-end study: load, score, build networks, benchmark, test, export.

mod battery;
mod country;
mod export;

pub use battery::{compare_groups, summarize, ScoreMetric, SummaryRow, TestRow};
pub use country::{country_medians, CountryMedian};
pub use export::{export_graph, render_bundle_files, render_dot, render_graphml, GraphFormat};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    load_corpus, slice_by_metric_percentile, Corpus, GroupKey, InputFormat, Metric, SliceEnd, Strictness,
};
use crate::graphmetrics::{benchmark_report, graph_report, GraphMetricsReport, RandomGraphSpec, ReportOptions};
use crate::lexmetrics::score_prepared;
use crate::semnet::{build_graph, cooccurrence_matrix_par, term_frequencies, SemanticGraph, Window};
use crate::stats::Adjust;
use crate::textprep::{PreparedText, Preparer, StopPolicy, STOPWORDS_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Load,
    Score,
    Network,
    Benchmark,
    Statistics,
    Export,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Score => "score",
            Stage::Network => "network",
            Stage::Benchmark => "benchmark",
            Stage::Statistics => "statistics",
            Stage::Export => "export",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("[{stage}] {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl fmt::Display) -> Self {
        Self {
            stage,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Graphml,
    Dot,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "graphml" => Ok(OutputFormat::Graphml),
            "dot" => Ok(OutputFormat::Dot),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Node count of a benchmark graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkSize {
    Fixed(usize),
    /// Same node count as the titles network.
    MatchTitles,
    /// Rounded mean node count of the two mission-slice networks.
    MatchMissions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub size: BenchmarkSize,
    pub p: f64,
}

impl BenchmarkSpec {
    fn label(&self) -> String {
        match self.size {
            BenchmarkSize::Fixed(n) => format!("random_n{n}"),
            BenchmarkSize::MatchTitles => "random_titles".into(),
            BenchmarkSize::MatchMissions => "random_missions".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub policy: StopPolicy,
    pub window: Window,
    pub fraction: f64,
    pub seed: u64,
    pub benchmarks: Vec<BenchmarkSpec>,
    pub group_keys: Vec<GroupKey>,
    pub formats: BTreeSet<OutputFormat>,
    pub adjust: Adjust,
    pub min_country_n: usize,
    pub strictness: Strictness,
    pub top_terms: usize,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            out_dir: None,
            policy: StopPolicy::default(),
            window: Window::Sentence,
            fraction: 0.10,
            seed: 42,
            benchmarks: vec![
                BenchmarkSpec {
                    size: BenchmarkSize::MatchTitles,
                    p: 0.05,
                },
                BenchmarkSpec {
                    size: BenchmarkSize::MatchMissions,
                    p: 0.05,
                },
            ],
            group_keys: vec![GroupKey::Access, GroupKey::Quartile],
            formats: [
                OutputFormat::Csv,
                OutputFormat::Json,
                OutputFormat::Graphml,
                OutputFormat::Dot,
            ]
            .into_iter()
            .collect(),
            adjust: Adjust::None,
            min_country_n: 1,
            strictness: Strictness::Strict,
            top_terms: 20,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.fraction > 0.0 && self.fraction <= 0.5) {
            return Err(PipelineError::new(
                Stage::Config,
                format!("slice fraction must lie in (0, 0.5], got {}", self.fraction),
            ));
        }
        for b in &self.benchmarks {
            if !(0.0..=1.0).contains(&b.p) {
                return Err(PipelineError::new(
                    Stage::Config,
                    format!("wiring probability must lie in [0, 1], got {}", b.p),
                ));
            }
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = self.group_keys.iter().find(|k| !seen.insert(k.to_string())) {
            return Err(PipelineError::new(
                Stage::Config,
                format!("group key '{dup}' listed twice"),
            ));
        }
        Ok(())
    }
}

/// Settings echoed into the bundle so that a report identifies its run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub seed: u64,
    pub fraction: f64,
    pub window: Window,
    pub adjust: Adjust,
    pub min_country_n: usize,
    pub stopwords_version: String,
    pub stopword_count: usize,
    pub extra_drop: Vec<String>,
    pub drop_numeric: bool,
    pub merge_plural_singular: bool,
}

impl RunSettings {
    fn from_config(config: &PipelineConfig) -> Self {
        let default_stopwords = StopPolicy::default().stopwords;
        Self {
            seed: config.seed,
            fraction: config.fraction,
            window: config.window,
            adjust: config.adjust,
            min_country_n: config.min_country_n,
            stopwords_version: if config.policy.stopwords == default_stopwords {
                STOPWORDS_VERSION.to_string()
            } else {
                "custom".to_string()
            },
            stopword_count: config.policy.stopwords.len(),
            extra_drop: config.policy.extra_drop.iter().cloned().collect(),
            drop_numeric: config.policy.drop_numeric,
            merge_plural_singular: config.policy.merge_plural_singular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub id: String,
    pub fkgl: f64,
    pub yules_k: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    pub id: String,
    pub stage: Stage,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCount {
    pub term: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkResult {
    pub name: String,
    pub record_ids: Vec<String>,
    pub top_terms: Vec<TermCount>,
    pub metrics: GraphMetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub name: String,
    pub spec: RandomGraphSpec,
    pub metrics: GraphMetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub settings: RunSettings,
    pub record_count: usize,
    pub load_diagnostics: Vec<String>,
    pub scores: Vec<RecordScore>,
    pub score_errors: Vec<RecordError>,
    pub summaries: Vec<SummaryRow>,
    pub networks: Vec<NetworkResult>,
    pub benchmarks: Vec<BenchmarkResult>,
    pub tests: Vec<TestRow>,
    pub country_medians: Vec<CountryMedian>,
    pub notes: Vec<String>,
}

/// A bundle together with the graphs behind its network reports.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub bundle: ReportBundle,
    pub graphs: BTreeMap<String, SemanticGraph>,
}

/// Prepared mission text for every record that yields at least one word.
pub fn prepare_missions(corpus: &Corpus, policy: &StopPolicy) -> (Vec<(String, PreparedText)>, Vec<RecordError>) {
    let preparer = Preparer::new(policy.clone());
    let outcomes: Vec<_> = corpus
        .records
        .par_iter()
        .map(|r| (r.id.clone(), preparer.prepare(&r.mission)))
        .collect();
    let mut prepared = Vec::new();
    let mut errors = Vec::new();
    for (id, outcome) in outcomes {
        match outcome {
            Ok(text) => prepared.push((id, text)),
            Err(e) => errors.push(RecordError {
                id,
                stage: Stage::Score,
                reason: e.to_string(),
            }),
        }
    }
    (prepared, errors)
}

/// FKGL and Yule's K of every record's mission, in corpus order.
pub fn score_corpus(corpus: &Corpus, policy: &StopPolicy) -> (Vec<RecordScore>, Vec<RecordError>) {
    let (prepared, mut errors) = prepare_missions(corpus, policy);
    let (scores, more) = score_texts(&prepared);
    errors.extend(more);
    (scores, errors)
}

fn score_texts(prepared: &[(String, PreparedText)]) -> (Vec<RecordScore>, Vec<RecordError>) {
    let mut scores = Vec::with_capacity(prepared.len());
    let mut errors = Vec::new();
    for (id, text) in prepared {
        match score_prepared(text) {
            Ok(s) => scores.push(RecordScore {
                id: id.clone(),
                fkgl: s.fkgl,
                yules_k: s.yules_k,
            }),
            Err(e) => errors.push(RecordError {
                id: id.clone(),
                stage: Stage::Score,
                reason: e.to_string(),
            }),
        }
    }
    (scores, errors)
}

/// Co-occurrence network of the given texts with its metrics.
pub fn build_network(
    name: &str,
    texts: &[(String, PreparedText)],
    window: Window,
    opts: &ReportOptions,
    top_terms: usize,
) -> Result<(NetworkResult, SemanticGraph), PipelineError> {
    let fail = |e: &dyn fmt::Display| PipelineError::new(Stage::Network, format!("{name}: {e}"));
    let prepared: Vec<PreparedText> = texts.iter().map(|(_, t)| t.clone()).collect();
    let matrix = cooccurrence_matrix_par(&prepared, window);
    let graph = build_graph(&matrix).map_err(|e| fail(&e))?;
    let metrics = graph_report(&graph, opts).map_err(|e| fail(&e))?;
    let result = NetworkResult {
        name: name.to_string(),
        record_ids: texts.iter().map(|(id, _)| id.clone()).collect(),
        top_terms: term_frequencies(&prepared, top_terms)
            .into_iter()
            .map(|(term, count)| TermCount { term, count })
            .collect(),
        metrics,
    };
    Ok((result, graph))
}

fn prepare_titles(corpus: &Corpus, policy: &StopPolicy) -> (Vec<(String, PreparedText)>, usize) {
    let preparer = Preparer::new(policy.clone());
    let outcomes: Vec<_> = corpus
        .records
        .par_iter()
        .map(|r| (r.id.clone(), preparer.prepare(&r.title)))
        .collect();
    let total = outcomes.len();
    let ok: Vec<_> = outcomes
        .into_iter()
        .filter_map(|(id, t)| t.ok().map(|t| (id, t)))
        .collect();
    let skipped = total - ok.len();
    (ok, skipped)
}

/// Runs every analysis on an already loaded corpus.
pub fn analyze(corpus: &Corpus, config: &PipelineConfig) -> Result<Analysis, PipelineError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(PipelineError::new(Stage::Load, "corpus has no records"));
    }
    let mut notes = Vec::new();
    let opts = ReportOptions {
        seed: config.seed,
        ..ReportOptions::default()
    };

    let (missions, mut score_errors) = prepare_missions(corpus, &config.policy);
    let (scores, more) = score_texts(&missions);
    score_errors.extend(more);
    if scores.is_empty() {
        return Err(PipelineError::new(Stage::Score, "no record produced a score"));
    }

    let mut graphs = BTreeMap::new();
    let mut networks = Vec::new();

    let (titles, skipped) = prepare_titles(corpus, &config.policy);
    if skipped > 0 {
        notes.push(format!(
            "titles network: {skipped} record(s) without title words skipped"
        ));
    }
    let (titles_net, titles_graph) = build_network("titles", &titles, config.window, &opts, config.top_terms)?;
    graphs.insert("titles".to_string(), titles_graph);
    networks.push(titles_net);

    let with_sjr = Corpus::new(corpus.records.iter().filter(|r| r.sjr.is_some()).cloned().collect());
    let without = corpus.len() - with_sjr.len();
    if without > 0 {
        notes.push(format!("mission slices: {without} record(s) without sjr excluded"));
    }
    if with_sjr.is_empty() {
        return Err(PipelineError::new(Stage::Network, "no record has an sjr value"));
    }
    for (name, end) in [("mission_top", SliceEnd::Top), ("mission_bottom", SliceEnd::Bottom)] {
        let slice = slice_by_metric_percentile(&with_sjr, Metric::Sjr, config.fraction, end)
            .map_err(|e| PipelineError::new(Stage::Network, format!("{name}: {e}")))?;
        let ids: BTreeSet<&str> = slice.records.iter().map(|r| r.id.as_str()).collect();
        // keep slice (rank) order
        let by_id: BTreeMap<&str, &PreparedText> = missions
            .iter()
            .filter(|(id, _)| ids.contains(id.as_str()))
            .map(|(id, t)| (id.as_str(), t))
            .collect();
        let texts: Vec<(String, PreparedText)> = slice
            .records
            .iter()
            .filter_map(|r| by_id.get(r.id.as_str()).map(|t| (r.id.clone(), (*t).clone())))
            .collect();
        let (net, graph) = build_network(name, &texts, config.window, &opts, config.top_terms)?;
        graphs.insert(name.to_string(), graph);
        networks.push(net);
    }

    let mut benchmarks = Vec::new();
    for b in &config.benchmarks {
        let n = match b.size {
            BenchmarkSize::Fixed(n) => n,
            BenchmarkSize::MatchTitles => networks[0].metrics.node_count,
            BenchmarkSize::MatchMissions => {
                let total = networks[1].metrics.node_count + networks[2].metrics.node_count;
                total.div_ceil(2)
            }
        };
        let spec = RandomGraphSpec {
            n,
            p: b.p,
            seed: config.seed,
        };
        let metrics =
            benchmark_report(&spec).map_err(|e| PipelineError::new(Stage::Benchmark, format!("{}: {e}", b.label())))?;
        benchmarks.push(BenchmarkResult {
            name: b.label(),
            spec,
            metrics,
        });
    }

    let summaries =
        summarize(corpus, &scores, &config.group_keys).map_err(|e| PipelineError::new(Stage::Statistics, e))?;
    let (tests, test_notes) = compare_groups(corpus, &scores, &config.group_keys, config.adjust)
        .map_err(|e| PipelineError::new(Stage::Statistics, e))?;
    notes.extend(test_notes);
    let country_medians = country_medians(corpus, &scores, config.min_country_n);

    let bundle = ReportBundle {
        settings: RunSettings::from_config(config),
        record_count: corpus.len(),
        load_diagnostics: Vec::new(),
        scores,
        score_errors,
        summaries,
        networks,
        benchmarks,
        tests,
        country_medians,
        notes,
    };
    Ok(Analysis { bundle, graphs })
}

/// Loads the configured corpus, analyses it and, when an output directory is
/// set, writes the requested files. On failure no partial files remain.
pub fn run_pipeline(config: &PipelineConfig) -> Result<ReportBundle, PipelineError> {
    config.validate()?;
    let loaded = load_corpus(&config.input, InputFormat::from_path(&config.input), config.strictness)
        .map_err(|e| PipelineError::new(Stage::Load, e))?;
    let mut analysis = analyze(&loaded.corpus, config)?;
    analysis.bundle.load_diagnostics = loaded.diagnostics.iter().map(|d| d.to_string()).collect();
    if let Some(dir) = &config.out_dir {
        let files = render_bundle_files(&analysis, &config.formats)?;
        write_all(dir, &files)?;
    }
    Ok(analysis.bundle)
}

/// Writes every file or none of them.
pub fn write_all(dir: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<(), PipelineError> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Export, format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            for done in &written {
                let _ = fs::remove_file(done);
            }
            let _ = fs::remove_file(&path);
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
            return Err(PipelineError::new(Stage::Export, format!("{}: {e}", path.display())));
        }
        written.push(path);
    }
    Ok(())
}
