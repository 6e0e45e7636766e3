use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Analysis, OutputFormat, PipelineError, ReportBundle, Stage};
use crate::graphmetrics::GraphMetricsReport;
use crate::semnet::SemanticGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Graphml,
    Dot,
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Graphml => "graphml",
            GraphFormat::Dot => "dot",
        }
    }
}

fn export_error(message: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(Stage::Export, message)
}

fn check_aligned(graph: &SemanticGraph, metrics: &GraphMetricsReport) -> Result<(), PipelineError> {
    let aligned = metrics.nodes.len() == graph.node_count()
        && metrics.nodes.iter().zip(&graph.nodes).all(|(m, n)| m.term == n.term);
    if aligned {
        Ok(())
    } else {
        Err(export_error("metrics do not belong to this graph"))
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// GraphML 1.0 document with node and edge attributes.
pub fn render_graphml(graph: &SemanticGraph, metrics: &GraphMetricsReport) -> Result<String, PipelineError> {
    check_aligned(graph, metrics)?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    for (id, target, name, ty) in [
        ("d0", "node", "label", "string"),
        ("d1", "node", "frequency", "long"),
        ("d2", "node", "community", "int"),
        ("d3", "node", "betweenness", "double"),
        ("d4", "node", "betweenness_normalized", "double"),
        ("d5", "edge", "weight", "long"),
    ] {
        let _ = writeln!(
            out,
            "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        );
    }
    out.push_str("  <graph id=\"G\" edgedefault=\"directed\">\n");
    for (i, m) in metrics.nodes.iter().enumerate() {
        let _ = writeln!(
            out,
            "    <node id=\"n{i}\"><data key=\"d0\">{}</data><data key=\"d1\">{}</data>\
             <data key=\"d2\">{}</data><data key=\"d3\">{}</data><data key=\"d4\">{}</data></node>",
            xml_escape(&m.term),
            m.frequency,
            m.community,
            m.betweenness,
            m.betweenness_normalized
        );
    }
    for (i, e) in graph.edges.iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{i}\" source=\"n{}\" target=\"n{}\"><data key=\"d5\">{}</data></edge>",
            e.source, e.target, e.weight
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    Ok(out)
}

/// Graphviz digraph with one statement per node and per edge.
pub fn render_dot(graph: &SemanticGraph, metrics: &GraphMetricsReport, name: &str) -> Result<String, PipelineError> {
    check_aligned(graph, metrics)?;
    let mut out = format!("digraph {} {{\n", dot_quote(name));
    for m in &metrics.nodes {
        let _ = writeln!(
            out,
            "  {} [frequency={}, community={}, betweenness={}, betweenness_normalized={}];",
            dot_quote(&m.term),
            m.frequency,
            m.community,
            m.betweenness,
            m.betweenness_normalized
        );
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [weight={}];",
            dot_quote(&graph.nodes[e.source].term),
            dot_quote(&graph.nodes[e.target].term),
            e.weight
        );
    }
    out.push_str("}\n");
    Ok(out)
}

/// Writes one graph with its metrics to `path`.
pub fn export_graph(
    graph: &SemanticGraph,
    metrics: &GraphMetricsReport,
    format: GraphFormat,
    path: &Path,
) -> Result<(), PipelineError> {
    let text = match format {
        GraphFormat::Graphml => render_graphml(graph, metrics)?,
        GraphFormat::Dot => {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("G");
            render_dot(graph, metrics, name)?
        }
    };
    fs::write(path, text).map_err(|e| export_error(format!("{}: {e}", path.display())))
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self, PipelineError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).map_err(export_error)?;
        Ok(Self { writer })
    }

    fn row<I, S>(&mut self, cells: I) -> Result<(), PipelineError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells).map_err(export_error)
    }

    fn finish(self) -> Result<Vec<u8>, PipelineError> {
        self.writer.into_inner().map_err(|e| export_error(e.to_string()))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_files(bundle: &ReportBundle, analysis: &Analysis) -> Result<BTreeMap<String, Vec<u8>>, PipelineError> {
    let mut files = BTreeMap::new();

    let mut t = Table::new(&["id", "fkgl", "yules_k"])?;
    for s in &bundle.scores {
        t.row([s.id.clone(), s.fkgl.to_string(), s.yules_k.to_string()])?;
    }
    files.insert("scores.csv".to_string(), t.finish()?);

    let mut t = Table::new(&["id", "stage", "reason"])?;
    for e in &bundle.score_errors {
        t.row([e.id.clone(), e.stage.to_string(), e.reason.clone()])?;
    }
    files.insert("score_errors.csv".to_string(), t.finish()?);

    let mut t = Table::new(&[
        "metric", "scope", "group", "n", "min", "q1", "median", "mean", "q3", "max", "iqr",
    ])?;
    for r in &bundle.summaries {
        let s = &r.summary;
        t.row([
            r.metric.to_string(),
            r.scope.clone(),
            r.group.clone().unwrap_or_default(),
            s.n.to_string(),
            s.min.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.mean.to_string(),
            s.q3.to_string(),
            s.max.to_string(),
            s.iqr.to_string(),
        ])?;
    }
    files.insert("summaries.csv".to_string(), t.finish()?);

    let mut t = Table::new(&[
        "scope",
        "metric",
        "test",
        "statistic",
        "p_value",
        "effect_size",
        "groups",
        "n",
    ])?;
    for r in &bundle.tests {
        let res = &r.result;
        t.row([
            r.scope.clone(),
            r.metric.clone(),
            res.test.to_string(),
            res.statistic.to_string(),
            res.p_value.to_string(),
            opt(res.effect_size),
            res.group_labels.join(";"),
            res.n.to_string(),
        ])?;
    }
    files.insert("tests.csv".to_string(), t.finish()?);

    let mut t = Table::new(&["country", "n", "median_fkgl", "median_yules_k", "below_min_n"])?;
    for c in &bundle.country_medians {
        t.row([
            c.country.clone(),
            c.n.to_string(),
            c.median_fkgl.to_string(),
            c.median_yules_k.to_string(),
            c.below_min_n.to_string(),
        ])?;
    }
    files.insert("country_medians.csv".to_string(), t.finish()?);

    let mut t = Table::new(&[
        "network",
        "kind",
        "node_count",
        "edge_count",
        "density",
        "average_path_length",
        "modularity",
        "community_count",
    ])?;
    let observed = bundle.networks.iter().map(|n| (&n.name, "text", &n.metrics));
    let random = bundle.benchmarks.iter().map(|b| (&b.name, "random", &b.metrics));
    for (name, kind, m) in observed.chain(random) {
        t.row([
            name.clone(),
            kind.to_string(),
            m.node_count.to_string(),
            m.edge_count.to_string(),
            m.density.to_string(),
            m.average_path_length.to_string(),
            m.modularity.to_string(),
            m.community_count.to_string(),
        ])?;
    }
    files.insert("networks.csv".to_string(), t.finish()?);

    for net in &bundle.networks {
        let mut t = Table::new(&[
            "term",
            "frequency",
            "community",
            "betweenness",
            "betweenness_normalized",
        ])?;
        for m in &net.metrics.nodes {
            t.row([
                m.term.clone(),
                m.frequency.to_string(),
                m.community.to_string(),
                m.betweenness.to_string(),
                m.betweenness_normalized.to_string(),
            ])?;
        }
        files.insert(format!("nodes_{}.csv", net.name), t.finish()?);

        let mut t = Table::new(&["term", "count"])?;
        for tc in &net.top_terms {
            t.row([tc.term.clone(), tc.count.to_string()])?;
        }
        files.insert(format!("terms_{}.csv", net.name), t.finish()?);

        if let Some(graph) = analysis.graphs.get(&net.name) {
            let mut buf = Vec::new();
            graph.to_matrix().write_csv(&mut buf).map_err(export_error)?;
            files.insert(format!("matrix_{}.csv", net.name), buf);
        }
    }

    let mut notes = String::new();
    for n in &bundle.notes {
        notes.push_str(n);
        notes.push('\n');
    }
    files.insert("notes.txt".to_string(), notes.into_bytes());
    Ok(files)
}

/// Every output file of an analysis, keyed by file name. Rendering happens
/// entirely in memory so that nothing is written if any part fails.
pub fn render_bundle_files(
    analysis: &Analysis,
    formats: &BTreeSet<OutputFormat>,
) -> Result<BTreeMap<String, Vec<u8>>, PipelineError> {
    let bundle = &analysis.bundle;
    let mut files = BTreeMap::new();
    if formats.contains(&OutputFormat::Json) {
        let mut json = serde_json::to_vec_pretty(bundle).map_err(export_error)?;
        json.push(b'\n');
        files.insert("bundle.json".to_string(), json);
    }
    if formats.contains(&OutputFormat::Csv) {
        files.extend(csv_files(bundle, analysis)?);
    }
    for net in &bundle.networks {
        let Some(graph) = analysis.graphs.get(&net.name) else {
            continue;
        };
        if formats.contains(&OutputFormat::Graphml) {
            files.insert(
                format!("{}.graphml", net.name),
                render_graphml(graph, &net.metrics)?.into_bytes(),
            );
        }
        if formats.contains(&OutputFormat::Dot) {
            files.insert(
                format!("{}.dot", net.name),
                render_dot(graph, &net.metrics, &net.name)?.into_bytes(),
            );
        }
    }
    Ok(files)
}
