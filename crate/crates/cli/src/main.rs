use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lexnet::corpus::{load_corpus, Corpus, GroupKey, InputFormat, Strictness};
use lexnet::graphmetrics::{benchmark_report, graph_report, RandomGraphSpec, ReportOptions};
use lexnet::pipeline::{
    build_network, compare_groups, prepare_missions, render_dot, render_graphml, run_pipeline, score_corpus, summarize,
    write_all, BenchmarkSize, BenchmarkSpec, OutputFormat, PipelineConfig, PipelineError, ReportBundle, Stage,
};
use lexnet::semnet::{build_graph, CooccurrenceMatrix, Window};
use lexnet::stats::Adjust;
use lexnet::textprep::{read_word_list, Preparer, StopPolicy};

#[derive(Parser)]
#[command(
    name = "lexnet",
    version,
    about = "Readability, lexical diversity and co-occurrence network analysis of journal mission statements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full study and write every report file.
    Analyze(AnalyzeArgs),
    /// FKGL and Yule's K for every record.
    Score(ScoreArgs),
    /// Build and measure the co-occurrence network of one text column.
    Network(NetworkArgs),
    /// Metrics of seeded random directed graphs.
    Benchmark(BenchmarkArgs),
    /// Descriptive summaries and the group-comparison test battery.
    Compare(CompareArgs),
    /// Convert a co-occurrence matrix CSV into GraphML or DOT.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Sentence,
    Text,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Sentence => Window::Sentence,
            WindowArg::Text => Window::WholeText,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Graphml,
    Dot,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Graphml => OutputFormat::Graphml,
            FormatArg::Dot => OutputFormat::Dot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AdjustArg {
    None,
    Holm,
}

impl From<AdjustArg> for Adjust {
    fn from(a: AdjustArg) -> Self {
        match a {
            AdjustArg::None => Adjust::None,
            AdjustArg::Holm => Adjust::Holm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Access,
    Quartile,
    Country,
}

impl From<GroupArg> for GroupKey {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Access => GroupKey::Access,
            GroupArg::Quartile => GroupKey::Quartile,
            GroupArg::Country => GroupKey::PublisherCountry,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ColumnArg {
    Title,
    Mission,
}

#[derive(Args)]
struct InputArgs {
    /// Corpus file (.csv or .jsonl).
    #[arg(long)]
    input: PathBuf,
    /// Skip invalid rows instead of aborting.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct TextArgs {
    /// Stopword list, one word per line (replaces the bundled English list).
    #[arg(long, value_name = "FILE")]
    stopwords: Option<PathBuf>,
    /// Domain words to drop, replacing the default "journal,journals".
    #[arg(long, value_name = "WORD[,WORD...]", value_delimiter = ',')]
    drop: Option<Vec<String>>,
    /// Keep purely numeric tokens.
    #[arg(long)]
    keep_numeric: bool,
    /// Merge plural forms into their singular.
    #[arg(long)]
    merge_plurals: bool,
    /// Co-occurrence window.
    #[arg(long, value_enum, default_value = "sentence")]
    window: WindowArg,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    text: TextArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Share of records in each SJR slice.
    #[arg(long, default_value_t = 0.10)]
    fraction: f64,
    /// Output formats.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json,graphml,dot")]
    format: Vec<FormatArg>,
    /// Dunn p-value adjustment.
    #[arg(long, value_enum, default_value = "none")]
    adjust: AdjustArg,
    /// Countries with fewer records are flagged in the median table.
    #[arg(long, default_value_t = 1)]
    min_country_n: usize,
    /// Grouping keys for the comparison tests.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "access,quartile")]
    group: Vec<GroupArg>,
    /// Wiring probability of the random benchmarks.
    #[arg(long, default_value_t = 0.05)]
    benchmark_p: f64,
    /// Extra random benchmarks with a fixed node count.
    #[arg(long, value_name = "N", value_delimiter = ',')]
    benchmark_n: Vec<usize>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    text: TextArgs,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct NetworkArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    text: TextArgs,
    #[arg(long, value_enum, default_value = "title")]
    column: ColumnArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory (metrics JSON on stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv,graphml,dot")]
    format: Vec<FormatArg>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Node count.
    #[arg(long)]
    n: usize,
    /// Wiring probability.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// First seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of graphs, seeded consecutively.
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    text: TextArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "access,quartile")]
    group: Vec<GroupArg>,
    #[arg(long, value_enum, default_value = "none")]
    adjust: AdjustArg,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct ExportArgs {
    /// Co-occurrence matrix CSV (source,target,count).
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_enum, default_value = "graphml")]
    format: FormatArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config_error(message: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(Stage::Config, message)
}

fn export_error(message: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(Stage::Export, message)
}

fn policy(args: &TextArgs) -> Result<StopPolicy, PipelineError> {
    let mut policy = StopPolicy::default();
    if let Some(path) = &args.stopwords {
        policy.stopwords = read_word_list(path).map_err(config_error)?;
    }
    if let Some(words) = &args.drop {
        policy.extra_drop = words
            .iter()
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
    }
    policy.drop_numeric = !args.keep_numeric;
    policy.merge_plural_singular = args.merge_plurals;
    Ok(policy)
}

fn strictness(args: &InputArgs) -> Strictness {
    if args.lenient {
        Strictness::Lenient
    } else {
        Strictness::Strict
    }
}

fn load(args: &InputArgs) -> Result<Corpus, PipelineError> {
    let loaded = load_corpus(&args.input, InputFormat::from_path(&args.input), strictness(args))
        .map_err(|e| PipelineError::new(Stage::Load, e))?;
    for d in &loaded.diagnostics {
        eprintln!("warning: skipped {d}");
    }
    Ok(loaded.corpus)
}

/// Writes to a file atomically, or to stdout.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), PipelineError> {
    match out {
        Some(path) => {
            let dir = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let name = path
                .file_name()
                .ok_or_else(|| export_error(format!("{} is not a file path", path.display())))?
                .to_string_lossy()
                .into_owned();
            write_all(dir, &BTreeMap::from([(name, bytes.to_vec())]))
        }
        None => std::io::stdout().write_all(bytes).map_err(export_error),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(export_error)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn analyze(args: AnalyzeArgs) -> Result<(), PipelineError> {
    let mut config = PipelineConfig::new(&args.input.input);
    config.out_dir = Some(args.out.clone());
    config.policy = policy(&args.text)?;
    config.window = args.text.window.into();
    config.fraction = args.fraction;
    config.seed = args.seed;
    config.formats = args.format.iter().map(|&f| f.into()).collect();
    config.adjust = args.adjust.into();
    config.min_country_n = args.min_country_n;
    config.group_keys = args.group.iter().map(|&g| g.into()).collect();
    config.strictness = strictness(&args.input);
    config.benchmarks = [BenchmarkSize::MatchTitles, BenchmarkSize::MatchMissions]
        .into_iter()
        .chain(args.benchmark_n.iter().map(|&n| BenchmarkSize::Fixed(n)))
        .map(|size| BenchmarkSpec {
            size,
            p: args.benchmark_p,
        })
        .collect();
    let bundle: ReportBundle = run_pipeline(&config)?;
    eprintln!(
        "analyzed {} records ({} scored, {} errors); {} tests; reports in {}",
        bundle.record_count,
        bundle.scores.len(),
        bundle.score_errors.len(),
        bundle.tests.len(),
        args.out.display()
    );
    Ok(())
}

fn score(args: ScoreArgs) -> Result<(), PipelineError> {
    let corpus = load(&args.input)?;
    let (scores, errors) = score_corpus(&corpus, &policy(&args.text)?);
    for e in &errors {
        eprintln!("warning: {}: {}", e.id, e.reason);
    }
    let bytes = match args.format {
        FormatArg::Json => to_json(&scores)?,
        FormatArg::Csv => {
            let mut out = String::from("id,fkgl,yules_k\n");
            for s in &scores {
                out.push_str(&format!("{},{},{}\n", csv_cell(&s.id), s.fkgl, s.yules_k));
            }
            out.into_bytes()
        }
        other => {
            return Err(config_error(format!(
                "score output must be csv or json, got {}",
                format_name(other)
            )))
        }
    };
    emit(args.out.as_deref(), &bytes)
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn format_name(f: FormatArg) -> &'static str {
    match f {
        FormatArg::Csv => "csv",
        FormatArg::Json => "json",
        FormatArg::Graphml => "graphml",
        FormatArg::Dot => "dot",
    }
}

fn network(args: NetworkArgs) -> Result<(), PipelineError> {
    let corpus = load(&args.input)?;
    let policy = policy(&args.text)?;
    let texts = match args.column {
        ColumnArg::Mission => prepare_missions(&corpus, &policy).0,
        ColumnArg::Title => {
            let preparer = Preparer::new(policy.clone());
            corpus
                .records
                .iter()
                .filter_map(|r| preparer.prepare(&r.title).ok().map(|t| (r.id.clone(), t)))
                .collect()
        }
    };
    let name = match args.column {
        ColumnArg::Title => "titles",
        ColumnArg::Mission => "missions",
    };
    let opts = ReportOptions {
        seed: args.seed,
        ..ReportOptions::default()
    };
    let (result, graph) = build_network(name, &texts, args.text.window.into(), &opts, 20)?;
    let Some(dir) = args.out else {
        return emit(None, &to_json(&result)?);
    };
    let mut files = BTreeMap::new();
    for f in &args.format {
        match f {
            FormatArg::Json => {
                files.insert(format!("{name}.json"), to_json(&result)?);
            }
            FormatArg::Csv => {
                let mut buf = Vec::new();
                graph.to_matrix().write_csv(&mut buf).map_err(export_error)?;
                files.insert(format!("matrix_{name}.csv"), buf);
            }
            FormatArg::Graphml => {
                files.insert(
                    format!("{name}.graphml"),
                    render_graphml(&graph, &result.metrics)?.into_bytes(),
                );
            }
            FormatArg::Dot => {
                files.insert(
                    format!("{name}.dot"),
                    render_dot(&graph, &result.metrics, name)?.into_bytes(),
                );
            }
        }
    }
    write_all(&dir, &files)
}

fn benchmark(args: BenchmarkArgs) -> Result<(), PipelineError> {
    let mut reports = Vec::new();
    for i in 0..args.replicates {
        let spec = RandomGraphSpec {
            n: args.n,
            p: args.p,
            seed: args.seed + i,
        };
        let report = benchmark_report(&spec).map_err(|e| PipelineError::new(Stage::Benchmark, e))?;
        reports.push((spec, report));
    }
    let bytes = match args.format {
        FormatArg::Json => {
            let rows: Vec<serde_json::Value> = reports
                .iter()
                .map(|(spec, r)| serde_json::json!({ "spec": spec, "metrics": r }))
                .collect();
            to_json(&rows)?
        }
        FormatArg::Csv => {
            let mut out =
                String::from("n,p,seed,node_count,edge_count,density,average_path_length,modularity,community_count\n");
            for (spec, r) in &reports {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    spec.n,
                    spec.p,
                    spec.seed,
                    r.node_count,
                    r.edge_count,
                    r.density,
                    r.average_path_length,
                    r.modularity,
                    r.community_count
                ));
            }
            out.into_bytes()
        }
        other => {
            return Err(config_error(format!(
                "benchmark output must be csv or json, got {}",
                format_name(other)
            )))
        }
    };
    emit(args.out.as_deref(), &bytes)
}

fn compare(args: CompareArgs) -> Result<(), PipelineError> {
    let corpus = load(&args.input)?;
    let (scores, errors) = score_corpus(&corpus, &policy(&args.text)?);
    for e in &errors {
        eprintln!("warning: {}: {}", e.id, e.reason);
    }
    let keys: Vec<GroupKey> = args.group.iter().map(|&g| g.into()).collect();
    let stats_error = |e| PipelineError::new(Stage::Statistics, e);
    let summaries = summarize(&corpus, &scores, &keys).map_err(stats_error)?;
    let (tests, notes) = compare_groups(&corpus, &scores, &keys, args.adjust.into()).map_err(stats_error)?;
    for n in &notes {
        eprintln!("note: {n}");
    }
    let bytes = match args.format {
        FormatArg::Json => to_json(&serde_json::json!({
            "summaries": summaries,
            "tests": tests,
            "notes": notes,
        }))?,
        FormatArg::Csv => {
            let mut out = String::from("scope,metric,test,statistic,p_value,effect_size,groups,n\n");
            for t in &tests {
                let r = &t.result;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    csv_cell(&t.scope),
                    csv_cell(&t.metric),
                    r.test,
                    r.statistic,
                    r.p_value,
                    r.effect_size.map(|v| v.to_string()).unwrap_or_default(),
                    csv_cell(&r.group_labels.join(";")),
                    r.n
                ));
            }
            out.into_bytes()
        }
        other => {
            return Err(config_error(format!(
                "compare output must be csv or json, got {}",
                format_name(other)
            )))
        }
    };
    emit(args.out.as_deref(), &bytes)
}

fn export(args: ExportArgs) -> Result<(), PipelineError> {
    let file = fs::File::open(&args.matrix)
        .map_err(|e| PipelineError::new(Stage::Load, format!("{}: {e}", args.matrix.display())))?;
    let matrix = CooccurrenceMatrix::read_csv(file).map_err(|e| PipelineError::new(Stage::Load, e))?;
    let graph = build_graph(&matrix).map_err(|e| PipelineError::new(Stage::Network, e))?;
    let metrics = graph_report(
        &graph,
        &ReportOptions {
            seed: args.seed,
            ..ReportOptions::default()
        },
    )
    .map_err(|e| PipelineError::new(Stage::Network, e))?;
    let name = args
        .out
        .as_deref()
        .and_then(|p| p.file_stem())
        .and_then(|s| s.to_str())
        .unwrap_or("G")
        .to_string();
    let text = match args.format {
        FormatArg::Graphml => render_graphml(&graph, &metrics)?,
        FormatArg::Dot => render_dot(&graph, &metrics, &name)?,
        other => {
            return Err(config_error(format!(
                "export format must be graphml or dot, got {}",
                format_name(other)
            )))
        }
    };
    emit(args.out.as_deref(), text.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Score(a) => score(a),
        Command::Network(a) => network(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Compare(a) => compare(a),
        Command::Export(a) => export(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.stage {
                Stage::Config => 2,
                _ => 1,
            })
        }
    }
}
