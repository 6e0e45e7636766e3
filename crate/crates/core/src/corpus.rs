//! Journal corpus ingestion, validation, slicing and grouping.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Column order of the CSV format.
pub const COLUMNS: [&str; 10] = [
    "id",
    "title",
    "mission",
    "jms_kind",
    "sjr",
    "h_index",
    "coverage_years",
    "quartile",
    "access",
    "publisher_country",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JmsKind {
    Overview,
    AimsScopeOther,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Access {
    OpenAccess,
    NonOpenAccess,
}

impl FromStr for JmsKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "overview" => Ok(Self::Overview),
            "aims_scope_other" => Ok(Self::AimsScopeOther),
            "both" => Ok(Self::Both),
            _ => Err(format!("invalid jms_kind {s:?}")),
        }
    }
}

impl FromStr for Quartile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Q1" => Ok(Self::Q1),
            "Q2" => Ok(Self::Q2),
            "Q3" => Ok(Self::Q3),
            "Q4" => Ok(Self::Q4),
            _ => Err(format!("invalid quartile {s:?}")),
        }
    }
}

impl FromStr for Access {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open_access" => Ok(Self::OpenAccess),
            "non_open_access" => Ok(Self::NonOpenAccess),
            _ => Err(format!("invalid access {s:?}")),
        }
    }
}

impl fmt::Display for JmsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Overview => "overview",
            Self::AimsScopeOther => "aims_scope_other",
            Self::Both => "both",
        })
    }
}

impl fmt::Display for Quartile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::OpenAccess => "open_access",
            Self::NonOpenAccess => "non_open_access",
        })
    }
}

/// One journal and its mission statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub id: String,
    pub title: String,
    /// Overview and aims/scope text merged into one statement.
    pub mission: String,
    pub jms_kind: JmsKind,
    pub sjr: Option<f64>,
    pub h_index: u32,
    pub coverage_years: u32,
    pub quartile: Option<Quartile>,
    pub access: Access,
    pub publisher_country: Option<String>,
}

impl JournalRecord {
    /// Joins separately sourced overview and aims/scope texts.
    pub fn merge_mission(overview: &str, aims_scope: &str) -> String {
        [overview.trim(), aims_scope.trim()]
            .iter()
            .filter(|s| !s.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn validate(&self) -> Vec<(String, String)> {
        let mut problems = Vec::new();
        if self.id.trim().is_empty() {
            problems.push(("id".into(), "empty id".into()));
        }
        if self.mission.trim().is_empty() {
            problems.push(("mission".into(), "empty JMS".into()));
        }
        if let Some(sjr) = self.sjr {
            if !(sjr.is_finite() && sjr >= 0.0) {
                problems.push(("sjr".into(), format!("sjr must be a nonnegative number, got {sjr}")));
            }
        }
        if self.coverage_years < 1 {
            problems.push(("coverage_years".into(), "coverage_years must be at least 1".into()));
        }
        if let Some(c) = &self.publisher_country {
            if c.len() != 2 || !c.chars().all(|ch| ch.is_ascii_uppercase()) {
                problems.push(("publisher_country".into(), format!("invalid country code {c:?}")));
            }
        }
        problems
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// `.jsonl`/`.ndjson`/`.json` read as JSON lines, anything else as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson" | "json") => Self::Jsonl,
            _ => Self::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Any bad row fails the whole load.
    #[default]
    Strict,
    /// Bad rows are skipped and reported.
    Lenient,
}

/// A problem with one input row. Rows are numbered from 1, header excluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDiagnostic {
    pub row: usize,
    pub field: String,
    pub reason: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}: {}", self.row, self.field, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("duplicate id {id:?} (rows {first} and {second})")]
    DuplicateId { id: String, first: usize, second: usize },
    #[error("{} invalid row(s); first: {}", .0.len(), .0[0])]
    InvalidRows(Vec<RowDiagnostic>),
    #[error("empty corpus")]
    Empty,
    #[error("metric missing on records: {}", .0.join(", "))]
    MissingMetric(Vec<String>),
    #[error("fraction must be in (0, 1], got {0}")]
    Fraction(f64),
    #[error("write failed: {0}")]
    Write(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source: PathBuf,
    pub loaded_at: SystemTime,
}

/// Records in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub records: Vec<JournalRecord>,
    pub provenance: Option<Provenance>,
}

impl Corpus {
    pub fn new(records: Vec<JournalRecord>) -> Self {
        Self {
            records,
            provenance: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn derived(&self, records: Vec<JournalRecord>) -> Self {
        Self {
            records,
            provenance: self.provenance.clone(),
        }
    }
}

/// Result of a load: the corpus plus the rows that were rejected.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub corpus: Corpus,
    pub diagnostics: Vec<RowDiagnostic>,
}

pub fn load_corpus(path: &Path, format: InputFormat, strictness: Strictness) -> Result<Loaded, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut loaded = read_corpus(BufReader::new(file), format, strictness)?;
    loaded.corpus.provenance = Some(Provenance {
        source: path.to_path_buf(),
        loaded_at: SystemTime::now(),
    });
    Ok(loaded)
}

/// Reads records from CSV or JSON lines.
pub fn read_corpus<R: Read>(reader: R, format: InputFormat, strictness: Strictness) -> Result<Loaded, CorpusError> {
    let rows = match format {
        InputFormat::Csv => read_csv_rows(reader)?,
        InputFormat::Jsonl => read_jsonl_rows(reader)?,
    };

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (row, parsed) in rows {
        match parsed {
            Ok(record) => {
                let problems = record.validate();
                if problems.is_empty() {
                    if let Some(&first) = seen.get(&record.id) {
                        return Err(CorpusError::DuplicateId {
                            id: record.id,
                            first,
                            second: row,
                        });
                    }
                    seen.insert(record.id.clone(), row);
                    records.push(record);
                } else {
                    diagnostics.extend(problems.into_iter().map(|(field, reason)| RowDiagnostic {
                        row,
                        field,
                        reason,
                    }));
                }
            }
            Err(diag) => diagnostics.push(diag),
        }
    }
    if strictness == Strictness::Strict && !diagnostics.is_empty() {
        return Err(CorpusError::InvalidRows(diagnostics));
    }
    Ok(Loaded {
        corpus: Corpus::new(records),
        diagnostics,
    })
}

type ParsedRow = (usize, Result<JournalRecord, RowDiagnostic>);

fn read_csv_rows<R: Read>(reader: R) -> Result<Vec<ParsedRow>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| CorpusError::Header(e.to_string()))?.clone();
    let found: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if found != COLUMNS {
        return Err(CorpusError::Header(format!(
            "expected columns {}, found {}",
            COLUMNS.join(","),
            found.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, result) in rdr.records().enumerate() {
        let row = i + 1;
        let parsed = match result {
            Ok(rec) if rec.len() != COLUMNS.len() => Err(RowDiagnostic {
                row,
                field: "*".into(),
                reason: format!("expected {} fields, found {}", COLUMNS.len(), rec.len()),
            }),
            Ok(rec) => {
                let cells: Vec<&str> = rec.iter().collect();
                record_from_cells(row, &cells)
            }
            Err(e) => Err(RowDiagnostic {
                row,
                field: "*".into(),
                reason: e.to_string(),
            }),
        };
        rows.push((row, parsed));
    }
    Ok(rows)
}

fn record_from_cells(row: usize, cells: &[&str]) -> Result<JournalRecord, RowDiagnostic> {
    let fail = |field: &str, reason: String| RowDiagnostic {
        row,
        field: field.to_string(),
        reason,
    };
    let optional = |s: &str| {
        let s = s.trim();
        (!s.is_empty()).then(|| s.to_string())
    };
    let sjr = match optional(cells[4]) {
        None => None,
        Some(s) => Some(
            s.parse::<f64>()
                .map_err(|_| fail("sjr", format!("invalid number {s:?}")))?,
        ),
    };
    let h_index = cells[5]
        .trim()
        .parse::<u32>()
        .map_err(|_| fail("h_index", format!("invalid h_index {:?}", cells[5])))?;
    let coverage_years = cells[6]
        .trim()
        .parse::<u32>()
        .map_err(|_| fail("coverage_years", format!("invalid coverage_years {:?}", cells[6])))?;
    Ok(JournalRecord {
        id: cells[0].trim().to_string(),
        title: cells[1].trim().to_string(),
        mission: cells[2].trim().to_string(),
        jms_kind: cells[3].trim().parse().map_err(|e| fail("jms_kind", e))?,
        sjr,
        h_index,
        coverage_years,
        quartile: optional(cells[7])
            .map(|q| q.parse())
            .transpose()
            .map_err(|e| fail("quartile", e))?,
        access: cells[8].trim().parse().map_err(|e| fail("access", e))?,
        publisher_country: optional(cells[9]),
    })
}

fn read_jsonl_rows<R: Read>(reader: R) -> Result<Vec<ParsedRow>, CorpusError> {
    let mut rows = Vec::new();
    let mut row = 0;
    for line in BufReader::new(reader).lines() {
        let line = line.map_err(|source| CorpusError::Io {
            path: "<jsonl>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        row += 1;
        let parsed = serde_json::from_str::<JournalRecord>(&line).map_err(|e| RowDiagnostic {
            row,
            field: "*".into(),
            reason: e.to_string(),
        });
        rows.push((row, parsed));
    }
    Ok(rows)
}

/// Writes the corpus in the same layout [`read_corpus`] accepts.
pub fn write_corpus<W: Write>(corpus: &Corpus, writer: W, format: InputFormat) -> Result<(), CorpusError> {
    let werr = |e: &dyn fmt::Display| CorpusError::Write(e.to_string());
    match format {
        InputFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(COLUMNS).map_err(|e| werr(&e))?;
            for r in &corpus.records {
                w.write_record([
                    r.id.clone(),
                    r.title.clone(),
                    r.mission.clone(),
                    r.jms_kind.to_string(),
                    r.sjr.map(|v| v.to_string()).unwrap_or_default(),
                    r.h_index.to_string(),
                    r.coverage_years.to_string(),
                    r.quartile.map(|q| q.to_string()).unwrap_or_default(),
                    r.access.to_string(),
                    r.publisher_country.clone().unwrap_or_default(),
                ])
                .map_err(|e| werr(&e))?;
            }
            w.flush().map_err(|e| werr(&e))?;
        }
        InputFormat::Jsonl => {
            let mut writer = writer;
            for r in &corpus.records {
                serde_json::to_writer(&mut writer, r).map_err(|e| werr(&e))?;
                writer.write_all(b"\n").map_err(|e| werr(&e))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sjr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceEnd {
    Top,
    Bottom,
}

impl Metric {
    fn value(self, record: &JournalRecord) -> Option<f64> {
        match self {
            Metric::Sjr => record.sjr,
        }
    }
}

/// The `ceil(fraction · n)` highest (or lowest) records by `metric`.
///
/// Ties are broken by ascending id at either end.
pub fn slice_by_metric_percentile(
    corpus: &Corpus,
    metric: Metric,
    fraction: f64,
    end: SliceEnd,
) -> Result<Corpus, CorpusError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CorpusError::Fraction(fraction));
    }
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let missing: Vec<String> = corpus
        .records
        .iter()
        .filter(|r| metric.value(r).is_none())
        .map(|r| r.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(CorpusError::MissingMetric(missing));
    }
    let mut ranked: Vec<(f64, &JournalRecord)> = corpus
        .records
        .iter()
        .map(|r| (metric.value(r).unwrap_or_default(), r))
        .collect();
    ranked.sort_by(|(a, ra), (b, rb)| {
        let by_value = match end {
            SliceEnd::Top => b.total_cmp(a),
            SliceEnd::Bottom => a.total_cmp(b),
        };
        by_value.then_with(|| ra.id.cmp(&rb.id))
    });
    let take = slice_size(fraction, corpus.len());
    let take = take.clamp(1, corpus.len());
    Ok(corpus.derived(ranked.into_iter().take(take).map(|(_, r)| r.clone()).collect()))
}

/// `ceil(fraction · n)`, ignoring float noise such as `0.07 · 100 = 7.000000000000001`.
pub fn slice_size(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    let nearest = raw.round();
    if (raw - nearest).abs() < 1e-9 * raw.max(1.0) {
        nearest as usize
    } else {
        raw.ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Access,
    Quartile,
    PublisherCountry,
}

/// Label of a group; records without the key land in `Missing`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupLabel {
    Value(String),
    Missing,
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupLabel::Value(v) => f.write_str(v),
            GroupLabel::Missing => f.write_str("missing"),
        }
    }
}

impl FromStr for GroupKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "access" => Ok(GroupKey::Access),
            "quartile" => Ok(GroupKey::Quartile),
            "publisher_country" | "country" => Ok(GroupKey::PublisherCountry),
            other => Err(format!("unknown group key '{other}'")),
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKey::Access => "access",
            GroupKey::Quartile => "quartile",
            GroupKey::PublisherCountry => "publisher_country",
        })
    }
}

impl GroupKey {
    pub fn label(self, record: &JournalRecord) -> GroupLabel {
        let value = match self {
            GroupKey::Access => Some(record.access.to_string()),
            GroupKey::Quartile => record.quartile.map(|q| q.to_string()),
            GroupKey::PublisherCountry => record.publisher_country.clone(),
        };
        value.map_or(GroupLabel::Missing, GroupLabel::Value)
    }
}

/// Partitions the corpus by `key`, keeping input order inside each group.
pub fn group_by(corpus: &Corpus, key: GroupKey) -> BTreeMap<GroupLabel, Corpus> {
    let mut groups: BTreeMap<GroupLabel, Vec<JournalRecord>> = BTreeMap::new();
    for r in &corpus.records {
        groups.entry(key.label(r)).or_default().push(r.clone());
    }
    groups
        .into_iter()
        .map(|(label, records)| (label, corpus.derived(records)))
        .collect()
}

/// Ids present in more than one record, for callers that build corpora by hand.
pub fn duplicate_ids(records: &[JournalRecord]) -> Vec<String> {
    let mut seen = HashSet::new();
    records
        .iter()
        .filter(|r| !seen.insert(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "id,title,mission,jms_kind,sjr,h_index,coverage_years,quartile,access,publisher_country\n";

    fn csv(rows: &[&str]) -> String {
        let mut s = HEADER.to_string();
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    fn read(text: &str, strictness: Strictness) -> Result<Loaded, CorpusError> {
        read_corpus(text.as_bytes(), InputFormat::Csv, strictness)
    }

    pub(crate) fn record(id: &str, sjr: f64) -> JournalRecord {
        JournalRecord {
            id: id.into(),
            title: format!("Title {id}"),
            mission: "Publishes research.".into(),
            jms_kind: JmsKind::Overview,
            sjr: Some(sjr),
            h_index: 1,
            coverage_years: 1,
            quartile: None,
            access: Access::OpenAccess,
            publisher_country: None,
        }
    }

    #[test]
    fn loads_well_formed_rows() {
        let text = csv(&[
            "a,T1,\"Mission, with comma.\",overview,1.5,10,5,Q1,open_access,GB",
            "b,T2,Mission two.,both,0.2,3,2,,non_open_access,",
            "c,T3,Mission three.,aims_scope_other,0,0,1,Q4,open_access,US",
        ]);
        let loaded = read(&text, Strictness::Strict).unwrap();
        assert_eq!(loaded.corpus.len(), 3);
        assert_eq!(loaded.corpus.records[0].mission, "Mission, with comma.");
        assert_eq!(loaded.corpus.records[1].quartile, None);
        assert_eq!(loaded.corpus.records[1].publisher_country, None);
        let ids: Vec<_> = loaded.corpus.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn invalid_quartile_is_a_row_error() {
        let text = csv(&[
            "a,T,Mission.,overview,1,1,1,Q5,open_access,GB",
            "b,T,Mission.,overview,1,1,1,Q2,open_access,GB",
        ]);
        let loaded = read(&text, Strictness::Lenient).unwrap();
        assert_eq!(loaded.corpus.len(), 1);
        assert_eq!(loaded.diagnostics.len(), 1);
        assert_eq!(loaded.diagnostics[0].row, 1);
        assert_eq!(loaded.diagnostics[0].field, "quartile");
        assert!(loaded.diagnostics[0].reason.contains("invalid quartile"));
        assert!(matches!(
            read(&text, Strictness::Strict),
            Err(CorpusError::InvalidRows(_))
        ));
    }

    #[test]
    fn empty_mission_is_a_row_error() {
        let text = csv(&["a,T,\"   \",overview,1,1,1,Q1,open_access,GB"]);
        let loaded = read(&text, Strictness::Lenient).unwrap();
        assert_eq!(loaded.diagnostics[0].field, "mission");
        assert_eq!(loaded.diagnostics[0].reason, "empty JMS");
    }

    #[test]
    fn other_row_errors() {
        let text = csv(&[
            "a,T,M.,overview,-1,1,1,Q1,open_access,GB",
            "b,T,M.,overview,1,1,0,Q1,open_access,GB",
            "c,T,M.,overview,1,1,1,Q1,gold,GB",
            "d,T,M.,overview,1,1,1,Q1,open_access,gbr",
            "e,T,M.,overview,1,1",
        ]);
        let loaded = read(&text, Strictness::Lenient).unwrap();
        let fields: Vec<_> = loaded.diagnostics.iter().map(|d| d.field.as_str()).collect();
        assert_eq!(fields, ["sjr", "coverage_years", "access", "publisher_country", "*"]);
    }

    #[test]
    fn malformed_header_is_fatal() {
        let text = "id,title\na,b\n";
        assert!(matches!(read(text, Strictness::Lenient), Err(CorpusError::Header(_))));
    }

    #[test]
    fn duplicate_id_is_fatal() {
        let text = csv(&[
            "a,T,M.,overview,1,1,1,Q1,open_access,GB",
            "a,T,M.,overview,1,1,1,Q1,open_access,GB",
        ]);
        assert!(matches!(
            read(&text, Strictness::Lenient),
            Err(CorpusError::DuplicateId {
                first: 1,
                second: 2,
                ..
            })
        ));
    }

    #[test]
    fn jsonl_input() {
        let line = serde_json::to_string(&record("x", 2.0)).unwrap();
        let text = format!("{line}\n\n{{\"id\": 3}}\n");
        let loaded = read_corpus(text.as_bytes(), InputFormat::Jsonl, Strictness::Lenient).unwrap();
        assert_eq!(loaded.corpus.len(), 1);
        assert_eq!(loaded.diagnostics[0].row, 2);
    }

    #[test]
    fn slice_singleton_top() {
        let corpus = Corpus::new((1..=10).map(|i| record(&format!("r{i:02}"), i as f64)).collect());
        let top = slice_by_metric_percentile(&corpus, Metric::Sjr, 0.1, SliceEnd::Top).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top.records[0].sjr, Some(10.0));
        let bottom = slice_by_metric_percentile(&corpus, Metric::Sjr, 0.1, SliceEnd::Bottom).unwrap();
        assert_eq!(bottom.records[0].sjr, Some(1.0));
    }

    #[test]
    fn slice_full_fraction_reranks() {
        let corpus = Corpus::new(vec![record("a", 1.0), record("b", 3.0), record("c", 2.0)]);
        let all = slice_by_metric_percentile(&corpus, Metric::Sjr, 1.0, SliceEnd::Top).unwrap();
        let ids: Vec<_> = all.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["b", "c", "a"]);
    }

    #[test]
    fn slice_tie_at_boundary_prefers_smaller_id() {
        // 20 records; ranks 1 and 2 are r19 (sjr 100) then a tie at 50 between r07 and r03.
        let mut records: Vec<JournalRecord> = (0..20).map(|i| record(&format!("r{i:02}"), i as f64)).collect();
        records[19].sjr = Some(100.0);
        records[7].sjr = Some(50.0);
        records[3].sjr = Some(50.0);
        let corpus = Corpus::new(records);
        let top = slice_by_metric_percentile(&corpus, Metric::Sjr, 0.1, SliceEnd::Top).unwrap();
        let ids: Vec<_> = top.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["r19", "r03"]);
    }

    #[test]
    fn odd_half_slices_share_the_median() {
        let corpus = Corpus::new((0..5).map(|i| record(&format!("r{i}"), i as f64)).collect());
        let top = slice_by_metric_percentile(&corpus, Metric::Sjr, 0.5, SliceEnd::Top).unwrap();
        let bottom = slice_by_metric_percentile(&corpus, Metric::Sjr, 0.5, SliceEnd::Bottom).unwrap();
        assert_eq!((top.len(), bottom.len()), (3, 3));
        assert_eq!(top.records[2].id, "r2");
        assert_eq!(bottom.records[2].id, "r2");
    }

    #[test]
    fn slice_size_is_count_based() {
        assert_eq!(slice_size(0.10, 1502), 151);
        assert_eq!(slice_size(0.07, 100), 7);
        assert_eq!(slice_size(0.10, 20), 2);
        assert_eq!(slice_size(0.10, 21), 3);
    }

    #[test]
    fn slice_errors() {
        assert!(matches!(
            slice_by_metric_percentile(&Corpus::new(vec![]), Metric::Sjr, 0.1, SliceEnd::Top),
            Err(CorpusError::Empty)
        ));
        let mut r = record("z", 1.0);
        r.sjr = None;
        let corpus = Corpus::new(vec![record("a", 1.0), r]);
        match slice_by_metric_percentile(&corpus, Metric::Sjr, 0.5, SliceEnd::Top) {
            Err(CorpusError::MissingMetric(ids)) => assert_eq!(ids, ["z"]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            slice_by_metric_percentile(&corpus, Metric::Sjr, 0.0, SliceEnd::Top),
            Err(CorpusError::Fraction(_))
        ));
    }

    #[test]
    fn group_by_access_and_country() {
        let mut records: Vec<JournalRecord> = (0..5).map(|i| record(&format!("r{i}"), 1.0)).collect();
        for r in &mut records[2..] {
            r.access = Access::NonOpenAccess;
        }
        let groups = group_by(&Corpus::new(records.clone()), GroupKey::Access);
        let sizes: Vec<_> = groups.values().map(Corpus::len).collect();
        assert_eq!(sizes, [3, 2]);

        records[0].publisher_country = Some("GB".into());
        records[1].publisher_country = Some("GB".into());
        records[2].publisher_country = Some("US".into());
        records[3].publisher_country = Some("CO".into());
        let groups = group_by(&Corpus::new(records.clone()), GroupKey::PublisherCountry);
        assert_eq!(groups.len(), 4);
        assert_eq!(groups[&GroupLabel::Value("GB".into())].len(), 2);
        assert_eq!(groups[&GroupLabel::Missing].len(), 1);

        for r in &mut records {
            r.quartile = Some(Quartile::Q1);
        }
        let groups = group_by(&Corpus::new(records), GroupKey::Quartile);
        assert_eq!(groups.len(), 1);
    }

    fn arb_record() -> impl Strategy<Value = JournalRecord> {
        (
            "[a-z0-9]{1,8}",
            "[A-Za-z ,\"]{0,30}",
            "[A-Za-z][A-Za-z ,.\"\n]{0,60}",
            prop_oneof![
                Just(JmsKind::Overview),
                Just(JmsKind::AimsScopeOther),
                Just(JmsKind::Both)
            ],
            proptest::option::of(0.0f64..100.0),
            0u32..500,
            1u32..80,
            proptest::option::of(prop_oneof![
                Just(Quartile::Q1),
                Just(Quartile::Q2),
                Just(Quartile::Q3),
                Just(Quartile::Q4)
            ]),
            prop_oneof![Just(Access::OpenAccess), Just(Access::NonOpenAccess)],
            proptest::option::of("[A-Z]{2}"),
        )
            .prop_map(
                |(id, title, mission, jms_kind, sjr, h_index, coverage_years, quartile, access, publisher_country)| {
                    JournalRecord {
                        id,
                        title: title.trim().to_string(),
                        mission: mission.trim().to_string(),
                        jms_kind,
                        sjr,
                        h_index,
                        coverage_years,
                        quartile,
                        access,
                        publisher_country,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn write_then_load_is_identity(records in proptest::collection::vec(arb_record(), 0..12)) {
            let mut seen = HashSet::new();
            let records: Vec<_> = records.into_iter().filter(|r| seen.insert(r.id.clone())).collect();
            let corpus = Corpus::new(records);
            for format in [InputFormat::Csv, InputFormat::Jsonl] {
                let mut buf = Vec::new();
                write_corpus(&corpus, &mut buf, format).unwrap();
                let back = read_corpus(buf.as_slice(), format, Strictness::Strict).unwrap();
                prop_assert_eq!(&back.corpus.records, &corpus.records);
            }
        }

        #[test]
        fn groups_partition_input(records in proptest::collection::vec(arb_record(), 0..30)) {
            let corpus = Corpus::new(records);
            for key in [GroupKey::Access, GroupKey::Quartile, GroupKey::PublisherCountry] {
                let groups = group_by(&corpus, key);
                let total: usize = groups.values().map(Corpus::len).sum();
                prop_assert_eq!(total, corpus.len());
                for (label, group) in &groups {
                    prop_assert!(group.records.iter().all(|r| &key.label(r) == label));
                }
            }
        }

        #[test]
        fn top_and_bottom_disjoint(n in 2usize..60, fraction in 0.01f64..=0.5) {
            // a ceil-sized cut can only be disjoint when both slices fit
            prop_assume!(2 * slice_size(fraction, n) <= n);
            let corpus = Corpus::new((0..n).map(|i| record(&format!("r{i}"), ((i * 7919) % 10007) as f64)).collect());
            let top = slice_by_metric_percentile(&corpus, Metric::Sjr, fraction, SliceEnd::Top).unwrap();
            let bottom = slice_by_metric_percentile(&corpus, Metric::Sjr, fraction, SliceEnd::Bottom).unwrap();
            let top_ids: HashSet<_> = top.records.iter().map(|r| &r.id).collect();
            prop_assert!(bottom.records.iter().all(|r| !top_ids.contains(&r.id)));
            prop_assert_eq!(top.len(), slice_size(fraction, n).max(1));
        }
    }
}
