#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use lexnet::corpus::{load_corpus, InputFormat, Strictness};
use lexnet::pipeline::{analyze, render_bundle_files, OutputFormat, PipelineConfig};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn test_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

pub fn mini_config() -> PipelineConfig {
    let mut config = PipelineConfig::new(data_path("mini_corpus.csv"));
    config.seed = 42;
    config
}

/// Every output file of the mini-corpus run, on a pool of `threads` workers.
pub fn render_mini(threads: usize) -> BTreeMap<String, Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let config = mini_config();
        let loaded = load_corpus(&config.input, InputFormat::Csv, Strictness::Strict).unwrap();
        let analysis = analyze(&loaded.corpus, &config).unwrap();
        let all: BTreeSet<OutputFormat> = [
            OutputFormat::Csv,
            OutputFormat::Json,
            OutputFormat::Graphml,
            OutputFormat::Dot,
        ]
        .into();
        render_bundle_files(&analysis, &all).unwrap()
    })
}

pub fn golden_bundle() -> Vec<u8> {
    std::fs::read(test_path("golden/mini_bundle.json")).unwrap()
}

/// (word, syllables) pairs of the dictionary oracle.
pub fn syllable_oracle() -> Vec<(String, usize)> {
    std::fs::read_to_string(test_path("fixtures/syllables_cmudict.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (w, n) = l.split_once(' ').unwrap();
            (w.to_string(), n.trim().parse().unwrap())
        })
        .collect()
}
