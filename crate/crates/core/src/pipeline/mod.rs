//! Stage functions and end-to-end orchestration with a run manifest.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{validate_bands, validate_resolution, RunConfig};

use crate::annotate::{
    annotate_corpus, annotations_from_json, annotations_to_json, load_vocabulary, Annotation, ClinicalPrefixes,
    CountMode, VocabularyIndex,
};
use crate::cluster::{detect_subnets_with_resolution, Partition};
use crate::graph::{
    build_network, hierarchical_layering, largest_component, BuildReport, CitationNetwork, ComponentReport,
    JournalSynonyms, Layering,
};
use crate::ingest::{
    apply_query_filter, merge_corpora, parse_corpus, parse_corpus_json, serialize_corpus, BibRecord, InputFormat, Query,
};
use crate::report::{
    export_graph, render_report, score_annotations, GraphFormat, InstitutionSynonyms, RatioBands, ReportInputs,
};
use crate::selection::{select_top_cited, selected_records, SelectionConfig, SelectionResult};

pub const CORPUS_FILE: &str = "corpus.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const NETWORK_FILE: &str = "network.json";
pub const MATCHING_FILE: &str = "matching.json";
pub const COMPONENTS_FILE: &str = "components.csv";
pub const PARTITION_FILE: &str = "partition.json";
pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const REPORT_FILE: &str = "report.md";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const EXPORT_STEM: &str = "network.scored";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Ingest,
    Filter,
    Select,
    Graph,
    Component,
    Cluster,
    Annotate,
    Score,
    Report,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Filter => "filter",
            Stage::Select => "select",
            Stage::Graph => "graph",
            Stage::Component => "component",
            Stage::Cluster => "cluster",
            Stage::Annotate => "annotate",
            Stage::Score => "score",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {path}: {message}")]
    Input {
        stage: Stage,
        path: String,
        message: String,
    },
    #[error("{stage}: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Config(_) => Stage::Config,
            PipelineError::Input { stage, .. } | PipelineError::Stage { stage, .. } => *stage,
        }
    }

    /// 2 config, 3 input, 4 stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Input { .. } => 3,
            PipelineError::Stage { .. } => 4,
        }
    }

    fn stage_err(stage: Stage, e: impl fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: e.to_string(),
        }
    }

    fn input(stage: Stage, path: &Path, e: impl fmt::Display) -> Self {
        PipelineError::Input {
            stage,
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_file(stage: Stage, path: &Path) -> Result<Vec<u8>, PipelineError> {
    std::fs::read(path).map_err(|e| PipelineError::input(stage, path, e))
}

pub fn write_file(stage: Stage, path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::input(stage, dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| PipelineError::input(stage, path, e))
}

/// An optional resource file with the bundled text as fallback.
struct Resource {
    bytes: Vec<u8>,
    origin: String,
}

fn resource(stage: Stage, path: Option<&Path>, bundled: &str) -> Result<Resource, PipelineError> {
    Ok(match path {
        Some(p) => Resource {
            bytes: read_file(stage, p)?,
            origin: p.display().to_string(),
        },
        None => Resource {
            bytes: bundled.as_bytes().to_vec(),
            origin: "bundled".into(),
        },
    })
}

fn utf8<'a>(stage: Stage, origin: &str, bytes: &'a [u8]) -> Result<&'a str, PipelineError> {
    std::str::from_utf8(bytes).map_err(|e| PipelineError::Input {
        stage,
        path: origin.to_string(),
        message: e.to_string(),
    })
}

/// Lookup tables and vocabulary for a run, with digests of what was loaded.
pub struct Resources {
    pub query: Option<Query>,
    pub vocab: VocabularyIndex,
    pub journals: JournalSynonyms,
    pub institutions: InstitutionSynonyms,
    digests: BTreeMap<&'static str, ResourceDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceDigest {
    pub origin: String,
    pub sha256: String,
}

pub fn load_query(path: &Path) -> Result<(Query, Vec<u8>), PipelineError> {
    let bytes = read_file(Stage::Filter, path)?;
    let text = utf8(Stage::Filter, &path.display().to_string(), &bytes)?;
    let query = Query::from_toml(text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Ok((query, bytes))
}

/// Vocabulary plus clinical prefixes, each from a file or the bundled copy.
pub fn load_vocab(
    vocab: Option<&Path>,
    prefixes: Option<&Path>,
) -> Result<(VocabularyIndex, [ResourceDigest; 2]), PipelineError> {
    let p = resource(Stage::Annotate, prefixes, crate::data::CLINICAL_PREFIXES)?;
    let parsed =
        ClinicalPrefixes::parse(utf8(Stage::Annotate, &p.origin, &p.bytes)?).map_err(|e| PipelineError::Input {
            stage: Stage::Annotate,
            path: p.origin.clone(),
            message: e.to_string(),
        })?;
    let v = resource(Stage::Annotate, vocab, crate::data::VOCAB_TSV)?;
    let index = load_vocabulary(&v.bytes, parsed).map_err(|e| PipelineError::Input {
        stage: Stage::Annotate,
        path: v.origin.clone(),
        message: e.to_string(),
    })?;
    Ok((index, [digest_of(&v), digest_of(&p)]))
}

pub fn load_journals(path: Option<&Path>) -> Result<(JournalSynonyms, ResourceDigest), PipelineError> {
    let r = resource(Stage::Graph, path, crate::data::JOURNAL_SYNONYMS_TSV)?;
    let table =
        JournalSynonyms::from_tsv(utf8(Stage::Graph, &r.origin, &r.bytes)?).map_err(|e| PipelineError::Input {
            stage: Stage::Graph,
            path: r.origin.clone(),
            message: e,
        })?;
    Ok((table, digest_of(&r)))
}

pub fn load_institutions(path: Option<&Path>) -> Result<(InstitutionSynonyms, ResourceDigest), PipelineError> {
    let r = resource(Stage::Report, path, crate::data::INSTITUTION_SYNONYMS_TSV)?;
    let table =
        InstitutionSynonyms::from_tsv(utf8(Stage::Report, &r.origin, &r.bytes)?).map_err(|e| PipelineError::Input {
            stage: Stage::Report,
            path: r.origin.clone(),
            message: e,
        })?;
    Ok((table, digest_of(&r)))
}

fn digest_of(r: &Resource) -> ResourceDigest {
    ResourceDigest {
        origin: r.origin.clone(),
        sha256: sha256_hex(&r.bytes),
    }
}

impl Resources {
    pub fn load(cfg: &RunConfig) -> Result<Self, PipelineError> {
        let mut digests = BTreeMap::new();
        let query = match &cfg.query {
            Some(path) => {
                let (q, bytes) = load_query(path)?;
                digests.insert(
                    "query",
                    ResourceDigest {
                        origin: path.display().to_string(),
                        sha256: sha256_hex(&bytes),
                    },
                );
                Some(q)
            }
            None => None,
        };
        let (vocab, [vd, pd]) = load_vocab(cfg.vocab.as_deref(), cfg.prefixes.as_deref())?;
        digests.insert("vocab", vd);
        digests.insert("prefixes", pd);
        let (journals, jd) = load_journals(cfg.journal_synonyms.as_deref())?;
        digests.insert("journal_synonyms", jd);
        let (institutions, id) = load_institutions(cfg.institution_synonyms.as_deref())?;
        digests.insert("institution_synonyms", id);
        Ok(Self {
            query,
            vocab,
            journals,
            institutions,
            digests,
        })
    }
}

/// Parses every input, merges them and applies the query when given.
pub fn ingest_stage(
    inputs: &[(PathBuf, Vec<u8>)],
    format: InputFormat,
    query: Option<&Query>,
) -> Result<Vec<BibRecord>, PipelineError> {
    let mut parts = Vec::with_capacity(inputs.len());
    for (path, bytes) in inputs {
        parts.push(parse_corpus(format, bytes).map_err(|e| PipelineError::input(Stage::Ingest, path, e))?);
    }
    let merged = merge_corpora(parts).map_err(|e| PipelineError::stage_err(Stage::Ingest, e))?;
    Ok(match query {
        Some(q) => {
            let kept = apply_query_filter(&merged, q);
            log::info!("filter: kept {} of {} records", kept.len(), merged.len());
            kept
        }
        None => merged,
    })
}

pub fn read_selection(stage: Stage, path: &Path) -> Result<SelectionResult, PipelineError> {
    let bytes = read_file(stage, path)?;
    serde_json::from_slice(&bytes).map_err(|e| PipelineError::input(stage, path, e))
}

pub fn select_stage(corpus: &[BibRecord], cfg: &SelectionConfig) -> Result<SelectionResult, PipelineError> {
    let sel = select_top_cited(corpus, cfg).map_err(|e| PipelineError::stage_err(Stage::Select, e))?;
    log::info!(
        "select: {} of {} records, coverage {:.4}",
        sel.selected_ids.len(),
        sel.corpus_size,
        sel.coverage
    );
    Ok(sel)
}

pub struct GraphOutput {
    /// Largest weakly connected component.
    pub network: CitationNetwork,
    pub components: ComponentReport,
    pub matching: BuildReport,
}

pub fn graph_stage(
    corpus: &[BibRecord],
    selection: &SelectionResult,
    journals: JournalSynonyms,
) -> Result<GraphOutput, PipelineError> {
    let chosen = selected_records(corpus, selection);
    if chosen.len() != selection.selected_ids.len() {
        return Err(PipelineError::stage_err(
            Stage::Graph,
            "selection names records missing from the corpus",
        ));
    }
    let (full, matching) = build_network(&chosen, journals);
    log::info!(
        "graph: {} references, {} matched, {} ambiguous, {} edges",
        matching.references,
        matching.matched,
        matching.ambiguities.len(),
        full.edge_count()
    );
    let (network, components) = largest_component(&full).map_err(|e| PipelineError::stage_err(Stage::Component, e))?;
    Ok(GraphOutput {
        network,
        components,
        matching,
    })
}

pub fn cluster_stage(net: &CitationNetwork, seed: u64, resolution: f64) -> Result<Partition, PipelineError> {
    validate_resolution(resolution)?;
    let p = detect_subnets_with_resolution(net, seed, resolution)
        .map_err(|e| PipelineError::stage_err(Stage::Cluster, e))?;
    log::info!(
        "cluster: {} clusters, modularity {:.4}",
        p.cluster_count(),
        p.modularity
    );
    Ok(p)
}

pub fn annotate_stage(corpus: &[BibRecord], vocab: &VocabularyIndex, mode: CountMode) -> Vec<Annotation> {
    annotate_corpus(corpus, vocab, mode)
}

/// The JSON artifacts a report is built from.
pub struct RunArtifacts {
    pub corpus: Vec<BibRecord>,
    pub selection: SelectionResult,
    pub network: CitationNetwork,
    pub components: ComponentReport,
    pub partition: Option<Partition>,
    pub annotations: Vec<Annotation>,
}

fn parse_err(path: &Path, e: impl fmt::Display) -> PipelineError {
    PipelineError::input(Stage::Report, path, e)
}

impl RunArtifacts {
    /// Reads a run directory. `partition.json` may be absent when no
    /// citation resolved.
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let read = |name: &str| -> Result<(PathBuf, Vec<u8>), PipelineError> {
            let p = dir.join(name);
            Ok((p.clone(), read_file(Stage::Report, &p)?))
        };
        let (p, b) = read(CORPUS_FILE)?;
        let corpus = parse_corpus_json(&b).map_err(|e| parse_err(&p, e))?;
        let selection = read_selection(Stage::Report, &dir.join(SELECTION_FILE))?;
        let (p, b) = read(NETWORK_FILE)?;
        let network = CitationNetwork::from_json(&b).map_err(|e| parse_err(&p, e))?;
        let (p, b) = read(COMPONENTS_FILE)?;
        let components = ComponentReport::from_csv(&b).map_err(|e| parse_err(&p, e))?;
        let partition_path = dir.join(PARTITION_FILE);
        let partition = if partition_path.exists() {
            let b = read_file(Stage::Report, &partition_path)?;
            Some(Partition::from_json(&b).map_err(|e| parse_err(&partition_path, e))?)
        } else {
            None
        };
        let (p, b) = read(ANNOTATIONS_FILE)?;
        let annotations = annotations_from_json(&b).map_err(|e| parse_err(&p, e))?;
        Ok(Self {
            corpus,
            selection,
            network,
            components,
            partition,
            annotations,
        })
    }
}

/// Report, sidecars and graph exports as `(file name, bytes)`.
pub fn report_stage(
    artifacts: &RunArtifacts,
    vocab: Option<&VocabularyIndex>,
    institutions: &InstitutionSynonyms,
    bands: RatioBands,
) -> Result<Vec<(String, Vec<u8>)>, PipelineError> {
    let net = &artifacts.network;
    let members: BTreeSet<&str> = net.node_ids().collect();
    let records: Vec<BibRecord> = artifacts
        .corpus
        .iter()
        .filter(|r| members.contains(r.record_id.as_str()))
        .cloned()
        .collect();
    let report = render_report(&ReportInputs {
        selection: Some(&artifacts.selection),
        components: Some(&artifacts.components),
        network: Some(net),
        partition: artifacts.partition.as_ref(),
        annotations: Some(&artifacts.annotations),
        records: Some(&records),
        vocab,
        institution_synonyms: Some(institutions),
        bands,
    })
    .map_err(|e| PipelineError::stage_err(Stage::Report, e))?;

    let in_net: Vec<Annotation> = artifacts
        .annotations
        .iter()
        .filter(|a| members.contains(a.record_id.as_str()))
        .cloned()
        .collect();
    let scores = score_annotations(&in_net);
    let layering: Option<Layering> = match hierarchical_layering(net) {
        Ok(l) => Some(l),
        Err(e) => {
            log::warn!("score: exporting without layers: {e}");
            None
        }
    };
    let mut files = vec![(REPORT_FILE.to_string(), report.markdown.into_bytes())];
    files.extend(report.sidecars);
    for format in [GraphFormat::GraphMl, GraphFormat::Dot, GraphFormat::Json] {
        let bytes = export_graph(net, &scores, artifacts.partition.as_ref(), layering.as_ref(), format)
            .map_err(|e| PipelineError::stage_err(Stage::Score, e))?;
        files.push((format!("{EXPORT_STEM}.{}", format.extension()), bytes));
    }
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSnapshot {
    pub format: &'static str,
    pub fraction: f64,
    pub min_coverage: f64,
    pub tie_policy: crate::selection::TiePolicy,
    pub seed: u64,
    pub resolution: f64,
    pub count: CountMode,
    pub bands: RatioBands,
    pub clinical_prefixes: Vec<String>,
    pub resources: BTreeMap<&'static str, ResourceDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    pub config: ConfigSnapshot,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<&'static str, u128>>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}

struct Timer {
    on: bool,
    start: Instant,
    laps: BTreeMap<&'static str, u128>,
}

impl Timer {
    fn lap(&mut self, stage: Stage) {
        if self.on {
            self.laps.insert(stage.name(), self.start.elapsed().as_millis());
            self.start = Instant::now();
        }
    }
}

/// Runs every stage, writes the artifacts and manifest into `out_dir`.
pub fn run_pipeline(cfg: &RunConfig, inputs: &[PathBuf], out_dir: &Path) -> Result<RunManifest, PipelineError> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(PipelineError::Config("no input files".into()));
    }
    let mut timer = Timer {
        on: cfg.timings,
        start: Instant::now(),
        laps: BTreeMap::new(),
    };
    let res = Resources::load(cfg)?;
    let mut raw = Vec::with_capacity(inputs.len());
    let mut input_digests = Vec::with_capacity(inputs.len());
    for path in inputs {
        let bytes = read_file(Stage::Ingest, path)?;
        input_digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        raw.push((path.clone(), bytes));
    }

    let mut outputs: BTreeMap<String, String> = BTreeMap::new();
    let mut emit = |stage: Stage, name: &str, bytes: &[u8]| -> Result<(), PipelineError> {
        write_file(stage, &out_dir.join(name), bytes)?;
        outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    };

    let corpus = ingest_stage(&raw, cfg.format, res.query.as_ref())?;
    emit(Stage::Ingest, CORPUS_FILE, &serialize_corpus(&corpus))?;
    timer.lap(Stage::Ingest);

    let selection = select_stage(&corpus, &cfg.selection)?;
    emit(Stage::Select, SELECTION_FILE, &json_bytes(&selection))?;
    timer.lap(Stage::Select);

    let graph = graph_stage(&corpus, &selection, res.journals.clone())?;
    emit(Stage::Graph, NETWORK_FILE, &graph.network.to_json())?;
    emit(Stage::Graph, MATCHING_FILE, &json_bytes(&graph.matching))?;
    emit(Stage::Component, COMPONENTS_FILE, &graph.components.to_csv())?;
    timer.lap(Stage::Graph);

    let partition = if graph.network.edge_count() == 0 {
        log::warn!("cluster: skipped, no citations resolved");
        None
    } else {
        let p = cluster_stage(&graph.network, cfg.seed, cfg.resolution)?;
        emit(Stage::Cluster, PARTITION_FILE, &p.to_json())?;
        Some(p)
    };
    timer.lap(Stage::Cluster);

    let annotations = annotate_stage(&corpus, &res.vocab, cfg.count);
    emit(Stage::Annotate, ANNOTATIONS_FILE, &annotations_to_json(&annotations))?;
    timer.lap(Stage::Annotate);

    let artifacts = RunArtifacts {
        corpus,
        selection,
        network: graph.network,
        components: graph.components,
        partition,
        annotations,
    };
    for (name, bytes) in report_stage(&artifacts, Some(&res.vocab), &res.institutions, cfg.bands)? {
        emit(Stage::Report, &name, &bytes)?;
    }
    timer.lap(Stage::Report);

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: input_digests,
        config: ConfigSnapshot {
            format: config::format_name(cfg.format),
            fraction: cfg.selection.fraction,
            min_coverage: cfg.selection.min_coverage,
            tie_policy: cfg.selection.tie_policy,
            seed: cfg.seed,
            resolution: cfg.resolution,
            count: cfg.count,
            bands: cfg.bands,
            clinical_prefixes: res.vocab.clinical_prefixes().prefixes().map(String::from).collect(),
            resources: res.digests,
        },
        timings_ms: cfg.timings.then_some(timer.laps),
        outputs,
    };
    write_file(Stage::Report, &out_dir.join(MANIFEST_FILE), &manifest.to_json())?;
    Ok(manifest)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("artifact serializes");
    out.push(b'\n');
    out
}
