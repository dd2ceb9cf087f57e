use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use transmap_core::annotate::{annotations_to_json, CountMode};
use transmap_core::cluster::Partition;
use transmap_core::graph::CitationNetwork;
use transmap_core::ingest::{parse_corpus_json, serialize_corpus, InputFormat};
use transmap_core::pipeline::{
    self, annotate_stage, cluster_stage, graph_stage, ingest_stage, json_bytes, load_institutions, load_journals,
    load_query, load_vocab, read_file, read_selection, report_stage, run_pipeline, select_stage, validate_bands,
    write_file, PipelineError, RunArtifacts, RunConfig, Stage,
};
use transmap_core::report::RatioBands;
use transmap_core::selection::{SelectionConfig, TiePolicy};

/// Map knowledge translation in a bibliographic corpus through its citation network.
#[derive(Parser)]
#[command(name = "transmap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse exports into a corpus JSON, optionally applying a query.
    Ingest {
        /// Input format.
        #[arg(long, default_value = "wos")]
        format: InputFormat,
        /// Query file (TOML with title/topic patterns).
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Select the most-cited fraction of a corpus.
    Select {
        corpus: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long, default_value_t = 0.6)]
        min_coverage: f64,
        /// include (keep ties at the cut) or truncate.
        #[arg(long, default_value = "include")]
        ties: TiePolicy,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build the citation network of the selection and keep its largest component.
    Graph {
        corpus: PathBuf,
        selection: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Component size histogram (CSV).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Reference matching summary with ambiguities (JSON).
        #[arg(long)]
        matching: Option<PathBuf>,
        /// Journal synonym table (TSV); the bundled one by default.
        #[arg(long)]
        journals: Option<PathBuf>,
    },
    /// Partition the network into subnetworks by modularity.
    Cluster {
        network: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Tag records with vocabulary terms and count clinical ones.
    Annotate {
        corpus: PathBuf,
        #[command(flatten)]
        vocab: VocabArgs,
        /// unique or occurrences.
        #[arg(long, default_value = "unique")]
        count: CountMode,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Render the report, CSV sidecars and graph exports for a run directory.
    Report {
        run_dir: PathBuf,
        /// Report path; sidecars and exports go next to it.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        vocab: VocabArgs,
        /// Institution synonym table (TSV); the bundled one by default.
        #[arg(long)]
        institutions: Option<PathBuf>,
        #[arg(long, default_value_t = 0.33)]
        basic_below: f64,
        #[arg(long, default_value_t = 0.66)]
        clinical_above: f64,
    },
    /// Run every stage into a run directory.
    Run {
        /// Flat TOML config; defaults apply when omitted.
        #[arg(long, env = "TRANSMAP_CONFIG")]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct VocabArgs {
    /// Vocabulary TSV; the bundled one by default.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Clinical tree-number prefixes; the bundled list by default.
    #[arg(long)]
    prefixes: Option<PathBuf>,
}

fn read_corpus(path: &Path, stage: Stage) -> Result<Vec<transmap_core::BibRecord>, PipelineError> {
    let bytes = read_file(stage, path)?;
    parse_corpus_json(&bytes).map_err(|e| input_err(stage, path, e))
}

fn input_err(stage: Stage, path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input {
        stage,
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn execute(cmd: Command) -> Result<(), PipelineError> {
    match cmd {
        Command::Ingest {
            format,
            query,
            output,
            inputs,
        } => {
            let query = query.as_deref().map(load_query).transpose()?.map(|(q, _)| q);
            let mut raw = Vec::with_capacity(inputs.len());
            for path in inputs {
                let bytes = read_file(Stage::Ingest, &path)?;
                raw.push((path, bytes));
            }
            let corpus = ingest_stage(&raw, format, query.as_ref())?;
            write_file(Stage::Ingest, &output, &serialize_corpus(&corpus))
        }
        Command::Select {
            corpus,
            fraction,
            min_coverage,
            ties,
            output,
        } => {
            let cfg = SelectionConfig {
                fraction,
                min_coverage,
                tie_policy: ties,
            };
            cfg.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
            let records = read_corpus(&corpus, Stage::Select)?;
            let sel = select_stage(&records, &cfg)?;
            write_file(Stage::Select, &output, &json_bytes(&sel))
        }
        Command::Graph {
            corpus,
            selection,
            output,
            report,
            matching,
            journals,
        } => {
            let records = read_corpus(&corpus, Stage::Graph)?;
            let sel = read_selection(Stage::Graph, &selection)?;
            let (journals, _) = load_journals(journals.as_deref())?;
            let out = graph_stage(&records, &sel, journals)?;
            write_file(Stage::Graph, &output, &out.network.to_json())?;
            if let Some(path) = report {
                write_file(Stage::Component, &path, &out.components.to_csv())?;
            }
            if let Some(path) = matching {
                write_file(Stage::Graph, &path, &json_bytes(&out.matching))?;
            }
            Ok(())
        }
        Command::Cluster {
            network,
            seed,
            resolution,
            output,
        } => {
            let bytes = read_file(Stage::Cluster, &network)?;
            let net = CitationNetwork::from_json(&bytes).map_err(|e| input_err(Stage::Cluster, &network, e))?;
            let p: Partition = cluster_stage(&net, seed, resolution)?;
            write_file(Stage::Cluster, &output, &p.to_json())
        }
        Command::Annotate {
            corpus,
            vocab,
            count,
            output,
        } => {
            let records = read_corpus(&corpus, Stage::Annotate)?;
            let (index, _) = load_vocab(vocab.vocab.as_deref(), vocab.prefixes.as_deref())?;
            let anns = annotate_stage(&records, &index, count);
            write_file(Stage::Annotate, &output, &annotations_to_json(&anns))
        }
        Command::Report {
            run_dir,
            output,
            vocab,
            institutions,
            basic_below,
            clinical_above,
        } => {
            let bands = RatioBands {
                basic_below,
                clinical_above,
            };
            validate_bands(&bands)?;
            let artifacts = RunArtifacts::load(&run_dir)?;
            let (index, _) = load_vocab(vocab.vocab.as_deref(), vocab.prefixes.as_deref())?;
            let (inst, _) = load_institutions(institutions.as_deref())?;
            let output = output.unwrap_or_else(|| run_dir.join(pipeline::REPORT_FILE));
            let dir = output.parent().map(Path::to_path_buf).unwrap_or_default();
            for (name, bytes) in report_stage(&artifacts, Some(&index), &inst, bands)? {
                let path = if name == pipeline::REPORT_FILE {
                    output.clone()
                } else {
                    dir.join(&name)
                };
                write_file(Stage::Report, &path, &bytes)?;
            }
            Ok(())
        }
        Command::Run { config, output, inputs } => {
            let cfg = match config {
                Some(path) => RunConfig::from_file(&path)?,
                None => RunConfig::default(),
            };
            let manifest = run_pipeline(&cfg, &inputs, &output)?;
            log::info!(
                "run: wrote {} artifacts to {}",
                manifest.outputs.len(),
                output.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRANSMAP_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("transmap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
