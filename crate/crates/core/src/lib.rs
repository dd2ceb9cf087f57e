//! Citation-network mapping of a bibliographic corpus: ingest, top-cited
//! selection, reference matching, subnetwork detection, clinical scoring and
//! reporting.

pub mod annotate;
pub mod cluster;
pub mod data;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod selection;
pub mod text;

pub use annotate::{Annotation, CountMode, VocabularyIndex};
pub use cluster::{detect_subnets, modularity, Partition};
pub use graph::{CitationNetwork, ComponentReport, NodeAttrs};
pub use ingest::{BibRecord, InputFormat, Query};
pub use pipeline::{run_pipeline, PipelineError, RunConfig, RunManifest};
pub use report::{ClinicalScore, ClusterProfile, GraphFormat, Leaderboard};
pub use selection::{SelectionConfig, SelectionResult, TiePolicy};
