//! Scoring, exports and the human-readable report.

mod color;
mod export;
mod leaderboard;
mod profiles;
mod render;

use thiserror::Error;

pub use color::{color_for_ratio, score_annotations, ClinicalScore, Rgb};
pub use export::{annotate_network, export_graph, shape_for_cluster, GraphFormat, SHAPES};
pub use leaderboard::{
    countries_to_csv, country_distribution, institution_leaderboard, InstitutionSynonyms, LeaderRow, Leaderboard,
};
pub use profiles::{cluster_profiles, ClusterProfile, RatioBands, UBIQUITY_SHARE};
pub use render::{format_selection_line, render_report, Report, ReportInputs};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("ratio {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("inputs disagree on node ids: {0}")]
    IdMismatch(String),
    #[error("unknown export format `{0}` (expected graphml, dot or json)")]
    UnknownFormat(String),
    #[error("missing artifact from the {0} stage")]
    MissingArtifact(&'static str),
}
