use std::fmt::Write as _;

use super::{
    cluster_profiles, countries_to_csv, country_distribution, institution_leaderboard, shape_for_cluster,
    InstitutionSynonyms, RatioBands, ReportError,
};
use crate::annotate::{Annotation, VocabularyIndex};
use crate::cluster::Partition;
use crate::graph::{CitationNetwork, ComponentReport};
use crate::ingest::BibRecord;
use crate::selection::SelectionResult;

/// Rows shown per leaderboard table in the Markdown; sidecars carry all rows.
const TABLE_ROWS: usize = 20;
const PROFILE_TERMS: usize = 5;

/// Everything the report draws on. `None` marks a stage that did not run.
#[derive(Default)]
pub struct ReportInputs<'a> {
    pub selection: Option<&'a SelectionResult>,
    pub components: Option<&'a ComponentReport>,
    pub network: Option<&'a CitationNetwork>,
    pub partition: Option<&'a Partition>,
    pub annotations: Option<&'a [Annotation]>,
    /// Records behind the network nodes, for the leaderboards.
    pub records: Option<&'a [BibRecord]>,
    pub vocab: Option<&'a VocabularyIndex>,
    pub institution_synonyms: Option<&'a InstitutionSynonyms>,
    pub bands: RatioBands,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub markdown: String,
    /// `(file name, CSV bytes)`.
    pub sidecars: Vec<(String, Vec<u8>)>,
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

/// `"291 (20.0%) selected; coverage 68.2%"`.
pub fn format_selection_line(sel: &SelectionResult) -> String {
    format!(
        "{} ({}) selected; coverage {}",
        sel.selected_ids.len(),
        pct(sel.selected_fraction()),
        pct(sel.coverage)
    )
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn render_report(inputs: &ReportInputs<'_>) -> Result<Report, ReportError> {
    let sel = inputs.selection.ok_or(ReportError::MissingArtifact("select"))?;
    let comps = inputs.components.ok_or(ReportError::MissingArtifact("graph"))?;
    let net = inputs.network.ok_or(ReportError::MissingArtifact("graph"))?;
    let annotations = inputs.annotations.ok_or(ReportError::MissingArtifact("annotate"))?;
    let records = inputs.records.ok_or(ReportError::MissingArtifact("ingest"))?;
    let resolved = net.edge_count() > 0;
    let partition = match inputs.partition {
        Some(p) => Some(p),
        None if resolved => return Err(ReportError::MissingArtifact("cluster")),
        None => None,
    };

    let mut md = String::from("# Citation network report\n\n## Selection\n\n");
    let _ = writeln!(
        md,
        "- Corpus: {} records, {} citations",
        sel.corpus_size, sel.total_citations
    );
    let _ = writeln!(md, "- {}", format_selection_line(sel));
    let _ = writeln!(
        md,
        "- Coverage target {}: {}",
        pct(sel.config.min_coverage),
        if sel.coverage_met { "met" } else { "not met" }
    );

    md.push_str("\n## Components\n\n");
    if !resolved {
        md.push_str("no citations resolved\n");
    } else {
        let _ = writeln!(
            md,
            "- Largest component: {} of {} nodes, {} edges",
            net.node_count(),
            comps.total_nodes(),
            net.edge_count()
        );
        let _ = writeln!(md, "- Components: {}\n", comps.sizes.len());
        md.push_str("| Size | Count |\n|---:|---:|\n");
        for (size, count) in comps.histogram().iter().rev() {
            let _ = writeln!(md, "| {size} | {count} |");
        }
    }

    let mut sidecars = Vec::new();
    if let Some(p) = partition {
        let profiles = cluster_profiles(p, annotations, inputs.vocab)?;
        md.push_str("\n## Subnetworks\n\n");
        let _ = writeln!(md, "- Clusters: {}; modularity {:.4}\n", profiles.len(), p.modularity);
        md.push_str("| Cluster | Size | Shape | Mean clinical ratio | Band | Label | Top terms |\n");
        md.push_str("|---:|---:|---|---:|---|---|---|\n");
        let mut rows = Vec::new();
        for prof in &profiles {
            let label = |id: &str| {
                inputs
                    .vocab
                    .and_then(|v| v.term(id))
                    .map(|t| t.preferred_label.clone())
                    .unwrap_or_else(|| id.to_string())
            };
            let top: Vec<String> = prof
                .term_freqs
                .iter()
                .take(PROFILE_TERMS)
                .map(|(id, n)| format!("{} ({n})", label(id)))
                .collect();
            let ratio = prof.mean_ratio.map(|r| format!("{r:.3}")).unwrap_or_else(|| "-".into());
            let band = inputs.bands.band(prof.mean_ratio);
            let shape = shape_for_cluster(Some(prof.cluster_id));
            let _ = writeln!(
                md,
                "| {} | {} | {shape} | {ratio} | {band} | {} | {} |",
                prof.cluster_id,
                prof.size,
                md_cell(&prof.top_label),
                md_cell(&top.join("; "))
            );
            rows.push(vec![
                prof.cluster_id.to_string(),
                prof.size.to_string(),
                shape.to_string(),
                prof.mean_ratio.map(|r| r.to_string()).unwrap_or_default(),
                band.to_string(),
                prof.top_label.clone(),
                top.join("; "),
            ]);
        }
        sidecars.push((
            "clusters.csv".to_string(),
            csv_bytes(
                &[
                    "cluster_id",
                    "size",
                    "shape",
                    "mean_ratio",
                    "band",
                    "label",
                    "top_terms",
                ],
                rows,
            ),
        ));
    }

    let default_syn = InstitutionSynonyms::default();
    let board = institution_leaderboard(records, inputs.institution_synonyms.unwrap_or(&default_syn));
    md.push_str("\n## Institutions\n\n");
    if board.rows.is_empty() {
        md.push_str("no affiliations recorded\n");
    } else {
        md.push_str("| Rank | Institution | Location | Papers |\n|---:|---|---|---:|\n");
        for (i, row) in board.rows.iter().take(TABLE_ROWS).enumerate() {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} |",
                i + 1,
                md_cell(&row.name),
                md_cell(&row.location),
                row.paper_count
            );
        }
    }
    let countries = country_distribution(records);
    md.push_str("\n## Countries\n\n");
    if countries.is_empty() {
        md.push_str("no affiliations recorded\n");
    } else {
        md.push_str("| Rank | Country | Papers |\n|---:|---|---:|\n");
        for (i, (c, n)) in countries.iter().take(TABLE_ROWS).enumerate() {
            let _ = writeln!(md, "| {} | {} | {n} |", i + 1, md_cell(c));
        }
    }
    sidecars.push(("institutions.csv".to_string(), board.to_csv()));
    sidecars.push(("countries.csv".to_string(), countries_to_csv(&countries)));

    Ok(Report { markdown: md, sidecars })
}
