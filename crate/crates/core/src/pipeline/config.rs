use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::annotate::CountMode;
use crate::ingest::InputFormat;
use crate::report::RatioBands;
use crate::selection::{SelectionConfig, TiePolicy};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    format: Option<String>,
    query: Option<PathBuf>,
    fraction: Option<f64>,
    min_coverage: Option<f64>,
    ties: Option<String>,
    seed: Option<u64>,
    resolution: Option<f64>,
    count: Option<String>,
    basic_below: Option<f64>,
    clinical_above: Option<f64>,
    vocab: Option<PathBuf>,
    prefixes: Option<PathBuf>,
    journal_synonyms: Option<PathBuf>,
    institution_synonyms: Option<PathBuf>,
    timings: Option<bool>,
}

/// Every knob of a run. Resource paths are absent when the bundled
/// defaults apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(serialize_with = "ser_format")]
    pub format: InputFormat,
    pub query: Option<PathBuf>,
    pub selection: SelectionConfig,
    pub seed: u64,
    pub resolution: f64,
    pub count: CountMode,
    pub bands: RatioBands,
    pub vocab: Option<PathBuf>,
    pub prefixes: Option<PathBuf>,
    pub journal_synonyms: Option<PathBuf>,
    pub institution_synonyms: Option<PathBuf>,
    /// Record wall-clock stage timings in the manifest. Off by default so
    /// reruns stay byte-identical.
    pub timings: bool,
}

fn ser_format<S: serde::Serializer>(f: &InputFormat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(format_name(*f))
}

pub(crate) fn format_name(f: InputFormat) -> &'static str {
    match f {
        InputFormat::Wos => "wos",
        InputFormat::Json => "json",
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            format: InputFormat::Wos,
            query: None,
            selection: SelectionConfig::default(),
            seed: 42,
            resolution: 1.0,
            count: CountMode::Unique,
            bands: RatioBands::default(),
            vocab: None,
            prefixes: None,
            journal_synonyms: None,
            institution_synonyms: None,
            timings: false,
        }
    }
}

impl RunConfig {
    /// Parses the flat TOML config. Relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let mut cfg = RunConfig::default();
        let resolve = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
        if let Some(f) = raw.format {
            cfg.format = f
                .parse()
                .map_err(|e: String| PipelineError::Config(format!("format: {e}")))?;
        }
        cfg.query = resolve(raw.query);
        if let Some(f) = raw.fraction {
            cfg.selection.fraction = f;
        }
        if let Some(c) = raw.min_coverage {
            cfg.selection.min_coverage = c;
        }
        if let Some(t) = raw.ties {
            cfg.selection.tie_policy = t
                .parse::<TiePolicy>()
                .map_err(|e| PipelineError::Config(format!("ties: {e}")))?;
        }
        if let Some(s) = raw.seed {
            cfg.seed = s;
        }
        if let Some(r) = raw.resolution {
            cfg.resolution = r;
        }
        if let Some(c) = raw.count {
            cfg.count = c
                .parse()
                .map_err(|e: String| PipelineError::Config(format!("count: {e}")))?;
        }
        if let Some(b) = raw.basic_below {
            cfg.bands.basic_below = b;
        }
        if let Some(b) = raw.clinical_above {
            cfg.bands.clinical_above = b;
        }
        cfg.vocab = resolve(raw.vocab);
        cfg.prefixes = resolve(raw.prefixes);
        cfg.journal_synonyms = resolve(raw.journal_synonyms);
        cfg.institution_synonyms = resolve(raw.institution_synonyms);
        cfg.timings = raw.timings.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.selection
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        validate_resolution(self.resolution)?;
        validate_bands(&self.bands)
    }
}

pub fn validate_resolution(r: f64) -> Result<(), PipelineError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(PipelineError::Config(format!("resolution must be positive, got {r}")));
    }
    Ok(())
}

pub fn validate_bands(b: &RatioBands) -> Result<(), PipelineError> {
    if !(0.0 <= b.basic_below && b.basic_below <= b.clinical_above && b.clinical_above <= 1.0) {
        return Err(PipelineError::Config(format!(
            "bands need 0 <= basic_below <= clinical_above <= 1, got {} and {}",
            b.basic_below, b.clinical_above
        )));
    }
    Ok(())
}
