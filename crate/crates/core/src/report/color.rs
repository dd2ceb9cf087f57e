use std::fmt;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::annotate::{clinical_ratio, Annotation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const GRAY: Rgb = Rgb(128, 128, 128);

    /// Uppercase `#RRGGBB`.
    pub fn hex(&self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.0, self.1, self.2)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

/// Linear red (basic, 0) to blue (clinical, 1); gray when unscored.
pub fn color_for_ratio(ratio: Option<f64>) -> Result<Rgb, ReportError> {
    let Some(r) = ratio else {
        return Ok(Rgb::GRAY);
    };
    if !(0.0..=1.0).contains(&r) {
        return Err(ReportError::OutOfRange(r));
    }
    let channel = |x: f64| (255.0 * x).round() as u8;
    Ok(Rgb(channel(1.0 - r), 0, channel(r)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClinicalScore {
    pub record_id: String,
    pub ratio: Option<f64>,
    pub color: Rgb,
}

pub fn score_annotations(annotations: &[Annotation]) -> Vec<ClinicalScore> {
    annotations
        .iter()
        .map(|a| {
            let ratio = clinical_ratio(a);
            ClinicalScore {
                record_id: a.record_id.clone(),
                ratio,
                color: color_for_ratio(ratio).expect("ratios are within [0, 1]"),
            }
        })
        .collect()
}
