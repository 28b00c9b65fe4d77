//! Binary image similarity and threshold-gated template lookup.
//!
//! Segments and templates are compared in a common 38x50 frame. Two scores
//! are available:
//!
//! * [`Metric::InkOverlap`] (default): ink pixels present in both images over
//!   ink pixels present in either. Background is ignored, so a thin stroke
//!   cannot reach the threshold by agreeing on empty paper.
//! * [`Metric::PixelAgreement`]: the fraction of the 1900 positions on which
//!   both images agree, ink or paper. On sparse handwriting this is dominated
//!   by shared background and rarely falls below typical thresholds.
//!
//! [`similarity`] always computes pixel agreement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{resize_nearest, BinaryImage};
use crate::template_db::{TemplateDatabase, TemplateEntry, GLYPH_AREA, GLYPH_HEIGHT, GLYPH_WIDTH};

/// Acceptance band for similarities. With no upper bound a candidate is
/// accepted when `similarity >= accept_threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub accept_threshold: f64,
    pub upper_threshold: Option<f64>,
    #[serde(default)]
    pub metric: Metric,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PixelAgreement,
    #[default]
    InkOverlap,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ink_overlap" | "ink-overlap" => Ok(Metric::InkOverlap),
            "pixel_agreement" | "pixel-agreement" => Ok(Metric::PixelAgreement),
            _ => Err(Error::InvalidConfig(format!("unknown metric {s:?}"))),
        }
    }
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            accept_threshold: 0.45,
            upper_threshold: None,
            metric: Metric::InkOverlap,
        }
    }
}

impl MatchConfig {
    pub fn with_threshold(accept_threshold: f64) -> Self {
        Self {
            accept_threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.accept_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "accept_threshold {t} outside (0, 1]"
            )));
        }
        if let Some(u) = self.upper_threshold {
            if !(t <= u && u <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "upper_threshold {u} outside [{t}, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Band test on the exact counts, so that e.g. 855/1900 is accepted at
    /// 0.45 regardless of float rounding.
    pub fn accepts(&self, score: Score) -> bool {
        const EPS: f64 = 1e-9;
        let n = score.matched as f64;
        let total = score.total as f64;
        n >= self.accept_threshold * total - EPS
            && self.upper_threshold.is_none_or(|u| n <= u * total + EPS)
    }
}

/// Similarity as an exact ratio `matched / total`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Score {
    pub matched: usize,
    pub total: usize,
}

impl Score {
    pub fn value(self) -> f64 {
        self.matched as f64 / self.total as f64
    }

    /// Orders by value without rounding.
    fn cmp_value(self, other: Score) -> std::cmp::Ordering {
        (self.matched as u128 * other.total as u128)
            .cmp(&(other.matched as u128 * self.total as u128))
    }
}

impl Metric {
    /// Scores two images already in the 38x50 frame.
    pub fn score(self, a: &BinaryImage, b: &BinaryImage) -> Score {
        match self {
            Metric::PixelAgreement => Score {
                matched: a.agreement(b),
                total: GLYPH_AREA,
            },
            Metric::InkOverlap => {
                let (mut both, mut either) = (0, 0);
                for (&p, &q) in a.pixels().iter().zip(b.pixels()) {
                    both += (p && q) as usize;
                    either += (p || q) as usize;
                }
                if either == 0 {
                    Score {
                        matched: 1,
                        total: 1,
                    }
                } else {
                    Score {
                        matched: both,
                        total: either,
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MatchCandidate<'db> {
    pub entry: &'db TemplateEntry,
    /// Position of `entry` in the database.
    pub index: usize,
    pub score: Score,
    pub similarity: f64,
}

/// Brings an image into the common 38x50 comparison frame.
pub fn normalize(image: &BinaryImage) -> BinaryImage {
    resize_nearest(image, GLYPH_WIDTH, GLYPH_HEIGHT).expect("glyph frame is non-empty")
}

/// Count of agreeing positions after both images are normalized.
pub fn agreement(a: &BinaryImage, b: &BinaryImage) -> usize {
    normalize(a).agreement(&normalize(b))
}

/// Fraction of the 1900 positions of the 38x50 frame on which the two
/// normalized images agree (ink on both or paper on both).
pub fn similarity(a: &BinaryImage, b: &BinaryImage) -> f64 {
    agreement(a, b) as f64 / GLYPH_AREA as f64
}

/// Ink pixels shared by both normalized images over ink pixels in either.
pub fn ink_overlap(a: &BinaryImage, b: &BinaryImage) -> f64 {
    Metric::InkOverlap
        .score(&normalize(a), &normalize(b))
        .value()
}

/// Scores `segment` against every template and returns those inside the
/// acceptance band, best first. Equal similarities keep database order, so
/// permuting the database preserves the candidate set but not necessarily
/// the order of ties. An empty result means the segment is unrecognized.
pub fn match_segment<'db>(
    segment: &BinaryImage,
    db: &'db TemplateDatabase,
    cfg: &MatchConfig,
) -> Result<Vec<MatchCandidate<'db>>> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let probe = normalize(segment);
    let mut out: Vec<MatchCandidate<'db>> = db
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(index, entry)| {
            let score = cfg.metric.score(&probe, entry.glyph());
            cfg.accepts(score).then(|| MatchCandidate {
                entry,
                index,
                score,
                similarity: score.value(),
            })
        })
        .collect();
    // stable sort keeps database order among ties
    out.sort_by(|a, b| b.score.cmp_value(a.score));
    Ok(out)
}
