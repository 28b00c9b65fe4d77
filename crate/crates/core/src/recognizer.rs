//! Right-to-left segmentation with adaptive widening.
//!
//! A word is cut into vertical slices starting at its right edge. Each slice
//! is cropped to its ink and matched against the template database. When no
//! template is accepted the slice is widened to `round(base * factor^k)` for
//! `k = 1..=max_widenings`; the first accepted width wins and the cursor
//! advances by that raw (uncropped) width. If every width fails the base
//! slice is reported as unrecognized and the cursor advances by the base
//! width. Slices that carry no ink are skipped without producing a result.
//!
//! With `skip_blank_columns` (the default) blank columns at the cursor are
//! stepped over before each slice is cut, so a slice always starts at ink.
//! This keeps the cursor aligned with letter boundaries after inter-letter
//! gaps. Every column of the word ends up in exactly one segment or skipped
//! span.
//!
//! With the defaults the widening ladder is 35, 56, 90, 143 pixels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{content_box, extract_words, BinaryImage, Span};
use crate::matcher::{match_segment, MatchConfig};
use crate::template_db::{Letter, PositionForm, TemplateDatabase};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    pub base_width: usize,
    pub scale_factor: f64,
    pub max_widenings: usize,
    pub matching: MatchConfig,
    #[serde(default = "default_true")]
    pub skip_blank_columns: bool,
}

fn default_true() -> bool {
    true
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            base_width: 35,
            scale_factor: 1.6,
            max_widenings: 3,
            matching: MatchConfig::default(),
            skip_blank_columns: true,
        }
    }
}

impl SegmenterConfig {
    /// Fixed-width mode: no widening.
    pub fn fixed(base_width: usize, matching: MatchConfig) -> Self {
        Self {
            base_width,
            max_widenings: 0,
            matching,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_width == 0 {
            return Err(Error::InvalidConfig("base_width must be at least 1".into()));
        }
        // The factor is irrelevant when nothing is ever widened.
        if self.max_widenings > 0 && !(self.scale_factor > 1.0 && self.scale_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "scale_factor {} must be > 1",
                self.scale_factor
            )));
        }
        self.matching.validate()
    }

    /// Segment widths tried at one cursor position, `k = 0..=max_widenings`.
    pub fn ladder(&self) -> Vec<usize> {
        (0..=self.max_widenings)
            .map(|k| {
                let w = (self.base_width as f64 * self.scale_factor.powi(k as i32)).round();
                w.max(1.0) as usize
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Recognized {
        letter: Letter,
        form: PositionForm,
        similarity: f64,
        /// Database index of the accepted template.
        template: usize,
        /// Number of widenings needed (0 = base width).
        widenings: usize,
    },
    Unrecognized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentResult {
    /// Raw columns of the word covered by this segment, before cropping.
    pub span: Span,
    /// Distance of the segment's right edge from the word's right edge.
    pub cursor: usize,
    pub outcome: Outcome,
}

impl SegmentResult {
    pub fn letter(&self) -> Option<Letter> {
        match self.outcome {
            Outcome::Recognized { letter, .. } => Some(letter),
            Outcome::Unrecognized => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordRecognition {
    pub width: usize,
    /// Results in right-to-left order.
    pub segments: Vec<SegmentResult>,
    /// Blank slices that were stepped over without a result.
    pub skipped: Vec<Span>,
    /// One letter per recognized segment, `?` per unrecognized one.
    pub text: String,
}

impl WordRecognition {
    fn from_parts(width: usize, segments: Vec<SegmentResult>, skipped: Vec<Span>) -> Self {
        let text = segments
            .iter()
            .map(|s| s.letter().map_or('?', Letter::as_char))
            .collect();
        Self {
            width,
            segments,
            skipped,
            text,
        }
    }
}

/// Raw columns `[w - cursor - w*, w - cursor)` with `w* = min(width, w - cursor)`.
pub fn segment_span(word_width: usize, cursor: usize, width: usize) -> Result<Span> {
    if cursor >= word_width {
        return Err(Error::CursorExhausted {
            cursor,
            width: word_width,
        });
    }
    if width == 0 {
        return Err(Error::InvalidConfig(
            "segment width must be at least 1".into(),
        ));
    }
    let end = word_width - cursor;
    let w = width.min(end);
    Ok(Span::new(end - w, end))
}

/// Cuts the slice at `cursor` and crops it to its ink. Returns the raw span
/// and the cropped image, or `None` for the image when the slice is blank.
pub fn next_segment(
    word: &BinaryImage,
    cursor: usize,
    width: usize,
) -> Result<(Span, Option<BinaryImage>)> {
    let span = segment_span(word.width(), cursor, width)?;
    let slice = word.columns(span.range())?;
    let cropped = match content_box(&slice) {
        Some(b) => Some(slice.sub_image(b)?),
        None => None,
    };
    Ok((span, cropped))
}

pub fn recognize_word(
    word: &BinaryImage,
    db: &TemplateDatabase,
    cfg: &SegmenterConfig,
) -> Result<WordRecognition> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if !word.has_ink() {
        return Err(Error::NoContent);
    }

    let ladder = cfg.ladder();
    let width = word.width();
    let mut segments = Vec::new();
    let mut skipped = Vec::new();
    let mut cursor = 0;

    while cursor < width {
        if cfg.skip_blank_columns && !word.column_has_ink(width - 1 - cursor) {
            let start = cursor;
            while cursor < width && !word.column_has_ink(width - 1 - cursor) {
                cursor += 1;
            }
            skipped.push(Span::new(width - cursor, width - start));
            continue;
        }
        let (base_span, base_crop) = next_segment(word, cursor, ladder[0])?;
        let Some(base_crop) = base_crop else {
            skipped.push(base_span);
            cursor += base_span.width();
            continue;
        };

        let mut accepted = None;
        let mut last_width = 0;
        for (k, &w) in ladder.iter().enumerate() {
            let (span, crop) = if k == 0 {
                (base_span, Some(base_crop.clone()))
            } else {
                next_segment(word, cursor, w)?
            };
            // Clipped at the word's left edge: wider retries see the same slice.
            if span.width() == last_width {
                break;
            }
            last_width = span.width();
            let crop = crop.expect("a widened slice contains the inked base slice");
            if let Some(best) = match_segment(&crop, db, &cfg.matching)?.first() {
                accepted = Some((
                    span,
                    Outcome::Recognized {
                        letter: best.entry.letter(),
                        form: best.entry.form(),
                        similarity: best.similarity,
                        template: best.index,
                        widenings: k,
                    },
                ));
                break;
            }
        }

        let (span, outcome) = accepted.unwrap_or((base_span, Outcome::Unrecognized));
        segments.push(SegmentResult {
            span,
            cursor,
            outcome,
        });
        cursor += span.width();
    }

    Ok(WordRecognition::from_parts(width, segments, skipped))
}

/// Extracts the words of a page and recognizes each, in right-to-left order.
/// A failure on one word does not stop the others.
pub fn recognize_page(
    page: &BinaryImage,
    db: &TemplateDatabase,
    cfg: &SegmenterConfig,
    gap_px: usize,
) -> Result<Vec<Result<WordRecognition>>> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let words = extract_words(page, gap_px)?;
    Ok(words
        .par_iter()
        .map(|w| recognize_word(w, db, cfg))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ladder() {
        assert_eq!(SegmenterConfig::default().ladder(), vec![35, 56, 90, 143]);
        let c13 = SegmenterConfig {
            scale_factor: 1.3,
            ..SegmenterConfig::default()
        };
        assert_eq!(c13.ladder(), vec![35, 46, 59, 77]);
        assert_eq!(
            SegmenterConfig::fixed(35, MatchConfig::default()).ladder(),
            vec![35]
        );
    }

    #[test]
    fn config_validation() {
        assert!(SegmenterConfig::default().validate().is_ok());
        let bad = SegmenterConfig {
            scale_factor: 1.0,
            ..SegmenterConfig::default()
        };
        assert!(bad.validate().is_err());
        // factor is unused in fixed mode
        assert!(SegmenterConfig {
            max_widenings: 0,
            ..bad
        }
        .validate()
        .is_ok());
        let zero = SegmenterConfig {
            base_width: 0,
            ..SegmenterConfig::default()
        };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn span_from_right_edge() {
        assert_eq!(segment_span(105, 0, 35).unwrap(), Span::new(70, 105));
        assert_eq!(segment_span(105, 35, 35).unwrap(), Span::new(35, 70));
        assert_eq!(segment_span(20, 0, 35).unwrap(), Span::new(0, 20));
        assert!(matches!(
            segment_span(20, 20, 35),
            Err(Error::CursorExhausted { .. })
        ));
    }

    #[test]
    fn next_segment_crops() {
        let word = BinaryImage::from_ascii(&["......", "..#...", "...#.."]).unwrap();
        let (span, crop) = next_segment(&word, 1, 4).unwrap();
        assert_eq!(span, Span::new(1, 5));
        assert_eq!(
            crop.unwrap(),
            BinaryImage::from_ascii(&["#.", ".#"]).unwrap()
        );
        let (_, blank) = next_segment(&word, 0, 1).unwrap();
        assert!(blank.is_none());
    }

    #[test]
    fn blank_columns_are_skipped() {
        let glyph = BinaryImage::from_fn(38, 50, |x, y| x % 5 == 0 || y == 30).unwrap();
        let db = TemplateDatabase::new(vec![crate::template_db::TemplateEntry::new(
            glyph.clone(),
            Letter::new('ب').unwrap(),
            PositionForm::Isolated,
            "t",
        )
        .unwrap()]);
        // 38-wide glyph, then 7 blank columns on the right
        let word = BinaryImage::from_fn(45, 50, |x, y| x < 38 && glyph.get(x, y)).unwrap();
        let rec = recognize_word(&word, &db, &SegmenterConfig::default()).unwrap();
        assert_eq!(rec.skipped, vec![Span::new(38, 45)]);
        assert_eq!(rec.segments[0].cursor, 7);
        assert_eq!(rec.segments[0].span.end, 38);

        let plain = SegmenterConfig {
            skip_blank_columns: false,
            ..SegmenterConfig::default()
        };
        let rec = recognize_word(&word, &db, &plain).unwrap();
        assert!(rec.skipped.is_empty());
        assert_eq!(rec.segments[0].span.end, 45);
    }
}
