//! Scoring recognitions against synthetic ground truth, and parameter
//! sweeps.
//!
//! Each recognized segment is credited to the ground-truth letter whose span
//! contains the segment's midpoint, or to the nearest span when none does
//! (ties go to the earlier letter in reading order). When several segments
//! land on one letter, the most similar claim decides it (ties go to the
//! earlier segment). A letter no segment claims is unrecognized.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recognizer::{recognize_word, Outcome, SegmenterConfig, WordRecognition};
use crate::synth::GroundTruthWord;
use crate::template_db::TemplateDatabase;

/// Label used in the confusion table for letters nobody claimed.
pub const UNRECOGNIZED: &str = "?";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total_chars: usize,
    pub recognized_correct: usize,
    pub recognized_wrong: usize,
    pub unrecognized: usize,
    pub recognition_rate: f64,
    pub far: f64,
    /// truth letter -> predicted letter (or `?`) -> count
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

impl EvalReport {
    fn finish(mut self) -> Self {
        if self.total_chars > 0 {
            let n = self.total_chars as f64;
            self.recognition_rate = self.recognized_correct as f64 / n;
            self.far = self.recognized_wrong as f64 / n;
        }
        self
    }

    fn merge(mut self, other: EvalReport) -> Self {
        self.total_chars += other.total_chars;
        self.recognized_correct += other.recognized_correct;
        self.recognized_wrong += other.recognized_wrong;
        self.unrecognized += other.unrecognized;
        for (truth, row) in other.confusion {
            let mine = self.confusion.entry(truth).or_default();
            for (pred, n) in row {
                *mine.entry(pred).or_default() += n;
            }
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Index of the truth span credited with a segment whose midpoint is `mid`.
fn credited_letter(truth: &GroundTruthWord, mid: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, span) in truth.glyph_spans.iter().enumerate() {
        let d = span.distance(mid);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Scores one word. The report's rates are filled in.
pub fn score_word(truth: &GroundTruthWord, rec: &WordRecognition) -> EvalReport {
    let mut claims: Vec<Option<(f64, char)>> = vec![None; truth.letters.len()];
    for seg in &rec.segments {
        let Outcome::Recognized {
            letter, similarity, ..
        } = seg.outcome
        else {
            continue;
        };
        let Some(i) = credited_letter(truth, seg.span.midpoint()) else {
            continue;
        };
        if claims[i].is_none_or(|(s, _)| similarity > s) {
            claims[i] = Some((similarity, letter.as_char()));
        }
    }

    let mut report = EvalReport {
        total_chars: truth.letters.len(),
        ..EvalReport::default()
    };
    for (letter, claim) in truth.letters.iter().zip(claims) {
        let predicted = match claim {
            Some((_, c)) if c == letter.as_char() => {
                report.recognized_correct += 1;
                c.to_string()
            }
            Some((_, c)) => {
                report.recognized_wrong += 1;
                c.to_string()
            }
            None => {
                report.unrecognized += 1;
                UNRECOGNIZED.to_string()
            }
        };
        *report
            .confusion
            .entry(letter.to_string())
            .or_default()
            .entry(predicted)
            .or_default() += 1;
    }
    report.finish()
}

/// Scores precomputed recognitions, one per corpus word.
pub fn score(corpus: &[GroundTruthWord], recognitions: &[WordRecognition]) -> Result<EvalReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if corpus.len() != recognitions.len() {
        return Err(Error::InvalidConfig(format!(
            "{} words but {} recognitions",
            corpus.len(),
            recognitions.len()
        )));
    }
    Ok(corpus
        .iter()
        .zip(recognitions)
        .map(|(t, r)| score_word(t, r))
        .fold(EvalReport::default(), EvalReport::merge)
        .finish())
}

pub fn recognize_corpus(
    corpus: &[GroundTruthWord],
    db: &TemplateDatabase,
    cfg: &SegmenterConfig,
) -> Result<Vec<WordRecognition>> {
    corpus
        .par_iter()
        .map(|w| recognize_word(&w.image, db, cfg))
        .collect()
}

pub fn evaluate(
    corpus: &[GroundTruthWord],
    db: &TemplateDatabase,
    cfg: &SegmenterConfig,
) -> Result<EvalReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    score(corpus, &recognize_corpus(corpus, db, cfg)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Widening factor; 1.0 denotes fixed-width segmentation.
    pub factor: f64,
    pub threshold: f64,
    pub recognition_rate: f64,
    pub far: f64,
}

/// Configuration for one grid cell. A factor of exactly 1.0 selects
/// fixed-width mode (`max_widenings = 0`).
pub fn cell_config(base: &SegmenterConfig, factor: f64, threshold: f64) -> SegmenterConfig {
    let mut cfg = *base;
    cfg.matching.accept_threshold = threshold;
    if factor == 1.0 {
        cfg.max_widenings = 0;
    } else {
        cfg.scale_factor = factor;
    }
    cfg
}

/// Evaluates every (factor, threshold) pair, factor-major.
pub fn sweep(
    corpus: &[GroundTruthWord],
    db: &TemplateDatabase,
    base: &SegmenterConfig,
    factors: &[f64],
    thresholds: &[f64],
) -> Result<Vec<SweepRow>> {
    if factors.is_empty() || thresholds.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    if let Some(f) = factors.iter().find(|&&f| !(f >= 1.0 && f.is_finite())) {
        return Err(Error::InvalidConfig(format!("factor {f} below 1.0")));
    }
    let cells: Vec<(f64, f64)> = factors
        .iter()
        .flat_map(|&f| thresholds.iter().map(move |&t| (f, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(factor, threshold)| {
            let report = evaluate(corpus, db, &cell_config(base, factor, threshold))?;
            Ok(SweepRow {
                factor,
                threshold,
                recognition_rate: report.recognition_rate,
                far: report.far,
            })
        })
        .collect()
}

/// `factor,threshold,recognition_rate,far` with rates to 4 decimals.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("factor,threshold,recognition_rate,far\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.4},{:.4}",
            r.factor, r.threshold, r.recognition_rate, r.far
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{BinaryImage, Span};
    use crate::recognizer::SegmentResult;
    use crate::synth::SynthSpec;
    use crate::template_db::{Letter, PositionForm};

    fn truth(word: &str, spans: &[(usize, usize)]) -> GroundTruthWord {
        let spec = SynthSpec::from_word(word, 0).unwrap();
        let width = spans.iter().map(|s| s.1).max().unwrap();
        GroundTruthWord {
            image: BinaryImage::blank(width, 4).unwrap(),
            letters: spec.letters.clone(),
            glyph_spans: spans.iter().map(|&(a, b)| Span::new(a, b)).collect(),
            templates: vec![],
            spec,
        }
    }

    fn seg(span: (usize, usize), letter: Option<char>, similarity: f64) -> SegmentResult {
        SegmentResult {
            span: Span::new(span.0, span.1),
            cursor: 0,
            outcome: match letter {
                Some(c) => Outcome::Recognized {
                    letter: Letter::new(c).unwrap(),
                    form: PositionForm::Isolated,
                    similarity,
                    template: 0,
                    widenings: 0,
                },
                None => Outcome::Unrecognized,
            },
        }
    }

    fn rec(segments: Vec<SegmentResult>) -> WordRecognition {
        WordRecognition {
            width: 0,
            segments,
            skipped: vec![],
            text: String::new(),
        }
    }

    #[test]
    fn perfect_word() {
        let t = truth("زرع", &[(76, 114), (38, 76), (0, 38)]);
        let r = rec(vec![
            seg((76, 114), Some('ز'), 0.9),
            seg((38, 76), Some('ر'), 0.9),
            seg((0, 38), Some('ع'), 0.9),
        ]);
        let rep = score_word(&t, &r);
        assert_eq!((rep.recognition_rate, rep.far), (1.0, 0.0));
    }

    #[test]
    fn all_unrecognized() {
        let t = truth("زرع", &[(76, 114), (38, 76), (0, 38)]);
        let r = rec(vec![seg((79, 114), None, 0.0), seg((44, 79), None, 0.0)]);
        let rep = score_word(&t, &r);
        assert_eq!(
            (rep.recognition_rate, rep.far, rep.unrecognized),
            (0.0, 0.0, 3)
        );
        assert_eq!(rep.confusion["ز"]["?"], 1);
    }

    #[test]
    fn nine_right_one_wrong() {
        let letters = "بتثجحخدذرز";
        let spans: Vec<(usize, usize)> = (0..10).rev().map(|i| (i * 10, i * 10 + 10)).collect();
        let t = truth(letters, &spans);
        let mut segs: Vec<SegmentResult> = t
            .letters
            .iter()
            .zip(&spans)
            .map(|(l, &s)| seg(s, Some(l.as_char()), 0.8))
            .collect();
        segs[4] = seg(spans[4], Some('ع'), 0.8);
        let rep = score_word(&t, &rec(segs));
        assert_eq!(rep.total_chars, 10);
        assert!((rep.recognition_rate - 0.9).abs() < 1e-12);
        assert!((rep.far - 0.1).abs() < 1e-12);
        assert_eq!(rep.confusion["ح"]["ع"], 1);
    }

    #[test]
    fn midpoint_outside_spans_goes_to_nearest() {
        let t = truth("زر", &[(30, 60), (0, 20)]);
        // midpoint 24: 4 from the left glyph, 6 from the right one
        let rep = score_word(&t, &rec(vec![seg((22, 26), Some('ر'), 0.7)]));
        assert_eq!((rep.recognized_correct, rep.unrecognized), (1, 1));
    }

    #[test]
    fn best_claim_decides() {
        let t = truth("ز", &[(0, 40)]);
        let r = rec(vec![
            seg((20, 40), Some('ر'), 0.7),
            seg((0, 20), Some('ز'), 0.9),
        ]);
        assert_eq!(score_word(&t, &r).recognized_correct, 1);
        let r = rec(vec![
            seg((20, 40), Some('ر'), 0.95),
            seg((0, 20), Some('ز'), 0.9),
        ]);
        assert_eq!(score_word(&t, &r).recognized_wrong, 1);
    }

    #[test]
    fn empty_inputs() {
        let db = TemplateDatabase::new(vec![]);
        assert!(matches!(
            evaluate(&[], &db, &SegmenterConfig::default()),
            Err(Error::EmptyCorpus)
        ));
        let t = truth("ز", &[(0, 40)]);
        assert!(sweep(
            std::slice::from_ref(&t),
            &db,
            &SegmenterConfig::default(),
            &[],
            &[0.45]
        )
        .is_err());
        assert!(sweep(&[t], &db, &SegmenterConfig::default(), &[0.5], &[0.45]).is_err());
    }

    #[test]
    fn csv_format() {
        let rows = vec![
            SweepRow {
                factor: 1.0,
                threshold: 0.45,
                recognition_rate: 0.25,
                far: 1.0 / 3.0,
            },
            SweepRow {
                factor: 1.6,
                threshold: 0.45,
                recognition_rate: 0.81,
                far: 0.0,
            },
        ];
        assert_eq!(
            sweep_csv(&rows),
            "factor,threshold,recognition_rate,far\n1,0.45,0.2500,0.3333\n1.6,0.45,0.8100,0.0000\n"
        );
    }

    #[test]
    fn cell_config_fixed_row() {
        let base = SegmenterConfig::default();
        let fixed = cell_config(&base, 1.0, 0.3);
        assert_eq!(fixed.max_widenings, 0);
        assert_eq!(fixed.matching.accept_threshold, 0.3);
        assert_eq!(cell_config(&base, 1.3, 0.45).scale_factor, 1.3);
    }
}
