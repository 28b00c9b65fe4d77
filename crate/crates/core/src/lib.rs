//! Offline recognition of handwritten Arabic characters.
//!
//! A word image is cut into vertical slices from right to left. Each slice
//! is matched against a database of normalized 38x50 glyph templates;
//! slices that match nothing are widened geometrically and retried. The crate also ingests glyph scans into a template database,
//! composes synthetic ground-truth words from it, and scores recognitions.

pub mod error;
pub mod eval;
pub mod imaging;
pub mod matcher;
pub mod recognizer;
pub mod sheets;
pub mod synth;
pub mod template_db;

pub use error::{Error, Result};
pub use eval::{evaluate, sweep, EvalReport, SweepRow};
pub use imaging::{BinaryImage, BoundingBox, GrayImage, Raster, Span, Threshold};
pub use matcher::{match_segment, similarity, MatchCandidate, MatchConfig, Metric, Score};
pub use recognizer::{recognize_page, recognize_word, SegmenterConfig, WordRecognition};
pub use synth::{compose_word, generate_corpus, GlyphWidths, GroundTruthWord, SynthSpec};
pub use template_db::{
    load_db, save_db, Letter, PositionForm, TemplateDatabase, TemplateEntry, WidthCategory,
};
