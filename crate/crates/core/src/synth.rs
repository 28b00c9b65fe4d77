//! Ground-truth word images composed from database glyphs.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`)
//! and is consumed in a fixed order so corpora are reproducible:
//!
//! 1. for each letter in reading order: one draw picks the glyph among the
//!    letter's entries (in database order), then one draw picks the vertical
//!    offset in `[-jitter, +jitter]`;
//! 2. when `noise_flip_rate > 0`, one draw per pixel in row-major order; the
//!    pixel flips when the draw is below `rate * 2^64`.
//!
//! Uniform integers in `[0, n)` use rejection sampling on raw `u64` draws
//! (reject values at or above `2^64 - 2^64 mod n`, then take `value mod n`).

use std::fs;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, Span};
use crate::template_db::{parse_word, Letter, TemplateDatabase, WidthCategory, GLYPH_WIDTH};

/// Words used as the default test set.
pub const DEFAULT_WORDS: [&str; 3] = ["شمس", "جامعة", "زرع"];

/// Smallest allowed `gap_px` (i.e. the largest overlap).
pub const MIN_GAP: i32 = -5;

/// Rendered width of a glyph inside a word.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GlyphWidths {
    /// Glyphs are placed at their stored 38-pixel width.
    #[default]
    Template,
    /// Glyphs are stretched horizontally to a per-category width.
    ByCategory {
        small: usize,
        medium: usize,
        large: usize,
    },
}

impl GlyphWidths {
    /// 35, 56 and 90 pixels for small, medium and large letters.
    pub const CATEGORY: GlyphWidths = GlyphWidths::ByCategory {
        small: 35,
        medium: 56,
        large: 90,
    };

    pub fn width_for(&self, category: WidthCategory) -> usize {
        match *self {
            GlyphWidths::Template => GLYPH_WIDTH,
            GlyphWidths::ByCategory {
                small,
                medium,
                large,
            } => match category {
                WidthCategory::Small => small,
                WidthCategory::Medium => medium,
                WidthCategory::Large => large,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Letters in reading order; the first is drawn rightmost.
    pub letters: Vec<Letter>,
    /// Blank columns between neighbouring glyphs; negative values overlap.
    pub gap_px: i32,
    pub jitter_px: u32,
    pub noise_flip_rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub widths: GlyphWidths,
}

impl SynthSpec {
    pub fn new(letters: Vec<Letter>, seed: u64) -> Self {
        Self {
            letters,
            gap_px: 0,
            jitter_px: 0,
            noise_flip_rate: 0.0,
            seed,
            widths: GlyphWidths::Template,
        }
    }

    pub fn from_word(word: &str, seed: u64) -> Result<Self> {
        Ok(Self::new(parse_word(word)?, seed))
    }

    pub fn validate(&self) -> Result<()> {
        if self.letters.is_empty() {
            return Err(Error::InvalidConfig("word has no letters".into()));
        }
        if self.gap_px < MIN_GAP {
            return Err(Error::InvalidConfig(format!(
                "gap_px {} below {MIN_GAP}",
                self.gap_px
            )));
        }
        if !(0.0..0.5).contains(&self.noise_flip_rate) {
            return Err(Error::InvalidConfig(format!(
                "noise_flip_rate {} outside [0, 0.5)",
                self.noise_flip_rate
            )));
        }
        if let GlyphWidths::ByCategory {
            small,
            medium,
            large,
        } = self.widths
        {
            let min = small.min(medium).min(large);
            if min == 0 || (min as i64) <= -(self.gap_px as i64) {
                return Err(Error::InvalidConfig(format!(
                    "glyph widths {small}/{medium}/{large} too narrow"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthWord {
    pub image: BinaryImage,
    pub letters: Vec<Letter>,
    /// Column range of each letter's glyph, in reading (right-to-left) order.
    pub glyph_spans: Vec<Span>,
    /// Database indices of the glyphs used.
    pub templates: Vec<usize>,
    pub spec: SynthSpec,
}

/// Horizontal nearest-neighbour stretch to `width` columns. Destination
/// column `j` reads source column `ceil((j + 1) * src / width) - 1`, which
/// makes it a right inverse of [`resize_nearest`] when widening: resizing
/// the result back to the source width returns the source exactly.
pub fn stretch_columns(glyph: &BinaryImage, width: usize) -> Result<BinaryImage> {
    let src = glyph.width();
    BinaryImage::from_fn(width, glyph.height(), |j, y| {
        let x = ((j + 1) * src).div_ceil(width) - 1;
        glyph.get(x, y)
    })
}

fn uniform(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    debug_assert!(n > 0);
    let zone = u64::MAX - (u64::MAX % n + 1) % n;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % n;
        }
    }
}

fn flip_cutoff(rate: f64) -> u64 {
    // 2^64 * rate, rate < 0.5 so this never saturates
    (rate * 18_446_744_073_709_551_616.0) as u64
}

pub fn compose_word(spec: &SynthSpec, db: &TemplateDatabase) -> Result<GroundTruthWord> {
    spec.validate()?;
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let jitter = spec.jitter_px as i64;
    let mut picks = Vec::with_capacity(spec.letters.len());
    for &letter in &spec.letters {
        let candidates = db.indices_for(letter);
        if candidates.is_empty() {
            return Err(Error::MissingLetter(letter.as_char()));
        }
        let index = candidates[uniform(&mut rng, candidates.len() as u64) as usize];
        let dy = uniform(&mut rng, 2 * jitter as u64 + 1) as i64 - jitter;
        let entry = &db.entries()[index];
        let glyph = match spec.widths.width_for(entry.category()) {
            GLYPH_WIDTH => entry.glyph().clone(),
            w => stretch_columns(entry.glyph(), w)?,
        };
        picks.push((index, glyph, dy));
    }

    let gap = spec.gap_px as i64;
    let total_width: i64 =
        picks.iter().map(|p| p.1.width() as i64).sum::<i64>() + gap * (picks.len() as i64 - 1);
    let glyph_height = picks.iter().map(|p| p.1.height()).max().unwrap_or(0);
    let width = total_width as usize;
    let height = glyph_height + 2 * spec.jitter_px as usize;

    let mut image = BinaryImage::blank(width, height)?;
    let mut glyph_spans = Vec::with_capacity(picks.len());
    let mut right = width as i64;
    for (_, glyph, dy) in &picks {
        let left = right - glyph.width() as i64;
        let top = (jitter + dy) as usize;
        for y in 0..glyph.height() {
            for x in 0..glyph.width() {
                if glyph.get(x, y) {
                    image.set(left as usize + x, top + y, true);
                }
            }
        }
        glyph_spans.push(Span::new(left as usize, right as usize));
        right = left - gap;
    }

    if spec.noise_flip_rate > 0.0 {
        let cutoff = flip_cutoff(spec.noise_flip_rate);
        for y in 0..height {
            for x in 0..width {
                if rng.next_u64() < cutoff {
                    image.set(x, y, !image.get(x, y));
                }
            }
        }
    }

    Ok(GroundTruthWord {
        image,
        letters: spec.letters.clone(),
        glyph_spans,
        templates: picks.iter().map(|p| p.0).collect(),
        spec: spec.clone(),
    })
}

/// Composes every spec, preserving order. Errors carry the spec index.
pub fn generate_corpus(specs: &[SynthSpec], db: &TemplateDatabase) -> Result<Vec<GroundTruthWord>> {
    specs
        .par_iter()
        .enumerate()
        .map(|(index, spec)| {
            compose_word(spec, db).map_err(|e| Error::Spec {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Parameters for drawing random word specs.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomWords {
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub min_gap: i32,
    pub max_gap: i32,
    pub jitter_px: u32,
    pub noise_flip_rate: f64,
    pub widths: GlyphWidths,
    pub seed: u64,
}

impl Default for RandomWords {
    fn default() -> Self {
        Self {
            count: 100,
            min_len: 3,
            max_len: 5,
            min_gap: 0,
            max_gap: 4,
            jitter_px: 0,
            noise_flip_rate: 0.0,
            widths: GlyphWidths::Template,
            seed: 0,
        }
    }
}

/// Draws word specs over the letters present in `db`. Each word gets its own
/// length, gap and seed from a generator seeded with `params.seed`.
pub fn random_specs(params: &RandomWords, db: &TemplateDatabase) -> Result<Vec<SynthSpec>> {
    if params.min_len == 0 || params.min_len > params.max_len || params.min_gap > params.max_gap {
        return Err(Error::InvalidConfig("empty length or gap range".into()));
    }
    let alphabet: Vec<Letter> = db.letter_counts().into_keys().collect();
    if alphabet.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut specs = Vec::with_capacity(params.count);
    for _ in 0..params.count {
        let len = params.min_len
            + uniform(&mut rng, (params.max_len - params.min_len + 1) as u64) as usize;
        let letters = (0..len)
            .map(|_| alphabet[uniform(&mut rng, alphabet.len() as u64) as usize])
            .collect();
        let gap_range = (params.max_gap - params.min_gap + 1) as u64;
        let gap_px = params.min_gap + uniform(&mut rng, gap_range) as i32;
        specs.push(SynthSpec {
            letters,
            gap_px,
            jitter_px: params.jitter_px,
            noise_flip_rate: params.noise_flip_rate,
            seed: rng.next_u64(),
            widths: params.widths,
        });
    }
    Ok(specs)
}

/// Specs for [`DEFAULT_WORDS`], seeded `seed`, `seed + 1`, ...
pub fn default_specs(seed: u64) -> Vec<SynthSpec> {
    DEFAULT_WORDS
        .iter()
        .enumerate()
        .map(|(i, w)| {
            SynthSpec::from_word(w, seed.wrapping_add(i as u64)).expect("built-in words parse")
        })
        .collect()
}

/// The evaluation corpus: [`DEFAULT_WORDS`] with gaps 0, 2 and 4, followed
/// by 100 random 3 to 5 letter words with gaps in `[0, 4]`. All glyphs are
/// rendered at [`GlyphWidths::CATEGORY`], without jitter or noise.
pub fn benchmark_specs(db: &TemplateDatabase, seed: u64) -> Result<Vec<SynthSpec>> {
    let mut specs = default_specs(seed);
    for (i, spec) in specs.iter_mut().enumerate() {
        spec.gap_px = 2 * i as i32;
        spec.widths = GlyphWidths::CATEGORY;
    }
    specs.extend(random_specs(
        &RandomWords {
            widths: GlyphWidths::CATEGORY,
            seed,
            ..RandomWords::default()
        },
        db,
    )?);
    Ok(specs)
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthRecord {
    index: usize,
    letters: Vec<Letter>,
    spans: Vec<Span>,
    spec: SynthSpec,
}

/// Writes `words/<n>.png` and `truth.json` under `dir`.
pub fn save_corpus(corpus: &[GroundTruthWord], dir: &Path) -> Result<()> {
    let words_dir = dir.join("words");
    fs::create_dir_all(&words_dir).map_err(|e| Error::io(&words_dir, e))?;
    let mut records = Vec::with_capacity(corpus.len());
    for (index, word) in corpus.iter().enumerate() {
        word.image
            .save_png(&words_dir.join(format!("{index}.png")))?;
        records.push(TruthRecord {
            index,
            letters: word.letters.clone(),
            spans: word.glyph_spans.clone(),
            spec: word.spec.clone(),
        });
    }
    let path = dir.join("truth.json");
    let mut json = serde_json::to_string_pretty(&records).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

/// Reads a corpus written by [`save_corpus`]. Template indices are not
/// stored on disk and come back empty.
pub fn load_corpus(dir: &Path) -> Result<Vec<GroundTruthWord>> {
    let path = dir.join("truth.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let records: Vec<TruthRecord> =
        serde_json::from_str(&text).map_err(|source| Error::Json { path, source })?;
    records
        .into_iter()
        .map(|r| {
            let png = dir.join("words").join(format!("{}.png", r.index));
            let luma = image::open(&png)
                .map_err(|source| Error::Decode {
                    path: png.clone(),
                    source,
                })?
                .to_luma8();
            let (w, h) = luma.dimensions();
            let image = BinaryImage::new(
                w as usize,
                h as usize,
                luma.pixels().map(|p| p.0[0] < 128).collect(),
            )?;
            if r.letters.len() != r.spans.len() {
                return Err(Error::InvalidConfig(format!(
                    "truth record {}: {} letters but {} spans",
                    r.index,
                    r.letters.len(),
                    r.spans.len()
                )));
            }
            Ok(GroundTruthWord {
                image,
                letters: r.letters,
                glyph_spans: r.spans,
                templates: Vec::new(),
                spec: r.spec,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1u64, 2, 3, 7, 1000] {
            for _ in 0..200 {
                assert!(uniform(&mut rng, n) < n);
            }
        }
    }

    #[test]
    fn flip_cutoff_scales() {
        assert_eq!(flip_cutoff(0.0), 0);
        assert_eq!(flip_cutoff(0.25), 1 << 62);
    }

    #[test]
    fn default_words_letter_counts() {
        let counts: Vec<usize> = default_specs(0).iter().map(|s| s.letters.len()).collect();
        assert_eq!(counts, vec![3, 5, 3]);
    }

    #[test]
    fn spec_validation() {
        let mut s = SynthSpec::from_word("زرع", 1).unwrap();
        assert!(s.validate().is_ok());
        s.gap_px = -6;
        assert!(s.validate().is_err());
        s.gap_px = 0;
        s.noise_flip_rate = 0.5;
        assert!(s.validate().is_err());
        s.noise_flip_rate = 0.0;
        s.letters.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn stretch_is_undone_by_resize() {
        let glyph = BinaryImage::from_fn(38, 50, |x, y| (x * 7 + y * 3) % 11 < 4).unwrap();
        for w in [38, 39, 56, 90, 143] {
            let wide = stretch_columns(&glyph, w).unwrap();
            assert_eq!(wide.width(), w);
            assert_eq!(
                crate::imaging::resize_nearest(&wide, 38, 50).unwrap(),
                glyph
            );
        }
    }
}
