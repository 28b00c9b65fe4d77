//! Normalized glyph templates and their on-disk database.
//!
//! A database directory holds `manifest.json` and a `glyphs/` folder of
//! 38x50 PNG files named `<codepoint>_<form>_<n>.png`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{binarize, crop_to_content, resize_nearest, BinaryImage, Raster, Threshold};

pub const GLYPH_WIDTH: usize = 38;
pub const GLYPH_HEIGHT: usize = 50;
pub const GLYPH_AREA: usize = GLYPH_WIDTH * GLYPH_HEIGHT;

pub const MANIFEST_VERSION: u32 = 1;
pub const RESOLUTION_PPI: u32 = 100;

/// The 28 base letters, in alphabet order.
pub const ALPHABET: [char; 28] = [
    'ا', 'ب', 'ت', 'ث', 'ج', 'ح', 'خ', 'د', 'ذ', 'ر', 'ز', 'س', 'ش', 'ص', 'ض', 'ط', 'ظ', 'ع', 'غ',
    'ف', 'ق', 'ك', 'ل', 'م', 'ن', 'ه', 'و', 'ي',
];

const TATWEEL: char = '\u{0640}';

/// One of the 28 Arabic base letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(char);

impl Letter {
    pub fn new(c: char) -> Result<Self> {
        let c = match c {
            // hamza-carrying and madda alif share the base alif template
            'أ' | 'إ' | 'آ' => 'ا',
            'ة' => 'ت',
            'ى' => 'ي',
            c => c,
        };
        if ALPHABET.contains(&c) {
            Ok(Letter(c))
        } else {
            Err(Error::UnknownLetter(c.to_string()))
        }
    }

    pub fn as_char(self) -> char {
        self.0
    }

    pub fn codepoint(self) -> u32 {
        self.0 as u32
    }

    pub fn all() -> impl Iterator<Item = Letter> {
        ALPHABET.iter().map(|&c| Letter(c))
    }

    pub fn width_category(self) -> WidthCategory {
        match self.0 {
            'ا' | 'ب' | 'ت' | 'ث' => WidthCategory::Small,
            'ج' | 'ح' | 'خ' | 'د' | 'ذ' | 'ر' | 'ز' | 'س' | 'ش' => WidthCategory::Medium,
            _ => WidthCategory::Large,
        }
    }
}

impl FromStr for Letter {
    type Err = Error;

    /// Accepts the letter itself (optionally with tatweel, as in `هـ`) or a
    /// `U+XXXX` codepoint.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(hex) = t.strip_prefix("U+").or_else(|| t.strip_prefix("u+")) {
            let c = u32::from_str_radix(hex, 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| Error::UnknownLetter(s.to_string()))?;
            return Letter::new(c);
        }
        let mut chars = t.chars().filter(|&c| c != TATWEEL);
        match (chars.next(), chars.next()) {
            (Some(c), None) => Letter::new(c),
            _ => Err(Error::UnknownLetter(s.to_string())),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Letter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a word into letters, ignoring whitespace and tatweel.
pub fn parse_word(word: &str) -> Result<Vec<Letter>> {
    word.chars()
        .filter(|c| !c.is_whitespace() && *c != TATWEEL)
        .map(Letter::new)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionForm {
    Isolated,
    Initial,
    Medial,
    Final,
}

impl PositionForm {
    pub const ALL: [PositionForm; 4] = [
        PositionForm::Isolated,
        PositionForm::Initial,
        PositionForm::Medial,
        PositionForm::Final,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PositionForm::Isolated => "isolated",
            PositionForm::Initial => "initial",
            PositionForm::Medial => "medial",
            PositionForm::Final => "final",
        }
    }
}

impl FromStr for PositionForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PositionForm::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown position form {s:?}")))
    }
}

impl fmt::Display for PositionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthCategory {
    Small,
    Medium,
    Large,
}

/// Width class of a letter. Total over the 28-letter alphabet.
pub fn width_category(letter: char) -> Result<WidthCategory> {
    if !ALPHABET.contains(&letter) {
        return Err(Error::UnknownLetter(letter.to_string()));
    }
    Ok(Letter(letter).width_category())
}

/// One normalized glyph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateEntry {
    glyph: BinaryImage,
    letter: Letter,
    form: PositionForm,
    source_id: String,
}

impl TemplateEntry {
    pub fn new(
        glyph: BinaryImage,
        letter: Letter,
        form: PositionForm,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if (glyph.width(), glyph.height()) != (GLYPH_WIDTH, GLYPH_HEIGHT) {
            return Err(Error::InvalidImage(format!(
                "glyph is {}x{}, expected {GLYPH_WIDTH}x{GLYPH_HEIGHT}",
                glyph.width(),
                glyph.height()
            )));
        }
        if !glyph.has_ink() {
            return Err(Error::NoContent);
        }
        Ok(Self {
            glyph,
            letter,
            form,
            source_id: source_id.into(),
        })
    }

    pub fn glyph(&self) -> &BinaryImage {
        &self.glyph
    }

    pub fn letter(&self) -> Letter {
        self.letter
    }

    pub fn form(&self) -> PositionForm {
        self.form
    }

    pub fn category(&self) -> WidthCategory {
        self.letter.width_category()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }
}

/// Runs a raw scan through grayscale, Otsu binarization, content crop and a
/// 38x50 nearest-neighbour resize.
pub fn ingest_template(
    raw: &Raster,
    letter: Letter,
    form: PositionForm,
    source_id: impl Into<String>,
) -> Result<TemplateEntry> {
    let gray = raw.to_gray()?;
    let bin = binarize(&gray, Threshold::Otsu);
    let (cropped, _) = crop_to_content(&bin)?;
    let glyph = resize_nearest(&cropped, GLYPH_WIDTH, GLYPH_HEIGHT)?;
    TemplateEntry::new(glyph, letter, form, source_id)
}

/// Immutable collection of templates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateDatabase {
    entries: Vec<TemplateEntry>,
    version: u32,
    resolution_ppi: u32,
}

impl TemplateDatabase {
    pub fn new(entries: Vec<TemplateEntry>) -> Self {
        Self {
            entries,
            version: MANIFEST_VERSION,
            resolution_ppi: RESOLUTION_PPI,
        }
    }

    pub fn entries(&self) -> &[TemplateEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn resolution_ppi(&self) -> u32 {
        self.resolution_ppi
    }

    /// Indices of the entries for `letter`, in database order.
    pub fn indices_for(&self, letter: Letter) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.letter == letter)
            .map(|(i, _)| i)
            .collect()
    }

    /// Entry count per letter.
    pub fn letter_counts(&self) -> BTreeMap<Letter, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.letter).or_insert(0) += 1;
        }
        counts
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        save_db(self, dir)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        load_db(dir)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    version: u32,
    resolution_ppi: u32,
    entries: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    file: String,
    letter: String,
    form: PositionForm,
    category: WidthCategory,
    source_id: String,
}

pub fn save_db(db: &TemplateDatabase, dir: &Path) -> Result<()> {
    let glyph_dir = dir.join("glyphs");
    fs::create_dir_all(&glyph_dir).map_err(|e| Error::io(&glyph_dir, e))?;

    let mut counters: BTreeMap<(Letter, PositionForm), usize> = BTreeMap::new();
    let mut entries = Vec::with_capacity(db.len());
    for entry in &db.entries {
        let n = counters.entry((entry.letter, entry.form)).or_insert(0);
        let file = format!(
            "glyphs/{:04X}_{}_{}.png",
            entry.letter.codepoint(),
            entry.form,
            n
        );
        *n += 1;
        entry.glyph.save_png(&dir.join(&file))?;
        entries.push(ManifestEntry {
            file,
            letter: entry.letter.to_string(),
            form: entry.form,
            category: entry.category(),
            source_id: entry.source_id.clone(),
        });
    }
    let manifest = Manifest {
        version: db.version,
        resolution_ppi: db.resolution_ppi,
        entries,
    };
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

pub fn load_db(dir: &Path) -> Result<TemplateDatabase> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::CorruptDatabase(format!("{}: {e}", path.display())))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::CorruptDatabase(format!(
            "unsupported manifest version {}",
            manifest.version
        )));
    }
    if manifest.resolution_ppi != RESOLUTION_PPI {
        return Err(Error::CorruptDatabase(format!(
            "resolution_ppi {} (expected {RESOLUTION_PPI})",
            manifest.resolution_ppi
        )));
    }

    let mut entries = Vec::with_capacity(manifest.entries.len());
    for (i, m) in manifest.entries.into_iter().enumerate() {
        let corrupt =
            |msg: String| Error::CorruptDatabase(format!("entry {i} ({}): {msg}", m.file));
        let letter: Letter = m
            .letter
            .parse()
            .map_err(|e: Error| corrupt(e.to_string()))?;
        if letter.width_category() != m.category {
            return Err(corrupt(format!(
                "category {:?} does not match letter {letter}",
                m.category
            )));
        }
        let img = image::open(dir.join(&m.file))
            .map_err(|e| corrupt(e.to_string()))?
            .to_luma8();
        let (w, h) = img.dimensions();
        if (w as usize, h as usize) != (GLYPH_WIDTH, GLYPH_HEIGHT) {
            return Err(corrupt(format!(
                "glyph is {w}x{h}, expected {GLYPH_WIDTH}x{GLYPH_HEIGHT}"
            )));
        }
        let glyph = BinaryImage::new(
            GLYPH_WIDTH,
            GLYPH_HEIGHT,
            img.pixels().map(|p| p.0[0] < 128).collect(),
        )?;
        let entry = TemplateEntry::new(glyph, letter, m.form, m.source_id)
            .map_err(|e| corrupt(e.to_string()))?;
        entries.push(entry);
    }
    Ok(TemplateDatabase {
        entries,
        version: manifest.version,
        resolution_ppi: manifest.resolution_ppi,
    })
}
