//! Procedural alphabet sheets.
//!
//! Draws every letter in every position form as a stroke figure on an RGB
//! "scan", with per-writer wobble in control points and pen width. The
//! scans go through the regular ingestion path, so a database built from
//! them is indistinguishable in format from one built from real scans. This
//! is what the tests, the acceptance suite and the CLI demo use in place of
//! real handwriting.

use image::{Rgb, RgbImage};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::imaging::Raster;
use crate::template_db::{
    ingest_template, Letter, PositionForm, TemplateDatabase, TemplateEntry, WidthCategory,
};

const PAPER: [u8; 3] = [244, 241, 232];
const INK: [u8; 3] = [28, 30, 64];
const CANVAS_HEIGHT: usize = 64;
/// Vertical position of the writing line in unit coordinates.
const BASELINE: f64 = 0.72;

#[derive(Clone, Copy, Debug)]
struct Pt(f64, f64);

#[derive(Clone, Debug)]
enum Stroke {
    Poly(Vec<Pt>),
    Dot(Pt),
}

/// Elliptical arc from angle `a0` to `a1` (degrees, 0 = +x, 90 = down).
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, a0: f64, a1: f64) -> Stroke {
    let n = 24;
    Stroke::Poly(
        (0..=n)
            .map(|i| {
                let a = (a0 + (a1 - a0) * i as f64 / n as f64).to_radians();
                Pt(cx + rx * a.cos(), cy + ry * a.sin())
            })
            .collect(),
    )
}

fn line(pts: &[(f64, f64)]) -> Stroke {
    Stroke::Poly(pts.iter().map(|&(x, y)| Pt(x, y)).collect())
}

fn dots(n: usize, cx: f64, cy: f64) -> Vec<Stroke> {
    match n {
        1 => vec![Stroke::Dot(Pt(cx, cy))],
        2 => vec![
            Stroke::Dot(Pt(cx - 0.13, cy)),
            Stroke::Dot(Pt(cx + 0.13, cy)),
        ],
        _ => vec![
            Stroke::Dot(Pt(cx - 0.14, cy + 0.04)),
            Stroke::Dot(Pt(cx + 0.14, cy + 0.04)),
            Stroke::Dot(Pt(cx, cy - 0.08)),
        ],
    }
}

/// Letter body for one form, in a unit box (y grows downwards). `joins_right`
/// and `joins_left` say whether the glyph connects to a neighbour.
fn figure(letter: char, joins_right: bool, joins_left: bool) -> Vec<Stroke> {
    let b = BASELINE;
    let mut s = Vec::new();
    match letter {
        'ا' => s.push(line(&[(0.55, 0.05), (0.5, b)])),
        'ب' | 'ت' | 'ث' => {
            s.push(line(&[(0.95, b - 0.22), (0.9, b)]));
            s.push(arc(0.5, b - 0.02, 0.42, 0.08, 10.0, 170.0));
            s.push(line(&[(0.08, b - 0.02), (0.06, b - 0.2)]));
            match letter {
                'ب' => s.extend(dots(1, 0.5, b + 0.2)),
                'ت' => s.extend(dots(2, 0.5, b - 0.3)),
                _ => s.extend(dots(3, 0.5, b - 0.32)),
            }
        }
        'ج' | 'ح' | 'خ' => {
            s.push(line(&[(0.15, 0.3), (0.55, 0.22), (0.9, 0.3)]));
            s.push(arc(0.55, 0.62, 0.42, 0.33, -110.0, -250.0));
            s.push(arc(0.55, 0.62, 0.42, 0.33, -250.0, -290.0));
            match letter {
                'ج' => s.extend(dots(1, 0.6, 0.6)),
                'خ' => s.extend(dots(1, 0.55, 0.08)),
                _ => {}
            }
        }
        'د' | 'ذ' => {
            s.push(line(&[(0.35, 0.3), (0.8, b - 0.05), (0.75, b), (0.15, b)]));
            if letter == 'ذ' {
                s.extend(dots(1, 0.35, 0.1));
            }
        }
        'ر' | 'ز' => {
            s.push(arc(0.2, 0.45, 0.6, 0.5, -20.0, 100.0));
            if letter == 'ز' {
                s.extend(dots(1, 0.65, 0.12));
            }
        }
        'س' | 'ش' => {
            s.push(line(&[
                (0.95, 0.45),
                (0.9, 0.6),
                (0.8, 0.6),
                (0.75, 0.45),
                (0.7, 0.6),
                (0.6, 0.6),
                (0.55, 0.45),
            ]));
            s.push(arc(0.3, 0.62, 0.26, 0.22, 0.0, 180.0));
            if letter == 'ش' {
                s.extend(dots(3, 0.75, 0.22));
            }
        }
        'ص' | 'ض' => {
            s.push(arc(0.72, 0.45, 0.22, 0.14, 0.0, 360.0));
            s.push(arc(0.3, 0.6, 0.25, 0.2, 0.0, 180.0));
            s.push(line(&[(0.5, 0.58), (0.55, 0.45)]));
            if letter == 'ض' {
                s.extend(dots(1, 0.72, 0.15));
            }
        }
        'ط' | 'ظ' => {
            s.push(arc(0.55, b - 0.12, 0.36, 0.12, 0.0, 360.0));
            s.push(line(&[(0.3, 0.05), (0.28, b)]));
            if letter == 'ظ' {
                s.extend(dots(1, 0.65, 0.3));
            }
        }
        'ع' | 'غ' => {
            s.push(arc(0.6, 0.38, 0.28, 0.16, -60.0, -270.0));
            s.push(arc(0.6, 0.75, 0.45, 0.22, -90.0, -230.0));
            if letter == 'غ' {
                s.extend(dots(1, 0.55, 0.07));
            }
        }
        'ف' | 'ق' => {
            s.push(arc(0.78, 0.45, 0.16, 0.13, 0.0, 360.0));
            if letter == 'ف' {
                s.push(line(&[(0.78, 0.58), (0.5, b), (0.05, b), (0.03, 0.55)]));
                s.extend(dots(1, 0.78, 0.15));
            } else {
                s.push(arc(0.45, 0.62, 0.45, 0.3, 80.0, 180.0));
                s.push(line(&[(0.9, 0.5), (0.85, 0.7), (0.5, 0.92)]));
                s.extend(dots(2, 0.75, 0.14));
            }
        }
        'ك' => {
            s.push(line(&[(0.85, 0.05), (0.85, b), (0.1, b), (0.08, 0.5)]));
            s.push(line(&[(0.35, 0.4), (0.55, 0.3), (0.4, 0.25)]));
        }
        'ل' => {
            s.push(line(&[(0.8, 0.05), (0.78, 0.72)]));
            s.push(arc(0.45, 0.7, 0.35, 0.22, 0.0, 170.0));
        }
        'م' => {
            s.push(arc(0.72, 0.52, 0.2, 0.15, 0.0, 360.0));
            s.push(line(&[(0.55, 0.62), (0.3, 0.66), (0.25, 0.98)]));
        }
        'ن' => {
            s.push(arc(0.5, 0.55, 0.4, 0.3, 0.0, 180.0));
            s.extend(dots(1, 0.5, 0.3));
        }
        'ه' => {
            s.push(arc(0.5, 0.5, 0.32, 0.3, 0.0, 360.0));
            s.push(line(&[(0.5, 0.2), (0.55, 0.55)]));
        }
        'و' => {
            s.push(arc(0.65, 0.4, 0.2, 0.16, 0.0, 360.0));
            s.push(arc(0.3, 0.4, 0.65, 0.55, 0.0, 100.0));
        }
        'ي' => {
            s.push(line(&[(0.85, 0.3), (0.6, 0.45), (0.85, 0.58)]));
            s.push(arc(0.45, 0.58, 0.42, 0.18, 0.0, 180.0));
            s.extend(dots(2, 0.5, 0.93));
        }
        other => unreachable!("letter {other} outside alphabet"),
    }
    if joins_right {
        s.push(line(&[(1.0, b), (0.85, b)]));
    }
    if joins_left {
        s.push(line(&[(0.15, b), (0.0, b)]));
    }
    s
}

/// Pixel width of the scan canvas for a letter.
fn canvas_width(category: WidthCategory) -> usize {
    match category {
        WidthCategory::Small => 28,
        WidthCategory::Medium => 44,
        WidthCategory::Large => 60,
    }
}

fn seg_dist(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (ex, ey) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (ex * ex + ey * ey).sqrt()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Renders one glyph scan for `writer`. Same arguments, same pixels.
pub fn render_scan(letter: Letter, form: PositionForm, writer: u64, seed: u64) -> RgbImage {
    let joins_right = matches!(form, PositionForm::Medial | PositionForm::Final);
    let joins_left = matches!(form, PositionForm::Initial | PositionForm::Medial);
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed ^ (letter.codepoint() as u64) << 20
            ^ (form as u64) << 8
            ^ writer.wrapping_mul(0x9E37_79B9),
    );
    // writer 0 is the clean reference hand
    let wobble = if writer == 0 { 0.0 } else { 0.035 };
    let pen = 1.6
        + if writer == 0 {
            0.0
        } else {
            unit(&mut rng) * 1.2
        };
    let dot_r = pen * 1.3;

    let w = canvas_width(letter.width_category());
    let h = CANVAS_HEIGHT;
    let margin = 6.0;
    let (bw, bh) = (w as f64 - 2.0 * margin, h as f64 - 2.0 * margin);
    let mut jitter = |p: Pt| {
        let dx = (unit(&mut rng) - 0.5) * 2.0 * wobble;
        let dy = (unit(&mut rng) - 0.5) * 2.0 * wobble;
        Pt(margin + (p.0 + dx) * bw, margin + (p.1 + dy) * bh)
    };
    let strokes: Vec<Stroke> = figure(letter.as_char(), joins_right, joins_left)
        .into_iter()
        .map(|s| match s {
            Stroke::Poly(pts) => Stroke::Poly(pts.into_iter().map(&mut jitter).collect()),
            Stroke::Dot(p) => Stroke::Dot(jitter(p)),
        })
        .collect();

    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let p = Pt(x as f64 + 0.5, y as f64 + 0.5);
        let inked = strokes.iter().any(|s| match s {
            Stroke::Poly(pts) => pts
                .windows(2)
                .any(|ab| seg_dist(p, ab[0], ab[1]) <= pen / 2.0),
            Stroke::Dot(c) => seg_dist(p, *c, *c) <= dot_r,
        });
        Rgb(if inked { INK } else { PAPER })
    })
}

/// One labelled scan.
#[derive(Clone, Debug)]
pub struct Scan {
    pub letter: Letter,
    pub form: PositionForm,
    pub writer: u64,
    pub image: RgbImage,
}

impl Scan {
    pub fn source_id(&self) -> String {
        format!("sheet-w{}", self.writer)
    }

    pub fn file_name(&self) -> String {
        format!(
            "{:04X}_{}_w{}.png",
            self.letter.codepoint(),
            self.form,
            self.writer
        )
    }
}

/// Every letter in every form for writers `0..writers`, alphabet-major.
pub fn render_sheets(letters: &[Letter], writers: u64, seed: u64) -> Vec<Scan> {
    let jobs: Vec<(Letter, PositionForm, u64)> = letters
        .iter()
        .flat_map(|&l| {
            PositionForm::ALL
                .into_iter()
                .flat_map(move |f| (0..writers).map(move |w| (l, f, w)))
        })
        .collect();
    jobs.into_par_iter()
        .map(|(letter, form, writer)| Scan {
            letter,
            form,
            writer,
            image: render_scan(letter, form, writer, seed),
        })
        .collect()
}

/// Renders and ingests sheets into a database.
pub fn sheet_database(letters: &[Letter], writers: u64, seed: u64) -> Result<TemplateDatabase> {
    let entries: Result<Vec<TemplateEntry>> = render_sheets(letters, writers, seed)
        .into_iter()
        .map(|scan| {
            ingest_template(
                &Raster::Rgb(scan.image.clone()),
                scan.letter,
                scan.form,
                scan.source_id(),
            )
        })
        .collect();
    Ok(TemplateDatabase::new(entries?))
}

/// Full alphabet, two writers.
pub fn stock_database(seed: u64) -> Result<TemplateDatabase> {
    let letters: Vec<Letter> = Letter::all().collect();
    sheet_database(&letters, 2, seed)
}
