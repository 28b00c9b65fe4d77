//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use arhw::eval::{cell_config, sweep_csv};
use arhw::imaging::{binarize, crop_to_content, resize_nearest};
use arhw::synth::{benchmark_specs, random_specs, RandomWords};
use arhw::{
    evaluate, generate_corpus, load_db, match_segment, recognize_word, save_db, similarity, sweep,
    BinaryImage, GlyphWidths, GrayImage, GroundTruthWord, MatchConfig, Metric, SegmenterConfig,
    Span, TemplateDatabase, Threshold,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DB_SEED: u64 = 7;
const CORPUS_SEED: u64 = 11;
const FACTORS: [f64; 3] = [1.0, 1.3, 1.6];
const THRESHOLDS: [f64; 3] = [0.30, 0.45, 0.60];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn benchmark(db: &TemplateDatabase) -> Vec<GroundTruthWord> {
    generate_corpus(&benchmark_specs(db, CORPUS_SEED).unwrap(), db).unwrap()
}

fn self_match(db: &TemplateDatabase) -> Outcome {
    let start = Instant::now();
    let cfg = MatchConfig::default();
    let mut failures = Vec::new();
    for (i, e) in db.entries().iter().enumerate() {
        let s = similarity(e.glyph(), e.glyph());
        let top = match_segment(e.glyph(), db, &cfg).unwrap();
        let first = top.first().map(|c| (c.index, c.similarity));
        if s != 1.0 || first != Some((i, 1.0)) {
            failures.push(i);
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(1),
        format!(
            "{} entries, {} failures {:?}, {:.3}s (limit 1s)",
            db.len(),
            failures.len(),
            &failures[..failures.len().min(5)],
            elapsed.as_secs_f64()
        ),
    )
}

fn round_trip(db: &TemplateDatabase, corpus: &[GroundTruthWord]) -> Outcome {
    let start = Instant::now();
    let r = evaluate(corpus, db, &SegmenterConfig::default()).unwrap();
    let elapsed = start.elapsed();
    check(
        r.recognition_rate >= 0.90 && r.far <= 0.05 && elapsed < Duration::from_secs(30),
        format!(
            "{} words, {} letters: rate {:.4} (>= 0.90), far {:.4} (<= 0.05), {:.2}s (limit 30s)",
            corpus.len(),
            r.total_chars,
            r.recognition_rate,
            r.far,
            elapsed.as_secs_f64()
        ),
    )
}

fn trend(db: &TemplateDatabase, corpus: &[GroundTruthWord]) -> Outcome {
    let rows = sweep(corpus, db, &SegmenterConfig::default(), &FACTORS, &[0.45]).unwrap();
    let [fixed, mid, wide] = [0, 1, 2].map(|i| rows[i].recognition_rate);
    let gaps: std::collections::BTreeSet<i32> = corpus.iter().map(|w| w.spec.gap_px).collect();
    check(
        fixed <= mid && mid <= wide + 0.02 && wide > fixed && gaps.len() > 1,
        format!("rate fixed {fixed:.4} <= 1.3 {mid:.4} <= 1.6 {wide:.4} (+0.02), fixed < 1.6, gaps {gaps:?}"),
    )
}

fn threshold_anti_monotone(db: &TemplateDatabase, corpus: &[GroundTruthWord]) -> Outcome {
    let base = SegmenterConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for f in FACTORS {
        let wrong: Vec<usize> = THRESHOLDS
            .iter()
            .map(|&t| {
                evaluate(corpus, db, &cell_config(&base, f, t))
                    .unwrap()
                    .recognized_wrong
            })
            .collect();
        ok &= wrong.windows(2).all(|w| w[1] <= w[0]);
        parts.push(format!("factor {f}: wrong {wrong:?}"));
    }
    check(
        ok,
        format!("{} at thresholds {THRESHOLDS:?}", parts.join("; ")),
    )
}

fn spans_ok(rec: &arhw::WordRecognition, ladder: &[usize]) -> bool {
    let mut pieces: Vec<Span> = rec
        .segments
        .iter()
        .map(|s| s.span)
        .chain(rec.skipped.iter().copied())
        .collect();
    pieces.sort_by_key(|s| std::cmp::Reverse(s.end));
    let mut right = rec.width;
    for p in &pieces {
        if p.end != right || p.start >= p.end {
            return false;
        }
        right = p.start;
    }
    right == 0
        && rec
            .segments
            .windows(2)
            .all(|w| w[1].span.end <= w[0].span.start)
        && rec.segments.iter().all(|s| {
            let w = s.span.width();
            ladder.contains(&w) || (s.span.start == 0 && ladder.iter().any(|&l| l > w))
        })
}

fn random_image(rng: &mut ChaCha8Rng, max: u64, density: u64) -> BinaryImage {
    let w = 1 + (rng.next_u64() % max) as usize;
    let h = 1 + (rng.next_u64() % max) as usize;
    BinaryImage::from_fn(w, h, |_, _| rng.next_u64() % 100 < density).unwrap()
}

fn invariants(db: &TemplateDatabase) -> Outcome {
    let start = Instant::now();
    let mut failures: Vec<String> = Vec::new();

    let cfg = SegmenterConfig::default();
    let ladder = cfg.ladder();
    let specs = random_specs(
        &RandomWords {
            count: 1000,
            min_len: 1,
            max_len: 6,
            min_gap: -5,
            max_gap: 6,
            jitter_px: 2,
            noise_flip_rate: 0.01,
            widths: GlyphWidths::CATEGORY,
            seed: 1000,
        },
        db,
    )
    .unwrap();
    let words = generate_corpus(&specs, db).unwrap();
    let bad = words
        .iter()
        .filter(|w| !recognize_word(&w.image, db, &cfg).is_ok_and(|r| spans_ok(&r, &ladder)))
        .count();
    if bad > 0 {
        failures.push(format!("span/ladder {bad}/1000"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = [0usize; 4];
    for _ in 0..1000 {
        let a = random_image(&mut rng, 60, 8);
        let b = random_image(&mut rng, 60, 40);
        if let Ok((once, _)) = crop_to_content(&a) {
            if crop_to_content(&once).unwrap().0 != once {
                bad[0] += 1;
            }
        }
        let s = similarity(&a, &b);
        if s != similarity(&b, &a) || !(0.0..=1.0).contains(&s) || similarity(&a, &a) != 1.0 {
            bad[1] += 1;
        }
        let framed = resize_nearest(&b, 38, 50).unwrap();
        if similarity(&framed, &framed.complement()) != 0.0 {
            bad[1] += 1;
        }
        let (w, h) = (
            1 + (rng.next_u64() % 40) as usize,
            1 + (rng.next_u64() % 40) as usize,
        );
        let gray =
            GrayImage::new(w, h, (0..w * h).map(|_| rng.next_u64() as u8).collect()).unwrap();
        let t = rng.next_u64() as u8;
        let lo = binarize(&gray, Threshold::Fixed(t));
        let hi = binarize(&gray, Threshold::Fixed(t.saturating_add(1)));
        if lo.pixels().iter().zip(hi.pixels()).any(|(&l, &h)| l && !h) {
            bad[2] += 1;
        }
    }
    let dir = tempfile::tempdir().unwrap();
    save_db(db, dir.path()).unwrap();
    if load_db(dir.path()).ok().as_ref() != Some(db) {
        bad[3] += 1;
    }
    for (name, n) in [
        "crop idempotence",
        "similarity symmetry/range",
        "binarize monotonicity",
        "save/load",
    ]
    .iter()
    .zip(bad)
    {
        if n > 0 {
            failures.push(format!("{name} {n}"));
        }
    }

    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "1000 words + 1000 image cases, failures {:?}, {:.2}s (limit 60s)",
            failures,
            elapsed.as_secs_f64()
        ),
    )
}

/// Criteria 2 and 3 from scratch: report JSON and sweep CSV.
fn full_run() -> (String, String) {
    let db = arhw::sheets::stock_database(DB_SEED).unwrap();
    let corpus = benchmark(&db);
    let report = evaluate(&corpus, &db, &SegmenterConfig::default()).unwrap();
    let rows = sweep(
        &corpus,
        &db,
        &SegmenterConfig::default(),
        &FACTORS,
        &THRESHOLDS,
    )
    .unwrap();
    (report.to_json(), sweep_csv(&rows))
}

fn determinism() -> Outcome {
    let a = full_run();
    let b = full_run();
    check(
        a == b,
        format!("report {} bytes, sweep {} bytes", a.0.len(), a.1.len()),
    )
}

fn main() {
    let db = arhw::sheets::stock_database(DB_SEED).unwrap();
    let corpus = benchmark(&db);

    let criteria: [(&str, &dyn Fn() -> Outcome); 6] = [
        ("1 self-match exactness", &|| self_match(&db)),
        ("2 noiseless round-trip", &|| round_trip(&db, &corpus)),
        ("3 trend fixed <= 1.3 <= 1.6", &|| trend(&db, &corpus)),
        ("4 threshold anti-monotonicity", &|| {
            threshold_anti_monotone(&db, &corpus)
        }),
        ("5 invariant suites", &|| invariants(&db)),
        ("6 determinism", &determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "criterion {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }

    // Reference point, not a criterion: the same corpus scored by full-frame
    // pixel agreement instead of ink overlap.
    let mut pixel = SegmenterConfig::default();
    pixel.matching.metric = Metric::PixelAgreement;
    let r = evaluate(&corpus, &db, &pixel).unwrap();
    println!(
        "info pixel-agreement metric at 35/1.6/0.45: rate {:.4}, far {:.4}",
        r.recognition_rate, r.far
    );

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
