mod common;

use arhw::eval::{cell_config, sweep_csv};
use arhw::synth::{benchmark_specs, random_specs, RandomWords};
use arhw::{evaluate, generate_corpus, sweep, Error, GlyphWidths, SegmenterConfig};
use common::stock;

fn small_corpus() -> Vec<arhw::GroundTruthWord> {
    let specs = random_specs(
        &RandomWords {
            count: 12,
            widths: GlyphWidths::CATEGORY,
            seed: 8,
            ..RandomWords::default()
        },
        stock(),
    )
    .unwrap();
    generate_corpus(&specs, stock()).unwrap()
}

#[test]
fn sweep_rows_match_independent_evaluations() {
    let corpus = small_corpus();
    let base = SegmenterConfig::default();
    let rows = sweep(&corpus, stock(), &base, &[1.0, 1.3, 1.6], &[0.45]).unwrap();
    assert_eq!(rows.len(), 3);
    for (row, factor) in rows.iter().zip([1.0, 1.3, 1.6]) {
        let mut cfg = SegmenterConfig::default();
        if factor == 1.0 {
            cfg.max_widenings = 0;
        } else {
            cfg.scale_factor = factor;
        }
        let r = evaluate(&corpus, stock(), &cfg).unwrap();
        assert_eq!((row.factor, row.threshold), (factor, 0.45));
        assert_eq!((row.recognition_rate, row.far), (r.recognition_rate, r.far));
    }
    assert!(rows[1].recognition_rate >= rows[0].recognition_rate);
    assert!(rows[2].recognition_rate >= rows[0].recognition_rate);
}

#[test]
fn single_cell_equals_evaluate() {
    let corpus = small_corpus();
    let base = SegmenterConfig::default();
    let rows = sweep(&corpus, stock(), &base, &[1.6], &[0.6]).unwrap();
    let r = evaluate(&corpus, stock(), &cell_config(&base, 1.6, 0.6)).unwrap();
    assert_eq!(
        (rows[0].recognition_rate, rows[0].far),
        (r.recognition_rate, r.far)
    );
}

#[test]
fn bad_grids_are_rejected() {
    let corpus = small_corpus();
    let base = SegmenterConfig::default();
    assert!(sweep(&corpus, stock(), &base, &[], &[0.45]).is_err());
    assert!(sweep(&corpus, stock(), &base, &[1.6], &[]).is_err());
    assert!(sweep(&corpus, stock(), &base, &[0.8], &[0.45]).is_err());
    assert!(matches!(
        evaluate(&[], stock(), &base),
        Err(Error::EmptyCorpus)
    ));
}

#[test]
fn counting_identity_holds() {
    let specs = benchmark_specs(stock(), 2).unwrap();
    let corpus = generate_corpus(&specs[..20], stock()).unwrap();
    for t in [0.3, 0.45, 0.6] {
        let r = evaluate(
            &corpus,
            stock(),
            &cell_config(&SegmenterConfig::default(), 1.3, t),
        )
        .unwrap();
        assert_eq!(
            r.recognized_correct + r.recognized_wrong + r.unrecognized,
            r.total_chars
        );
        assert!(r.recognition_rate + r.far <= 1.0 + 1e-12);
        let confusion_total: usize = r.confusion.values().flat_map(|row| row.values()).sum();
        assert_eq!(confusion_total, r.total_chars);
    }
}

#[test]
fn csv_layout() {
    let corpus = small_corpus();
    let rows = sweep(
        &corpus,
        stock(),
        &SegmenterConfig::default(),
        &[1.0, 1.6],
        &[0.3, 0.45],
    )
    .unwrap();
    let csv = sweep_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "factor,threshold,recognition_rate,far");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,0.3,"));
    assert!(lines[4].starts_with("1.6,0.45,"));
    for l in &lines[1..] {
        let rate = l.split(',').nth(2).unwrap();
        assert_eq!(rate.split('.').nth(1).unwrap().len(), 4);
    }
}
