#![allow(dead_code)]

use std::sync::OnceLock;

use arhw::{BinaryImage, TemplateDatabase};
use proptest::prelude::*;

pub const STOCK_SEED: u64 = 7;

/// The procedural two-writer alphabet, built once per test binary.
pub fn stock() -> &'static TemplateDatabase {
    static DB: OnceLock<TemplateDatabase> = OnceLock::new();
    DB.get_or_init(|| arhw::sheets::stock_database(STOCK_SEED).expect("stock sheets ingest"))
}

pub fn binary_image(max_w: usize, max_h: usize) -> impl Strategy<Value = BinaryImage> {
    (1..=max_w, 1..=max_h).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<bool>(), w * h)
            .prop_map(move |px| BinaryImage::new(w, h, px).unwrap())
    })
}

pub fn sparse_image(max_w: usize, max_h: usize) -> impl Strategy<Value = BinaryImage> {
    (1..=max_w, 1..=max_h).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::bool::weighted(0.1), w * h)
            .prop_map(move |px| BinaryImage::new(w, h, px).unwrap())
    })
}
