use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use arhw::eval::sweep_csv;
use arhw::imaging::{binarize, Raster};
use arhw::synth::{benchmark_specs, default_specs, load_corpus, save_corpus};
use arhw::template_db::{ingest_template, parse_word};
use arhw::{
    evaluate, generate_corpus, load_db, recognize_page, save_db, sweep, GlyphWidths, Letter,
    MatchConfig, Metric, PositionForm, SegmenterConfig, SynthSpec, TemplateDatabase, Threshold,
};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser)]
#[command(
    name = "arhw",
    version,
    about = "Offline Arabic handwritten character recognition"
)]
struct Cli {
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest labelled glyph scans into a template database.
    BuildDb {
        input_dir: PathBuf,
        /// CSV with header `file,letter,form`; files are relative to INPUT_DIR.
        labels: PathBuf,
        out_dir: PathBuf,
    },
    /// Render procedural alphabet sheets plus a labels file for build-db.
    RenderSheets {
        out_dir: PathBuf,
        #[arg(long, default_value_t = 2)]
        writers: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recognize the words of a page image.
    Recognize {
        image: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[command(flatten)]
        seg: SegmenterArgs,
        /// Minimum run of blank columns that separates two words.
        #[arg(long, default_value_t = 100)]
        gap: usize,
        /// Fixed binarization threshold (ink iff intensity < T); Otsu if absent.
        #[arg(long)]
        binarize_at: Option<u8>,
        /// Print the full recognition as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Compose a ground-truth corpus of synthetic words.
    Synth {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON list of word specs; the three default test words if absent.
        #[arg(long, conflicts_with = "benchmark")]
        spec: Option<PathBuf>,
        /// The evaluation corpus: default words plus 100 random words.
        #[arg(long)]
        benchmark: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Place glyphs at the stored 38-pixel width instead of per-category widths.
        #[arg(long)]
        template_widths: bool,
    },
    /// Recognize a corpus and score it against its ground truth.
    Eval {
        corpus: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[command(flatten)]
        seg: SegmenterArgs,
        /// Report path (default: CORPUS/report.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the report JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a grid of scale factors and thresholds; 1 means fixed width.
    Sweep {
        corpus: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[command(flatten)]
        seg: SegmenterArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,1.3,1.6")]
        factors: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.45")]
        thresholds: Vec<f64>,
        /// CSV path (default: CORPUS/sweep.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SegmenterArgs {
    #[arg(long, default_value_t = 35)]
    base_width: usize,
    #[arg(long, default_value_t = 1.6)]
    scale_factor: f64,
    #[arg(long, default_value_t = 3)]
    max_widenings: usize,
    #[arg(long, default_value_t = 0.45)]
    threshold: f64,
    #[arg(long)]
    upper_threshold: Option<f64>,
    /// ink-overlap or pixel-agreement.
    #[arg(long, default_value = "ink-overlap")]
    metric: Metric,
    /// Cut slices at the cursor even when it sits on blank columns.
    #[arg(long)]
    no_blank_skip: bool,
}

impl SegmenterArgs {
    fn config(&self) -> Result<SegmenterConfig> {
        let cfg = SegmenterConfig {
            base_width: self.base_width,
            scale_factor: self.scale_factor,
            max_widenings: self.max_widenings,
            matching: MatchConfig {
                accept_threshold: self.threshold,
                upper_threshold: self.upper_threshold,
                metric: self.metric,
            },
            skip_blank_columns: !self.no_blank_skip,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One entry of a synth spec file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WordSpec {
    word: String,
    #[serde(default)]
    gap_px: i32,
    #[serde(default)]
    jitter_px: u32,
    #[serde(default)]
    noise_flip_rate: f64,
    seed: Option<u64>,
    widths: Option<GlyphWidths>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let outcome = pool
        .build()
        .context("starting worker threads")
        .and_then(|pool| pool.install(|| run(cli.command)));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}

/// Joins the error chain, dropping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

/// Returns `Ok(false)` when the command finished but reported errors.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::BuildDb {
            input_dir,
            labels,
            out_dir,
        } => build_db(&input_dir, &labels, &out_dir),
        Command::RenderSheets {
            out_dir,
            writers,
            seed,
        } => render_sheets(&out_dir, writers, seed),
        Command::Recognize {
            image,
            db,
            seg,
            gap,
            binarize_at,
            json,
        } => recognize(&image, &db, &seg.config()?, gap, binarize_at, json),
        Command::Synth {
            db,
            out,
            spec,
            benchmark,
            seed,
            template_widths,
        } => synth(&db, &out, spec.as_deref(), benchmark, seed, template_widths),
        Command::Eval {
            corpus,
            db,
            seg,
            out,
            json,
        } => eval(&corpus, &db, &seg.config()?, out, json),
        Command::Sweep {
            corpus,
            db,
            seg,
            factors,
            thresholds,
            out,
        } => run_sweep(&corpus, &db, &seg.config()?, &factors, &thresholds, out),
    }
}

fn open_db(dir: &Path) -> Result<TemplateDatabase> {
    load_db(dir).with_context(|| format!("loading database {}", dir.display()))
}

fn build_db(input_dir: &Path, labels: &Path, out_dir: &Path) -> Result<bool> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(labels)
        .with_context(|| format!("reading {}", labels.display()))?;
    let mut entries = Vec::new();
    let mut failed = 0;
    for (line, record) in reader.records().enumerate() {
        let record =
            record.with_context(|| format!("{}: record {}", labels.display(), line + 1))?;
        let [file, letter, form] = [0, 1, 2].map(|i| record.get(i).unwrap_or(""));
        let ingest = || -> Result<_> {
            let letter: Letter = letter.parse()?;
            let form: PositionForm = form.parse()?;
            let raster = Raster::load(&input_dir.join(file))?;
            Ok(ingest_template(&raster, letter, form, file)?)
        };
        match ingest() {
            Ok(entry) => entries.push(entry),
            Err(e) => {
                failed += 1;
                eprintln!("{file}: {}", describe(&e));
            }
        }
    }
    let total = entries.len() + failed;
    if entries.is_empty() {
        bail!("no glyphs ingested from {total} labelled files");
    }
    let db = TemplateDatabase::new(entries);
    save_db(&db, out_dir).with_context(|| format!("writing {}", out_dir.display()))?;
    println!("{} entries written to {}", db.len(), out_dir.display());
    if failed > 0 {
        println!("partial: {failed} of {total} files failed");
    }
    Ok(failed == 0)
}

fn render_sheets(out_dir: &Path, writers: u64, seed: u64) -> Result<bool> {
    let letters: Vec<Letter> = Letter::all().collect();
    let scans = arhw::sheets::render_sheets(&letters, writers, seed);
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut labels = String::from("file,letter,form\n");
    for scan in &scans {
        let name = scan.file_name();
        let path = out_dir.join(&name);
        scan.image
            .save(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        labels.push_str(&format!("{name},{},{}\n", scan.letter, scan.form));
    }
    let path = out_dir.join("labels.csv");
    fs::write(&path, labels).with_context(|| format!("writing {}", path.display()))?;
    println!("{} scans written to {}", scans.len(), out_dir.display());
    Ok(true)
}

fn recognize(
    image: &Path,
    db: &Path,
    cfg: &SegmenterConfig,
    gap: usize,
    binarize_at: Option<u8>,
    json: bool,
) -> Result<bool> {
    let db = open_db(db)?;
    let gray = Raster::load(image)?.to_gray()?;
    let policy = binarize_at.map_or(Threshold::Otsu, Threshold::Fixed);
    let page = binarize(&gray, policy);
    let words = recognize_page(&page, &db, cfg, gap)?;

    let mut ok = true;
    let mut dump = Vec::with_capacity(words.len());
    for (i, word) in words.iter().enumerate() {
        match word {
            Ok(rec) => {
                if !json {
                    println!("{}", rec.text);
                }
                dump.push(serde_json::to_value(rec)?);
            }
            Err(e) => {
                ok = false;
                eprintln!("word {i}: {e}");
                dump.push(serde_json::json!({ "error": e.to_string() }));
            }
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&dump)?);
    }
    Ok(ok)
}

fn read_spec_file(path: &Path, seed: u64, widths: GlyphWidths) -> Result<Vec<SynthSpec>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let words: Vec<WordSpec> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    words
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let letters = parse_word(&w.word).with_context(|| format!("word {i}"))?;
            Ok(SynthSpec {
                letters,
                gap_px: w.gap_px,
                jitter_px: w.jitter_px,
                noise_flip_rate: w.noise_flip_rate,
                seed: w.seed.unwrap_or(seed.wrapping_add(i as u64)),
                widths: w.widths.unwrap_or(widths),
            })
        })
        .collect()
}

fn synth(
    db: &Path,
    out: &Path,
    spec: Option<&Path>,
    benchmark: bool,
    seed: u64,
    template_widths: bool,
) -> Result<bool> {
    let db = open_db(db)?;
    let widths = if template_widths {
        GlyphWidths::Template
    } else {
        GlyphWidths::CATEGORY
    };
    let specs = match spec {
        Some(path) => read_spec_file(path, seed, widths)?,
        None if benchmark => {
            let mut specs = benchmark_specs(&db, seed)?;
            specs.iter_mut().for_each(|s| s.widths = widths);
            specs
        }
        None => {
            let mut specs = default_specs(seed);
            specs.iter_mut().for_each(|s| s.widths = widths);
            specs
        }
    };
    let corpus = generate_corpus(&specs, &db)?;
    save_corpus(&corpus, out)?;
    for word in &corpus {
        println!(
            "{}",
            word.letters.iter().map(|l| l.as_char()).collect::<String>()
        );
    }
    println!("{} words written to {}", corpus.len(), out.display());
    Ok(true)
}

fn eval(
    corpus_dir: &Path,
    db: &Path,
    cfg: &SegmenterConfig,
    out: Option<PathBuf>,
    json: bool,
) -> Result<bool> {
    let db = open_db(db)?;
    let corpus = load_corpus(corpus_dir)?;
    let report = evaluate(&corpus, &db, cfg)?;
    let out = out.unwrap_or_else(|| corpus_dir.join("report.json"));
    let mut text = report.to_json();
    text.push('\n');
    fs::write(&out, &text).with_context(|| format!("writing {}", out.display()))?;
    println!("recognition_rate {:.4}", report.recognition_rate);
    println!("far {:.4}", report.far);
    println!(
        "letters {} correct {} wrong {} unrecognized {}",
        report.total_chars, report.recognized_correct, report.recognized_wrong, report.unrecognized
    );
    if json {
        print!("{text}");
    }
    Ok(true)
}

fn run_sweep(
    corpus_dir: &Path,
    db: &Path,
    cfg: &SegmenterConfig,
    factors: &[f64],
    thresholds: &[f64],
    out: Option<PathBuf>,
) -> Result<bool> {
    let db = open_db(db)?;
    let corpus = load_corpus(corpus_dir)?;
    let rows = sweep(&corpus, &db, cfg, factors, thresholds)?;
    let csv = sweep_csv(&rows);
    let out = out.unwrap_or_else(|| corpus_dir.join("sweep.csv"));
    fs::write(&out, &csv).with_context(|| format!("writing {}", out.display()))?;
    print!("{csv}");
    Ok(true)
}
