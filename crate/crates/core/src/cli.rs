//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failure, 2 partial success (some clips skipped
//! during feature extraction).

use crate::config::ExperimentConfig;
use crate::features::{
    read_features, read_manifest, write_features, write_manifest, FeatureClip, FeatureError, ManifestRow,
};
use crate::features::load_wav;
use crate::masking::{generate_mask, MaskSpec};
use crate::network::{load_model, save_model, Model};
use crate::synth::SynthSpec;
use crate::training::{
    cross_validate, predict_clip, prepare_clip, run_fold, stratified_folds, FoldResult, XvalReport,
};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use std::collections::HashSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "mclnn", version, about = "Masked conditional neural networks for music genre classification")]
pub struct Cli {
    /// Experiment config (`section.key=value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap; 0 uses all cores. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract log-mel features for every manifest row.
    Features {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Export a band mask as PGM or CSV (by extension).
    Mask {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        e: usize,
        #[arg(long)]
        bw: usize,
        #[arg(long, allow_hyphen_values = true)]
        ov: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation.
    Xval {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        features_dir: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Train and test a single fold.
    Train {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        features_dir: Option<PathBuf>,
        /// Test fold; the next fold validates, the rest train.
        #[arg(long, default_value_t = 0)]
        fold: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Predict clips with a saved model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Directory holding the `.mcf` files.
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Predictions CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the synthetic corpus.
    Synth {
        /// Synth spec (`key=value` lines); defaults when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Build a manifest from `<root>/<class>/*.wav` with stratified folds.
    Manifest {
        #[arg(long)]
        root: PathBuf,
        /// Class directory names in label order, comma separated.
        #[arg(long, value_delimiter = ',')]
        classes: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn pick(flag: &Option<PathBuf>, fallback: &str, name: &str) -> Result<PathBuf> {
    match flag {
        Some(p) => Ok(p.clone()),
        None if !fallback.is_empty() => Ok(PathBuf::from(fallback)),
        None => bail!("--{name} is required (or set paths.{} in the config)", name.replace('-', "_")),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Features { manifest, out_dir } => {
            let manifest = pick(manifest, &cfg.manifest, "manifest")?;
            let out_dir = pick(out_dir, &cfg.features_dir, "out-dir")?;
            let report = cmd_features(&cfg, &manifest, &out_dir, cli.threads)?;
            print!("{}", report.text);
            Ok(if report.skipped.is_empty() { 0 } else { 2 })
        }
        Command::Mask { l, e, bw, ov, out } => {
            cmd_mask(*l, *e, *bw, *ov, out)?;
            Ok(0)
        }
        Command::Xval {
            manifest,
            features_dir,
            out_dir,
        } => {
            let manifest = pick(manifest, &cfg.manifest, "manifest")?;
            let features_dir = pick(features_dir, &cfg.features_dir, "features-dir")?;
            let out_dir = pick(out_dir, &cfg.out_dir, "out-dir")?;
            let report = cmd_xval(&cfg, &manifest, &features_dir, &out_dir, cli.threads)?;
            for f in &report.folds {
                println!(
                    "fold {}: accuracy {:.4} after {} epochs",
                    f.fold,
                    f.accuracy,
                    f.trained.epochs_trained()
                );
            }
            println!("clip accuracy {:.4} ± {:.4}", report.mean_accuracy, report.std_accuracy);
            Ok(0)
        }
        Command::Train {
            manifest,
            features_dir,
            fold,
            out_dir,
        } => {
            let manifest = pick(manifest, &cfg.manifest, "manifest")?;
            let features_dir = pick(features_dir, &cfg.features_dir, "features-dir")?;
            let out_dir = pick(out_dir, &cfg.out_dir, "out-dir")?;
            let result = cmd_train(&cfg, &manifest, &features_dir, *fold, &out_dir, cli.threads)?;
            println!(
                "fold {}: accuracy {:.4} after {} epochs (best epoch {})",
                result.fold,
                result.accuracy,
                result.trained.epochs_trained(),
                result.trained.best_epoch
            );
            Ok(0)
        }
        Command::Eval {
            model,
            features,
            manifest,
            out,
        } => {
            let (csv, accuracy, n) = cmd_eval(&cfg, model, features, manifest)?;
            match out {
                Some(p) => {
                    std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
                    println!("accuracy {accuracy:.4} over {n} clips");
                }
                None => {
                    print!("{csv}");
                    eprintln!("accuracy {accuracy:.4} over {n} clips");
                }
            }
            Ok(0)
        }
        Command::Synth { spec, out_dir } => {
            let mut spec = match spec {
                Some(p) => SynthSpec::parse(&std::fs::read_to_string(p).with_context(|| p.display().to_string())?)?,
                None => SynthSpec::default(),
            };
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let rows = spec.write_corpus(out_dir)?;
            println!("wrote {} clips to {}", rows.len(), out_dir.display());
            Ok(0)
        }
        Command::Manifest { root, classes, out } => {
            let rows = cmd_manifest(root, classes, cfg.folds, cfg.seed, out)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(0)
        }
    }
}

/// Outcome of feature extraction.
#[derive(Debug, Clone)]
pub struct FeatureReport {
    pub written: usize,
    /// `(clip path, reason)` for clips without a feature file.
    pub skipped: Vec<(PathBuf, String)>,
    /// Clips with fewer frames than one segment; written but unusable.
    pub short: Vec<(String, usize)>,
    pub text: String,
}

/// Writes `<stem>.mcf` per manifest row, plus `features.csv` (manifest of the
/// written feature files) and `report.txt`.
pub fn cmd_features(cfg: &ExperimentConfig, manifest: &Path, out_dir: &Path, threads: usize) -> Result<FeatureReport> {
    let rows = read_manifest(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let mut seen = HashSet::new();
    for r in &rows {
        if !seen.insert(r.clip_id()) {
            bail!("duplicate clip id '{}' in manifest", r.clip_id());
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let q = cfg.segment_len()?;
    let results: Vec<Result<FeatureClip, FeatureError>> = pool(threads)?.install(|| {
        rows.par_iter()
            .map(|r| {
                let frames = cfg.features.extract(&load_wav(&r.path)?)?;
                let clip = FeatureClip::from_mat(&frames, r.label, r.clip_id(), r.fold);
                write_features(&clip, out_dir.join(format!("{}.mcf", clip.clip_id)))?;
                Ok(clip)
            })
            .collect()
    });

    let mut out_rows = Vec::new();
    let mut skipped = Vec::new();
    let mut short = Vec::new();
    for (row, res) in rows.iter().zip(results) {
        match res {
            Ok(clip) => {
                if clip.frame_count < q {
                    short.push((clip.clip_id.clone(), clip.frame_count));
                }
                out_rows.push(ManifestRow {
                    path: format!("{}.mcf", clip.clip_id).into(),
                    label: row.label,
                    fold: row.fold,
                });
            }
            Err(e) => skipped.push((row.path.clone(), e.to_string())),
        }
    }
    write_manifest(&out_dir.join("features.csv"), &out_rows)?;

    let mut text = format!("{} ok, {} skipped\n", out_rows.len(), skipped.len());
    for (p, why) in &skipped {
        writeln!(text, "skipped {}: {why}", p.display())?;
    }
    for (id, frames) in &short {
        writeln!(text, "short {id}: {frames} frames, segment needs {q}")?;
    }
    std::fs::write(out_dir.join("report.txt"), &text)?;
    Ok(FeatureReport {
        written: out_rows.len(),
        skipped,
        short,
        text,
    })
}

pub fn cmd_mask(l: usize, e: usize, bw: usize, ov: i64, out: &Path) -> Result<()> {
    let mask = generate_mask(MaskSpec::new(l, e, bw, ov))?;
    let text = match out.extension().and_then(|x| x.to_str()) {
        Some("pgm") => mask.to_pgm(),
        Some("csv") => mask.to_csv(),
        _ => bail!("--out must end in .pgm or .csv"),
    };
    std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

/// Loads `<features_dir>/<stem>.mcf` for every manifest row; the manifest's
/// label and fold are authoritative.
pub fn load_clips(manifest: &Path, features_dir: &Path, feature_dim: usize) -> Result<Vec<FeatureClip>> {
    let rows = read_manifest(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    if rows.is_empty() {
        bail!("no clips in {}", manifest.display());
    }
    rows.iter()
        .map(|r| {
            let path = features_dir.join(format!("{}.mcf", r.clip_id()));
            let mut clip = read_features(&path).with_context(|| format!("reading {}", path.display()))?;
            if clip.feature_dim != feature_dim {
                bail!(
                    "feature_dim mismatch: {} has {} features, expected {feature_dim}",
                    path.display(),
                    clip.feature_dim
                );
            }
            clip.label = r.label;
            clip.fold = r.fold;
            Ok(clip)
        })
        .collect()
}

fn fold_csvs(folds: &[FoldResult], class_count: usize, out_dir: &Path) -> Result<()> {
    let mut results = String::from("fold,clip_accuracy,epochs_trained,best_val_loss\n");
    let mut history = String::from("fold,epoch,train_loss,val_loss\n");
    let mut preds = String::from("fold,clip_id,true,pred,prob_true\n");
    for f in folds {
        writeln!(
            results,
            "{},{},{},{}",
            f.fold,
            f.accuracy,
            f.trained.epochs_trained(),
            f.trained.best_val_loss
        )?;
        for h in &f.trained.history {
            writeln!(history, "{},{},{},{}", f.fold, h.epoch, h.train_loss, h.val_loss)?;
        }
        for p in &f.predictions {
            writeln!(preds, "{},{},{},{},{}", f.fold, p.clip_id, p.label, p.predicted, p.prob_true)?;
        }
        let mut confusion = String::from("true");
        for c in 0..class_count {
            write!(confusion, ",{c}")?;
        }
        confusion.push('\n');
        for (r, row) in f.confusion.iter().enumerate() {
            write!(confusion, "{r}")?;
            for v in row {
                write!(confusion, ",{v}")?;
            }
            confusion.push('\n');
        }
        std::fs::write(out_dir.join(format!("confusion_fold{}.csv", f.fold)), confusion)?;
        save_model(&f.trained.model, out_dir.join(format!("model_fold{}.mcm", f.fold)))?;
    }
    std::fs::write(out_dir.join("results.csv"), results)?;
    std::fs::write(out_dir.join("history.csv"), history)?;
    std::fs::write(out_dir.join("predictions.csv"), preds)?;
    Ok(())
}

/// Cross-validates and writes `config.txt`, `results.csv`, `history.csv`,
/// `predictions.csv`, `confusion_fold<i>.csv` and `model_fold<i>.mcm`.
pub fn cmd_xval(
    cfg: &ExperimentConfig,
    manifest: &Path,
    features_dir: &Path,
    out_dir: &Path,
    threads: usize,
) -> Result<XvalReport> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("config.txt"), cfg.to_text())?;
    let clips = load_clips(manifest, features_dir, cfg.features.n_mels)?;
    let xcfg = cfg.xval_config(threads)?;
    let report = cross_validate(&clips, &xcfg)?;
    fold_csvs(&report.folds, cfg.class_count, out_dir)?;
    Ok(report)
}

/// One fold of [`cmd_xval`], written to the same file layout.
pub fn cmd_train(
    cfg: &ExperimentConfig,
    manifest: &Path,
    features_dir: &Path,
    fold: usize,
    out_dir: &Path,
    threads: usize,
) -> Result<FoldResult> {
    if fold >= cfg.folds {
        bail!("fold {fold} out of range for {} folds", cfg.folds);
    }
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("config.txt"), cfg.to_text())?;
    let clips = load_clips(manifest, features_dir, cfg.features.n_mels)?;
    let xcfg = cfg.xval_config(threads)?;
    let result = pool(threads)?.install(|| run_fold(&clips, &xcfg, fold))?;
    fold_csvs(std::slice::from_ref(&result), cfg.class_count, out_dir)?;
    Ok(result)
}

/// Predicts every manifest clip. Returns the CSV text, accuracy and clip count.
pub fn cmd_eval(
    cfg: &ExperimentConfig,
    model_path: &Path,
    features_dir: &Path,
    manifest: &Path,
) -> Result<(String, f64, usize)> {
    let model: Model = load_model(model_path).with_context(|| format!("loading {}", model_path.display()))?;
    let clips = load_clips(manifest, features_dir, model.feature_len())?;
    let q = model.segment_len();
    let hop = if cfg.segment_hop == 0 { q } else { cfg.segment_hop };
    let std = model
        .standardizer
        .clone()
        .ok_or_else(|| anyhow!("{} carries no standardizer", model_path.display()))?;
    let mut csv = String::from("clip_id,true,pred,prob_true\n");
    let mut correct = 0;
    for clip in &clips {
        if clip.label >= model.class_count() {
            return Err(anyhow!(
                "clip '{}' has label {} but the model has {} classes",
                clip.clip_id,
                clip.label,
                model.class_count()
            ));
        }
        let prepared = prepare_clip(clip, &std, q, hop)?;
        let (pred, mean) = predict_clip(&model, &prepared.segments, cfg.voting)?;
        correct += usize::from(pred == clip.label);
        writeln!(csv, "{},{},{},{}", clip.clip_id, clip.label, pred, mean[clip.label])?;
    }
    Ok((csv, correct as f64 / clips.len() as f64, clips.len()))
}

/// Scans `<root>/<class>/*.wav` (sorted) and writes a manifest with
/// absolute paths and stratified folds.
pub fn cmd_manifest(root: &Path, classes: &[String], folds: usize, seed: u64, out: &Path) -> Result<Vec<ManifestRow>> {
    if classes.is_empty() {
        bail!("--classes is empty");
    }
    let root = root.canonicalize().with_context(|| root.display().to_string())?;
    let mut paths = Vec::new();
    let mut labels = Vec::new();
    for (label, name) in classes.iter().enumerate() {
        let dir = root.join(name);
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .with_context(|| dir.display().to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
            .collect();
        files.sort();
        labels.extend(std::iter::repeat_n(label, files.len()));
        paths.extend(files);
    }
    let assignment = stratified_folds(&labels, folds, seed)?;
    let rows: Vec<ManifestRow> = paths
        .into_iter()
        .zip(labels)
        .zip(assignment)
        .map(|((path, label), fold)| ManifestRow { path, label, fold })
        .collect();
    write_manifest(out, &rows)?;
    Ok(rows)
}
