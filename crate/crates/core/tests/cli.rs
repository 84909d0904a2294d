use std::path::Path;
use std::process::Command;

fn mclnn(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mclnn")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TINY: &str = "features.mels=32
plan.n=1
plan.k=2
arch.e=8
arch.bw=4
arch.ov=-1
arch.dense=6
arch.class_count=3
train.batch_size=10
train.max_epochs=3
";

const TINY_SYNTH: &str = "class_count=3\nclips_per_class=10\nseconds=1.0\n";

/// Synth + features for the tiny 3-class corpus.
fn tiny_corpus(dir: &Path) {
    std::fs::write(dir.join("tiny.cfg"), TINY).unwrap();
    std::fs::write(dir.join("synth.txt"), TINY_SYNTH).unwrap();
    let wav = dir.join("wav");
    assert_eq!(mclnn(&["synth", "--spec", p(&dir.join("synth.txt")), "--out-dir", p(&wav)]).0, 0);
    let (code, out, err) = mclnn(&[
        "features",
        "--config",
        p(&dir.join("tiny.cfg")),
        "--manifest",
        p(&wav.join("manifest.csv")),
        "--out-dir",
        p(&dir.join("feat")),
    ]);
    assert_eq!(code, 0, "{out}{err}");
}

#[test]
fn mask_pgm_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.pgm");
    let (code, _, err) = mclnn(&["mask", "--l", "9", "--e", "9", "--bw", "3", "--ov", "-1", "--out", p(&out)]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("P2\n9 9\n1\n"));
    // first feature row: nodes 1, 4 and 7 all see feature 1
    assert_eq!(text.lines().nth(3).unwrap().split_whitespace().collect::<Vec<_>>(), ["1", "0", "0", "1", "0", "0", "1", "0", "0"]);
}

#[test]
fn mask_errors_and_table_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let (code, _, err) = mclnn(&["mask", "--l", "9", "--e", "9", "--bw", "0", "--ov", "-1", "--out", p(&out)]);
    assert_eq!(code, 1);
    assert!(err.contains("Bandwidth"), "{err}");
    let (code, _, err) = mclnn(&["mask", "--l", "9", "--e", "9", "--bw", "3", "--ov", "3", "--out", p(&out)]);
    assert_eq!(code, 1);
    assert!(err.contains("Overlap"), "{err}");
    let (code, _, _) = mclnn(&["mask", "--l", "256", "--e", "220", "--bw", "40", "--ov", "-10", "--out", p(&out)]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 256);
}

#[test]
fn features_report_and_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (i, secs) in [0.5, 0.75, 1.0].iter().enumerate() {
        let n = (22050.0 * secs) as usize;
        let samples: Vec<f64> = (0..n).map(|t| 0.3 * (t as f64 * 0.05 * (i + 1) as f64).sin()).collect();
        mclnn::features::write_wav(d.join(format!("c{i}.wav")), 22050, &samples).unwrap();
    }
    std::fs::write(d.join("m.csv"), "path,label,fold\nc0.wav,0,0\nc1.wav,1,0\nc2.wav,0,1\n").unwrap();
    let run = |out: &str| mclnn(&["features", "--manifest", p(&d.join("m.csv")), "--out-dir", p(&d.join(out))]);
    let (code, out, err) = run("a");
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("3 ok, 0 skipped"), "{out}");
    run("b");
    for i in 0..3 {
        let name = format!("c{i}.mcf");
        assert_eq!(std::fs::read(d.join("a").join(&name)).unwrap(), std::fs::read(d.join("b").join(&name)).unwrap());
    }
    let features = std::fs::read_to_string(d.join("a/features.csv")).unwrap();
    assert_eq!(features.lines().count(), 4);
}

#[test]
fn features_skip_short_clip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    mclnn::features::write_wav(d.join("ok.wav"), 22050, &vec![0.1; 4096]).unwrap();
    mclnn::features::write_wav(d.join("tiny.wav"), 22050, &vec![0.1; 1000]).unwrap();
    std::fs::write(d.join("m.csv"), "path,label,fold\nok.wav,0,0\ntiny.wav,1,0\n").unwrap();
    let (code, out, _) = mclnn(&["features", "--manifest", p(&d.join("m.csv")), "--out-dir", p(&d.join("f"))]);
    assert_eq!(code, 2);
    assert!(out.starts_with("1 ok, 1 skipped"), "{out}");
    assert!(out.contains("tiny.wav"));
    assert!(!d.join("f/tiny.mcf").exists());
}

#[test]
fn unknown_config_key_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "plan.n=4\ntrain.learning_rate=0.1\n").unwrap();
    let (code, _, err) = mclnn(&["--config", p(&cfg), "mask", "--l", "4", "--e", "4", "--bw", "2", "--ov", "0", "--out", p(&dir.path().join("m.csv"))]);
    assert_eq!(code, 1);
    assert!(err.contains("train.learning_rate"), "{err}");
}

#[test]
fn xval_rejects_segment_longer_than_clip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    tiny_corpus(d);
    // the default order n=20 needs 96 frames; one-second clips have 20
    std::fs::write(d.join("long.cfg"), "features.mels=32\narch.class_count=3\n").unwrap();
    let (code, _, err) = mclnn(&[
        "xval",
        "--config",
        p(&d.join("long.cfg")),
        "--manifest",
        p(&d.join("wav/manifest.csv")),
        "--features-dir",
        p(&d.join("feat")),
        "--out-dir",
        p(&d.join("x")),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("segment longer than clip"), "{err}");
}

#[test]
fn xval_outputs_and_eval_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    tiny_corpus(d);
    let manifest = d.join("wav/manifest.csv");
    let (code, out, err) = mclnn(&[
        "xval",
        "--config",
        p(&d.join("tiny.cfg")),
        "--manifest",
        p(&manifest),
        "--features-dir",
        p(&d.join("feat")),
        "--out-dir",
        p(&d.join("x")),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.trim_end().lines().last().unwrap().contains(" ± "), "{out}");

    let results = std::fs::read_to_string(d.join("x/results.csv")).unwrap();
    assert_eq!(results.lines().next().unwrap(), "fold,clip_accuracy,epochs_trained,best_val_loss");
    assert_eq!(results.lines().count(), 11);
    let history = std::fs::read_to_string(d.join("x/history.csv")).unwrap();
    assert_eq!(history.lines().next().unwrap(), "fold,epoch,train_loss,val_loss");
    let confusion = std::fs::read_to_string(d.join("x/confusion_fold0.csv")).unwrap();
    let counted: usize = confusion
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(|v| v.parse::<usize>().unwrap()).collect::<Vec<_>>())
        .sum();
    assert_eq!(counted, 3);
    assert_eq!(
        std::fs::read_to_string(d.join("x/config.txt")).unwrap(),
        mclnn::config::ExperimentConfig::parse(TINY).unwrap().to_text()
    );

    // the fold-0 model re-predicts its own test clips exactly
    let text = std::fs::read_to_string(&manifest).unwrap();
    let rows = manifest_rows(&text, 0);
    std::fs::write(d.join("wav/fold0.csv"), format!("path,label,fold\n{}\n", rows.join("\n"))).unwrap();
    let (code, csv, err) = mclnn(&[
        "--config",
        p(&d.join("tiny.cfg")),
        "eval",
        "--model",
        p(&d.join("x/model_fold0.mcm")),
        "--features",
        p(&d.join("feat")),
        "--manifest",
        p(&d.join("wav/fold0.csv")),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(csv.lines().next().unwrap(), "clip_id,true,pred,prob_true");
    let expected: Vec<String> = std::fs::read_to_string(d.join("x/predictions.csv"))
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("0,"))
        .map(|l| l[2..].to_string())
        .collect();
    assert_eq!(csv.lines().skip(1).collect::<Vec<_>>(), expected);
    let accuracy: f64 = results.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(err.contains(&format!("accuracy {accuracy:.4}")), "{err}");
}

fn manifest_rows(text: &str, fold: usize) -> Vec<&str> {
    text.lines()
        .skip(1)
        .filter(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap() == fold)
        .collect()
}

#[test]
fn eval_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    tiny_corpus(d);
    let (code, _, err) = mclnn(&[
        "--config",
        p(&d.join("tiny.cfg")),
        "train",
        "--manifest",
        p(&d.join("wav/manifest.csv")),
        "--features-dir",
        p(&d.join("feat")),
        "--out-dir",
        p(&d.join("t")),
        "--fold",
        "4",
    ]);
    assert_eq!(code, 0, "{err}");
    let model = d.join("t/model_fold4.mcm");
    assert!(model.exists());

    std::fs::write(d.join("wav/empty.csv"), "path,label,fold\n").unwrap();
    let (code, _, err) = mclnn(&[
        "eval",
        "--model",
        p(&model),
        "--features",
        p(&d.join("feat")),
        "--manifest",
        p(&d.join("wav/empty.csv")),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("no clips"), "{err}");

    // 256-dim features against a 32-dim model
    let wide = d.join("wide");
    std::fs::create_dir(&wide).unwrap();
    let clip = mclnn::features::FeatureClip::from_mat(&mclnn::numerics::Mat::zeros(20, 256), 0, "class0_000", 0);
    mclnn::features::write_features(&clip, wide.join("class0_000.mcf")).unwrap();
    std::fs::write(d.join("wav/one.csv"), "path,label,fold\nclass0_000.wav,0,0\n").unwrap();
    let (code, _, err) = mclnn(&[
        "eval",
        "--model",
        p(&model),
        "--features",
        p(&wide),
        "--manifest",
        p(&d.join("wav/one.csv")),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("feature_dim"), "{err}");
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("s.txt"), "clips_per_class=10\nseconds=0.25\n").unwrap();
    for out in ["a", "b"] {
        let (code, _, err) = mclnn(&["synth", "--spec", p(&d.join("s.txt")), "--out-dir", p(&d.join(out))]);
        assert_eq!(code, 0, "{err}");
    }
    let manifest = std::fs::read_to_string(d.join("a/manifest.csv")).unwrap();
    assert_eq!(manifest, std::fs::read_to_string(d.join("b/manifest.csv")).unwrap());
    assert_eq!(manifest.lines().count(), 81);
    for name in ["class0_000.wav", "class7_009.wav"] {
        assert_eq!(std::fs::read(d.join("a").join(name)).unwrap(), std::fs::read(d.join("b").join(name)).unwrap());
    }
}

#[test]
fn manifest_helper_scans_class_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (c, n) in [("Jive", 3), ("Tango", 4)] {
        std::fs::create_dir(d.join(c)).unwrap();
        for i in 0..n {
            mclnn::features::write_wav(d.join(c).join(format!("{i}.wav")), 22050, &[0.0; 8]).unwrap();
        }
    }
    let out = d.join("m.csv");
    let (code, _, err) = mclnn(&["manifest", "--root", p(d), "--classes", "Jive,Tango", "--out", p(&out)]);
    assert_eq!(code, 1, "three folds need three clips per class");
    assert!(err.contains("fewer than 10 folds"), "{err}");

    let cfg = d.join("c.cfg");
    std::fs::write(&cfg, "train.folds=3\n").unwrap();
    let (code, _, err) = mclnn(&["--config", p(&cfg), "manifest", "--root", p(d), "--classes", "Jive,Tango", "--out", p(&out)]);
    assert_eq!(code, 0, "{err}");
    let rows = mclnn::features::read_manifest(&out).unwrap();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows.iter().filter(|r| r.label == 1).count(), 4);
    assert!(rows.iter().all(|r| r.path.is_absolute() && r.fold < 3));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let ballroom = mclnn::config::ExperimentConfig::load(&root.join("ballroom.cfg")).unwrap();
    assert_eq!(ballroom, mclnn::config::ExperimentConfig::default());
    assert_eq!(ballroom.segment_len().unwrap(), 96);
    let synthetic = mclnn::config::ExperimentConfig::load(&root.join("synthetic.cfg")).unwrap();
    assert_eq!((synthetic.order, synthetic.surviving, synthetic.width), (5, 6, 64));
    assert_eq!(synthetic.architecture().mask, Some((12, -3)));
}
