use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn transeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transeg")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = transeg(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Preprocesses the fixture corpus and writes a small-model config.
fn setup(dir: &Path) -> PathBuf {
    ok(&["preprocess", "--igt", s(&fixture("corpus.igt")), "--outdir", s(&dir.join("data")), "--seed", "1"]);
    let cfg = dir.join("exp.cfg");
    let d = dir.join("data");
    fs::write(
        &cfg,
        format!(
            "data.train = {}\ndata.dev = {}\ndata.test = {}\ndata.embeddings = {}\ndata.alignments = {}\n\
             model.emb = 8\nmodel.hid = 16\ntrain.max_epochs = 2\nexperiment.limits = 5, all\n",
            s(&d.join("train.tsv")),
            s(&d.join("dev.tsv")),
            s(&d.join("test.tsv")),
            s(&fixture("embeddings.jsonl")),
            s(&fixture("alignments.txt")),
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn preprocess_writes_splits() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["preprocess", "--igt", s(&fixture("corpus.igt")), "--outdir", s(dir.path()), "--seed", "3"]);
    assert!(out.contains("instances"));
    for f in ["instances.tsv", "train.tsv", "dev.tsv", "test.tsv", "translations.tsv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let translations = fs::read_to_string(dir.path().join("translations.tsv")).unwrap();
    assert!(translations.lines().all(|l| l.starts_with('s') && l.contains('\t')));
}

#[test]
fn align_eval_scores() {
    let out = ok(&["align-eval", "--pred", s(&fixture("alignments.txt")), "--gold", s(&fixture("gold_alignments.txt"))]);
    assert!(out.contains("precision\t") && out.contains("f1\t"));
    let same = ok(&["align-eval", "--pred", s(&fixture("gold_alignments.txt")), "--gold", s(&fixture("gold_alignments.txt"))]);
    assert!(same.contains("f1\t1.0000"));
}

#[test]
fn full_pipeline_dry_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let out = dir.path().join("out");
    let text = ok(&["train", "--config", s(&cfg), "--outdir", s(&out), "--seeds", "1,2", "--enc", "Init-State", "--dec", "Concat-Half", "--cls", "CLS-Avg"]);
    assert!(text.contains("4 runs"));
    let run_root = fs::read_dir(out.join("runs")).unwrap().next().unwrap().unwrap().path();
    let run = run_root.join("Init-State_Concat-Half_CLS-Avg/5/1");
    for f in ["model.ckpt", "predictions.tsv", "metrics.tsv", "history.tsv"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(run_root.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);

    let eval = ok(&[
        "evaluate",
        "--checkpoint",
        s(&run.join("model.ckpt")),
        "--data",
        s(&dir.path().join("data/test.tsv")),
        "--embeddings",
        s(&fixture("embeddings.jsonl")),
        "--alignments",
        s(&fixture("alignments.txt")),
        "--outdir",
        s(&dir.path().join("eval")),
    ]);
    assert!(eval.contains("accuracy\t"));
    assert!(dir.path().join("eval/predictions.tsv").exists());

    let report = ok(&["report", "--runs", s(&run_root.join("runs.csv")), "--outdir", s(&dir.path().join("rep"))]);
    assert!(report.contains("Acc"));
    assert_eq!(fs::read(run_root.join("summary.csv")).unwrap(), fs::read(dir.path().join("rep/summary.csv")).unwrap());
}

#[test]
fn sweep_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let out = ok(&[
        "sweep",
        "--config",
        s(&cfg),
        "--outdir",
        s(&dir.path().join("sw")),
        "--limits",
        "all",
        "--enc",
        "Init-State,Concat,Concat-Half,None,Init-Char",
        "--dec",
        "Concat-Half,Init-State,Concat,None",
        "--set",
        "sweep.stage2=Init-State/Concat-Half",
    ]);
    assert!(out.contains("_None_"));
    let root = fs::read_dir(dir.path().join("sw/runs")).unwrap().next().unwrap().unwrap().path();
    assert_eq!(fs::read_to_string(root.join("sweep.csv")).unwrap().lines().count(), 21);
    assert_eq!(fs::read_to_string(root.join("cls_sweep.csv")).unwrap().lines().count(), 5);

    let a = ok(&["search", "--n", "5", "--seed", "9"]);
    assert_eq!(a.lines().count(), 6);
    assert_eq!(a, ok(&["search", "--n", "5", "--seed", "9"]));
}

#[test]
fn baseline_without_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let d = dir.path().join("data");
    let args = |out: &Path| {
        vec![
            "train".to_owned(),
            "--train".into(),
            s(&d.join("train.tsv")).into(),
            "--dev".into(),
            s(&d.join("dev.tsv")).into(),
            "--outdir".into(),
            s(out).into(),
            "--seeds".into(),
            "1".into(),
            "--max-epochs".into(),
            "2".into(),
            "--set".into(),
            "model.emb=8".into(),
            "--set".into(),
            "model.hid=16".into(),
        ]
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    ok(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    let hash = fs::read_dir(a.join("runs")).unwrap().next().unwrap().unwrap().file_name();
    for f in ["runs.csv", "summary.csv", "results.txt", "results_std.txt"] {
        assert_eq!(fs::read(a.join("runs").join(&hash).join(f)).unwrap(), fs::read(b.join("runs").join(&hash).join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    assert_eq!(transeg(&["train", "--config", s(&cfg), "--dec", "Init-Char"]).status.code(), Some(2));
    assert_eq!(transeg(&["train", "--config", s(&cfg), "--set", "model.emb=abc"]).status.code(), Some(2));
    assert_eq!(transeg(&["train", "--config", s(&cfg), "--enc", "Init-State", "--set", "data.embeddings="]).status.code(), Some(2));
    assert_eq!(transeg(&["train", "--config", s(&cfg), "--train", "/nonexistent/train.tsv"]).status.code(), Some(3));
    assert_eq!(transeg(&["align-eval", "--pred", s(&cfg), "--gold", s(&fixture("gold_alignments.txt"))]).status.code(), Some(3));
    assert_eq!(transeg(&["preprocess"]).status.code(), Some(2));
    assert_eq!(transeg(&["no-such-command"]).status.code(), Some(2));
}
