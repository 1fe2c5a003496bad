//! One PASS/FAIL line per acceptance criterion; fails if any criterion does.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transeg::alignment::{write_pharaoh_file, AlignmentScore};
use transeg::corpus::{build_vocab, write_instances, SegmentationInstance};
use transeg::experiment::{run_experiment, run_sweep, ExperimentError, ExperimentSpec, KvConfig};
use transeg::model::{Arch, ConfigError, Intervention, ModelConfig, SegModel, Strategy, TranslationData};
use transeg::train::{levenshtein, predict, train, Regime, Scheduler, TrainConfig};
use transeg::trans_repr::{write_embeddings, ClsStrategy};

use common::gradcheck::{check_model, check_op, model_configs, op_cases};
use common::homographs::homograph_corpus;
use common::oracles::{check_metrics, random_pairs};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn gradient_fidelity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for c in op_cases() {
        let e = check_op(&c, 17);
        ensure(e < 1e-4, format!("{}: relative error {e:e}", c.name))?;
        worst = worst.max(e);
    }
    for cfg in model_configs() {
        let e = check_model(cfg.clone());
        ensure(e < 1e-4, format!("loss {:?}/{}/{}: relative error {e:e}", cfg.arch, cfg.enc_strategy, cfg.dec_strategy))?;
        worst = worst.max(e);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1}s"))?;
    Ok(format!("{} ops + {} model losses, max rel err {worst:.1e}, {secs:.1}s", op_cases().len(), model_configs().len()))
}

fn distribution_soundness() -> Outcome {
    let data = common::synthetic_corpus(8, 3);
    let (records, aligns) = common::random_translations(&data, 6, 4);
    let tr = TranslationData::new(records.iter().map(|r| (r.sentence_id.clone(), r.clone())).collect(), aligns);
    let (src, tgt) = build_vocab(&data).unwrap();
    let refs: Vec<&SegmentationInstance> = data.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for arch in [Arch::PointerGenerator, Arch::AttentiveLstm] {
        for enc in Strategy::ENCODER {
            for dec in Strategy::DECODER {
                for cls in ClsStrategy::ALL {
                    let cfg = ModelConfig {
                        arch,
                        emb: 4,
                        hid: 8,
                        enc_layers: rng.random_range(1..=2),
                        dec_layers: rng.random_range(1..=2),
                        trans_dim: 6,
                        ..ModelConfig::pointer_generator(4, 8)
                    }
                    .with_strategies(enc, dec, cls);
                    if cfg.validate().is_err() {
                        continue;
                    }
                    let mut model = SegModel::<f64>::new(cfg, src.clone(), tgt.clone(), rng.random()).unwrap();
                    let scale = rng.random_range(1.0..6.0);
                    for p in model.params_mut().iter_mut() {
                        p.value.data_mut().iter_mut().for_each(|x| *x *= scale);
                    }
                    let batch = model.batch(&refs, Some(&tr), true).unwrap();
                    for step in model.decoder_steps(&batch, Intervention::default()).unwrap() {
                        let (rows, cols) = step.final_dist.shape();
                        for r in 0..rows {
                            let row = &step.final_dist.data()[r * cols..(r + 1) * cols];
                            let sum: f64 = row.iter().sum();
                            ensure((sum - 1.0).abs() <= 1e-6, format!("{arch:?}/{enc}/{dec}/{cls}: row sums to {sum}"))?;
                            ensure(row.iter().all(|&p| p >= 0.0), format!("{arch:?}/{enc}/{dec}/{cls}: negative probability"))?;
                        }
                        if let Some(pg) = &step.p_gen {
                            ensure(pg.data().iter().all(|p| (0.0..=1.0).contains(p)), "p_gen outside [0, 1]")?;
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    ensure(checked >= 100, format!("only {checked} parameterizations"))?;
    Ok(format!("{checked} random parameterizations"))
}

/// Writes a 20-instance corpus with translations to `dir` and returns the
/// base experiment settings.
fn write_fixture(dir: &Path) -> KvConfig {
    let data = common::synthetic_corpus(20, 21);
    let (records, aligns) = common::random_translations(&data, 8, 22);
    fs::write(dir.join("train.tsv"), write_instances(&data)).unwrap();
    fs::write(dir.join("dev.tsv"), write_instances(&data[..8])).unwrap();
    fs::write(dir.join("emb.jsonl"), write_embeddings(&records)).unwrap();
    fs::write(dir.join("align.txt"), write_pharaoh_file(&aligns)).unwrap();
    let p = |f: &str| dir.join(f).display().to_string();
    KvConfig::parse(&format!(
        "data.train = {}\ndata.dev = {}\ndata.embeddings = {}\ndata.alignments = {}\n\
         model.emb = 8\nmodel.hid = 16\ntrain.max_epochs = 2\nexperiment.limits = all\nexperiment.seeds = 1\nexperiment.outdir = {}\n",
        p("train.tsv"),
        p("dev.tsv"),
        p("emb.jsonl"),
        p("align.txt"),
        p("out"),
    ))
    .unwrap()
}

fn strategy_matrix() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut c = write_fixture(dir.path());
    c.set("grid.enc", "Init-State, Concat, Concat-Half, None, Init-Char");
    c.set("grid.dec", "Concat-Half, Init-State, Concat, None");
    let spec = ExperimentSpec::from_config(&c).map_err(|e| e.to_string())?;
    let out = run_sweep(&spec).map_err(|e| e.to_string())?;
    let rows = &out.stage1.rows;
    ensure(rows.len() == 20, format!("{} rows", rows.len()))?;
    ensure(rows.iter().filter(|r| r.point.is_baseline()).count() == 1, "baseline row missing")?;
    ensure(rows.windows(2).all(|w| w[0].average >= w[1].average), "rows not sorted")?;
    let csv = fs::read_to_string(spec.run_root().join("sweep.csv")).unwrap();
    ensure(csv.lines().count() == 21, "sweep.csv does not have 20 data rows")?;
    ensure(fs::read_to_string(spec.run_root().join("sweep.txt")).unwrap().contains("_None_"), "baseline marker missing")?;

    c.set("grid.dec", "Init-Char");
    ensure(matches!(ExperimentSpec::from_config(&c), Err(ConfigError::InitCharDecoder)), "Init-Char decoder accepted by spec")?;
    let cfg = ModelConfig::pointer_generator(8, 16).with_strategies(Strategy::None, Strategy::InitChar, ClsStrategy::None);
    let (src, tgt) = build_vocab(&common::synthetic_corpus(4, 1)).unwrap();
    ensure(SegModel::<f32>::new(cfg, src, tgt, 0).is_err(), "Init-Char decoder accepted by model")?;
    Ok("20 rows incl. baseline, Init-Char decoder rejected".into())
}

fn copy_behavior() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzéñ".chars().collect();
    let words: Vec<String> = (0..100)
        .map(|_| (0..rng.random_range(1..12)).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect())
        .collect();
    let inst: Vec<SegmentationInstance> = words.iter().enumerate().map(|(i, w)| SegmentationInstance::new(w.clone(), w.clone(), format!("s{i}"), 0)).collect();
    let (src, tgt) = build_vocab(&inst).unwrap();
    let model = SegModel::<f32>::new(ModelConfig::pointer_generator(16, 32), src, tgt, 11).unwrap();
    let refs: Vec<&SegmentationInstance> = inst.iter().collect();
    let batch = model.batch(&refs, None, false).unwrap();
    let iv = Intervention {
        force_p_gen: Some(0.0),
        diagonal_attention: true,
    };
    let out = model.greedy_decode(&batch, iv).unwrap();
    let wrong = out.iter().zip(&words).filter(|(o, w)| o != w).count();
    ensure(wrong == 0, format!("{wrong} of 100 not reproduced"))?;
    Ok("100/100 strings reproduced".into())
}

fn overfit() -> Outcome {
    let data = common::synthetic_corpus(50, 11);
    let (src, tgt) = build_vocab(&data).unwrap();
    let mcfg = ModelConfig {
        emb: 64,
        hid: 128,
        ..Regime::Standard.model_config(Arch::PointerGenerator)
    };
    let mut model = SegModel::<f32>::new(mcfg, src, tgt, 11).unwrap();
    let cfg = TrainConfig {
        max_epochs: 300,
        stop_at_accuracy: Some(1.0),
        ..Regime::Standard.train_config(1)
    };
    let start = Instant::now();
    let outcome = train(&mut model, &data, &data, None, &cfg, |_| {}).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let preds = predict(&model, &data, None, 64).unwrap();
    let acc = preds.iter().zip(&data).filter(|(p, d)| **p == d.canonical).count() as f64 / data.len() as f64;
    ensure(acc == 1.0, format!("train accuracy {acc:.3} after {} epochs", outcome.history.len()))?;
    ensure(secs < 300.0, format!("took {secs:.1}s"))?;
    Ok(format!("100% train accuracy at epoch {}, {secs:.1}s", outcome.best_epoch.unwrap()))
}

fn translation_signal() -> Outcome {
    let h = homograph_corpus(40, 2, 16, 0.05, 5);
    let run = |enc, dec| {
        let (src, tgt) = build_vocab(&h.train).unwrap();
        let mcfg = ModelConfig {
            dropout: 0.0,
            trans_dim: h.dim,
            ..ModelConfig::pointer_generator(32, 64)
        }
        .with_strategies(enc, dec, ClsStrategy::None);
        let mut model = SegModel::<f32>::new(mcfg, src, tgt, 1).unwrap();
        let cfg = TrainConfig {
            max_epochs: 60,
            batch_size: 16,
            scheduler: Scheduler::Constant,
            stop_at_accuracy: Some(1.0),
            ..Regime::Standard.train_config(1)
        };
        train(&mut model, &h.train, &h.dev, Some(&h.translations), &cfg, |_| {}).unwrap().best_dev_accuracy.unwrap()
    };
    let tams = run(Strategy::InitState, Strategy::ConcatHalf);
    let base = run(Strategy::None, Strategy::None);
    ensure(tams >= 0.9 && base <= 0.6, format!("TAMS {:.1}%, baseline {:.1}%", 100.0 * tams, 100.0 * base))?;
    Ok(format!("TAMS {:.1}% vs baseline {:.1}% on {} homograph dev items", 100.0 * tams, 100.0 * base, h.dev.len()))
}

fn metric_oracles() -> Outcome {
    let dev = check_metrics(&random_pairs(1000, 2024))?;
    ensure(levenshtein("kitten", "sitting") == 3, "kitten/sitting != 3")?;
    Ok(format!("1000 pairs exact, F1 deviation {dev:.1e}"))
}

fn alignment_table() -> Outcome {
    let s = AlignmentScore::from_pr(0.1637, 0.1846);
    ensure((s.f1 - 0.1735).abs() <= 5e-4, format!("F1 {:.5}", s.f1))?;
    Ok(format!("F1 {:.4}", s.f1))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut c = write_fixture(dir.path());
    c.set("grid.enc", "Init-State, None");
    c.set("grid.dec", "Concat-Half, None");
    c.set("grid.cls", "CLS-Avg");
    c.set("experiment.limits", "10, all");
    c.set("experiment.seeds", "1, 2");
    c.set("experiment.workers", "2");
    let mut roots = Vec::new();
    for out in ["a", "b"] {
        c.set("experiment.outdir", dir.path().join(out).display().to_string());
        let spec = ExperimentSpec::from_config(&c).map_err(|e| e.to_string())?;
        run_experiment(&spec).map_err(|e: ExperimentError| e.to_string())?;
        roots.push(spec.run_root());
    }
    let mut files = 0;
    for f in ["runs.csv", "summary.csv", "results.txt", "results_std.txt"] {
        ensure(fs::read(roots[0].join(f)).unwrap() == fs::read(roots[1].join(f)).unwrap(), format!("{f} differs"))?;
        files += 1;
    }
    Ok(format!("{files} report files byte-identical across runs"))
}

fn baseline_invariance() -> Outcome {
    let data = common::synthetic_corpus(10, 8);
    let tables: Vec<TranslationData> = [31, 32]
        .into_iter()
        .map(|seed| {
            let (records, aligns) = common::random_translations(&data, 8, seed);
            TranslationData::new(records.into_iter().map(|r| (r.sentence_id.clone(), r)).collect(), aligns)
        })
        .collect();
    let (src, tgt) = build_vocab(&data).unwrap();
    let refs: Vec<&SegmentationInstance> = data.iter().collect();
    for arch in [Arch::PointerGenerator, Arch::AttentiveLstm] {
        let cfg = ModelConfig { arch, trans_dim: 8, ..ModelConfig::pointer_generator(8, 16) };
        let model = SegModel::<f32>::new(cfg, src.clone(), tgt.clone(), 2).unwrap();
        let logits = |tr: Option<&TranslationData>| -> Vec<u32> {
            let batch = model.batch(&refs, tr, true).unwrap();
            model.decoder_steps(&batch, Intervention::default()).unwrap().iter().flat_map(|s| s.logits.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>()).collect()
        };
        let a = logits(Some(&tables[0]));
        ensure(a == logits(Some(&tables[1])) && a == logits(None), format!("{arch:?} logits depend on the embedding file"))?;
    }
    Ok("logits bitwise identical across embedding files".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 10] = [
        ("gradient fidelity", gradient_fidelity),
        ("distribution soundness", distribution_soundness),
        ("strategy-matrix coverage", strategy_matrix),
        ("copy behavior", copy_behavior),
        ("overfit", overfit),
        ("translation signal", translation_signal),
        ("metric oracles", metric_oracles),
        ("alignment table consistency", alignment_table),
        ("determinism", determinism),
        ("baseline invariance", baseline_invariance),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name:<28} {detail}"),
            Err(why) => {
                println!("FAIL  {name:<28} {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
