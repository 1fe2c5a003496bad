use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::autodiff::{adam_step, clip_grad_norm, AdamState, PlateauScheduler, Real, WarmupInvSqrt};
use crate::corpus::SegmentationInstance;
use crate::model::{Intervention, ModelError, SegModel, TranslationData};

use super::{edit_distance_total, morpheme_f1, whole_word_accuracy, F1Mode, Prf, Scheduler, TrainConfig, TrainError};

/// Index groups for one epoch: a seeded shuffle cut into `batch_size` chunks.
pub fn make_batches(n: usize, batch_size: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    x ^= x >> 31;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^ (x >> 29)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub dev_accuracy: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainOutcome {
    pub history: Vec<EpochRecord>,
    /// 1-based epoch whose parameters the model now holds; `None` if no
    /// epoch ran.
    pub best_epoch: Option<usize>,
    pub best_dev_accuracy: Option<f64>,
}

/// Trains `model` in place and leaves it holding the parameters from the
/// epoch with the best dev whole-word accuracy (earliest on ties).
pub fn train<T: Real>(
    model: &mut SegModel<T>,
    train_set: &[SegmentationInstance],
    dev_set: &[SegmentationInstance],
    translations: Option<&TranslationData>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if cfg.max_epochs == 0 {
        return Ok(TrainOutcome::default());
    }
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    let mut adam = AdamState::<T>::new(cfg.lr, cfg.beta1, cfg.beta2);
    let mut plateau = match cfg.scheduler {
        Scheduler::Plateau { factor, patience, min_lr } => Some(PlateauScheduler::new(cfg.lr, factor, patience, min_lr)),
        _ => None,
    };
    let warmup = match cfg.scheduler {
        Scheduler::WarmupInvSqrt { warmup_samples } => Some(WarmupInvSqrt {
            base_lr: cfg.lr,
            warmup_samples,
        }),
        _ => None,
    };
    let mut samples_seen = 0u64;
    let mut outcome = TrainOutcome::default();
    let mut best = None;

    for epoch in 1..=cfg.max_epochs {
        let groups = make_batches(train_set.len(), cfg.batch_size, mix(cfg.seed, epoch as u64, 0));
        let (mut total, mut count) = (0.0, 0usize);
        for (k, idx) in groups.iter().enumerate() {
            let items: Vec<&SegmentationInstance> = idx.iter().map(|&i| &train_set[i]).collect();
            let batch = model.batch(&items, translations, true)?;
            let (loss, grads) = model.loss_and_grads(&batch, true, mix(cfg.seed, epoch as u64, k as u64 + 1))?;
            if !loss.is_finite() {
                return Err(TrainError::NonFinite { epoch, batch: k });
            }
            let params = model.params_mut();
            params.accumulate(&grads);
            if let Some(c) = cfg.clip_norm {
                clip_grad_norm(params, c);
            }
            samples_seen += items.len() as u64;
            if let Some(w) = &warmup {
                adam.lr = w.lr_at(samples_seen);
            }
            adam_step(params, &mut adam);
            total += loss * items.len() as f64;
            count += items.len();
        }
        let preds = predict(model, dev_set, translations, cfg.eval_batch_size)?;
        let golds: Vec<&str> = dev_set.iter().map(|i| i.canonical.as_str()).collect();
        let acc = whole_word_accuracy(&preds.iter().map(String::as_str).collect::<Vec<_>>(), &golds)?;
        let lr_used = adam.lr;
        if let Some(p) = plateau.as_mut() {
            adam.lr = p.step(acc);
        }
        let rec = EpochRecord {
            epoch,
            loss: total / count as f64,
            dev_accuracy: acc,
            lr: lr_used,
        };
        on_epoch(&rec);
        outcome.history.push(rec);
        if outcome.best_dev_accuracy.is_none_or(|b| acc > b) {
            outcome.best_dev_accuracy = Some(acc);
            outcome.best_epoch = Some(epoch);
            best = Some(model.params().clone());
        }
        if cfg.stop_at_accuracy.is_some_and(|t| acc >= t) {
            break;
        }
    }
    if let Some(best) = best {
        model.params_mut().load_values(&best)?;
    }
    Ok(outcome)
}

/// Greedy predictions, decoded in parallel chunks of `batch_size`.
pub fn predict<T: Real>(
    model: &SegModel<T>,
    instances: &[SegmentationInstance],
    translations: Option<&TranslationData>,
    batch_size: usize,
) -> Result<Vec<String>, ModelError> {
    let chunks: Vec<Vec<String>> = instances
        .par_chunks(batch_size.max(1))
        .map(|chunk| {
            let items: Vec<&SegmentationInstance> = chunk.iter().collect();
            let batch = model.batch(&items, translations, false)?;
            model.greedy_decode(&batch, Intervention::default())
        })
        .collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Predictions and the three metrics on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<String>,
    pub accuracy: f64,
    pub edit_distance: usize,
    pub morphemes: Prf,
}

pub fn evaluate<T: Real>(
    model: &SegModel<T>,
    instances: &[SegmentationInstance],
    translations: Option<&TranslationData>,
    separator: char,
    mode: F1Mode,
    batch_size: usize,
) -> Result<Evaluation, TrainError> {
    let predictions = predict(model, instances, translations, batch_size)?;
    let preds: Vec<&str> = predictions.iter().map(String::as_str).collect();
    let golds: Vec<&str> = instances.iter().map(|i| i.canonical.as_str()).collect();
    Ok(Evaluation {
        accuracy: whole_word_accuracy(&preds, &golds)?,
        edit_distance: edit_distance_total(&preds, &golds)?,
        morphemes: morpheme_f1(&preds, &golds, separator, mode)?,
        predictions,
    })
}
