//! Mini-batch training with a stratified validation split and early stopping
//! on validation micro-F1.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::fusion::FusionParameters;
use super::logistic::LogisticParameters;
use super::rng::XorShiftStar;
use super::{Classifier, ModelConfig};
use crate::error::{Error, Result};
use crate::eval::micro_f1_from_classes;

/// One training instance: embedding block, auxiliary block and class index.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub embed: Vec<f64>,
    pub aux: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub val_micro_f1: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingLog {
    /// `epoch<TAB>mean_loss<TAB>val_micro_f1`, full precision.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\tmean_loss\tval_micro_f1\n");
        for r in &self.epochs {
            let _ = writeln!(out, "{}\t{:?}\t{:?}", r.epoch, r.mean_loss, r.val_micro_f1);
        }
        out
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs
            .iter()
            .fold(None, |best: Option<&EpochRecord>, r| match best {
                Some(b) if b.val_micro_f1 >= r.val_micro_f1 => Some(b),
                _ => Some(r),
            })
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub log: TrainingLog,
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
}

/// Per-class seeded split: `round(n_c * fraction)` of each class goes to
/// validation, always leaving at least one training example per class.
pub fn stratified_split(labels: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = XorShiftStar::stream(seed, 2);
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (_, mut idx) in by_class {
        rng.shuffle(&mut idx);
        let n = idx.len();
        let n_val = ((n as f64 * fraction).round() as usize).min(n.saturating_sub(1));
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn evaluate<M: Classifier>(model: &M, data: &[Example], idx: &[usize]) -> Result<f64> {
    let mut preds = Vec::with_capacity(idx.len());
    let mut golds = Vec::with_capacity(idx.len());
    for &i in idx {
        preds.push(model.predict(&data[i].embed, &data[i].aux)?.class);
        golds.push(data[i].label);
    }
    Ok(micro_f1_from_classes(&preds, &golds))
}

fn check_dataset(data: &[Example], cfg: &ModelConfig) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for ex in data {
        super::check_dim("embedding input", cfg.d_embed, ex.embed.len())?;
        super::check_dim("auxiliary input", cfg.d_aux, ex.aux.len())?;
        if ex.label >= cfg.n_classes {
            return Err(Error::Config(format!(
                "label {} out of range for {} classes",
                ex.label, cfg.n_classes
            )));
        }
    }
    Ok(())
}

fn fit<M: Classifier>(
    mut model: M,
    data: &[Example],
    cfg: &ModelConfig,
) -> Result<TrainOutcome<M>> {
    check_dataset(data, cfg)?;
    let labels: Vec<usize> = data.iter().map(|e| e.label).collect();
    let (train_idx, val_idx) = stratified_split(&labels, cfg.validation_fraction, cfg.seed);

    let mut present = vec![false; cfg.n_classes];
    train_idx
        .iter()
        .for_each(|&i| present[data[i].label] = true);
    let missing = present.iter().filter(|p| !**p).count();
    if missing > 0 {
        log::warn!(
            "{missing} of {} classes have no training examples",
            cfg.n_classes
        );
    }
    let selection_idx = if val_idx.is_empty() {
        log::warn!("validation split is empty; selecting epochs on training data");
        train_idx.clone()
    } else {
        val_idx.clone()
    };

    let mut rng = XorShiftStar::stream(cfg.seed, 3);
    let mut log = TrainingLog::default();
    let mut best: Option<(f64, M)> = None;
    let mut stale = 0usize;
    let mut order = train_idx.clone();

    for epoch in 1..=cfg.max_epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&super::Example> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, grads) = model.batch_gradients(&batch, &mut rng)?;
            loss_sum += loss;
            model.apply_gradients(&grads);
        }
        let mean_loss = loss_sum / order.len() as f64;
        let val_micro_f1 = evaluate(&model, data, &selection_idx)?;
        log.epochs.push(EpochRecord {
            epoch,
            mean_loss,
            val_micro_f1,
        });
        log::debug!("epoch {epoch}: loss {mean_loss:.6} val micro-F1 {val_micro_f1:.4}");

        let improved = best.as_ref().is_none_or(|(f1, _)| val_micro_f1 > *f1);
        if improved {
            best = Some((val_micro_f1, model.clone()));
            stale = 0;
        } else {
            stale += 1;
            if cfg.patience > 0 && stale >= cfg.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome {
        model: best.map(|(_, m)| m).unwrap_or(model),
        log,
        train_indices: train_idx,
        validation_indices: val_idx,
    })
}

/// Trains the fusion network, returning the best-validation parameters.
pub fn train(data: &[Example], cfg: &ModelConfig) -> Result<TrainOutcome<FusionParameters>> {
    fit(FusionParameters::init(cfg)?, data, cfg)
}

/// Same split and optimizer as [`train`], for softmax regression.
pub fn train_logistic_baseline(
    data: &[Example],
    cfg: &ModelConfig,
) -> Result<TrainOutcome<LogisticParameters>> {
    fit(LogisticParameters::init(cfg)?, data, cfg)
}
