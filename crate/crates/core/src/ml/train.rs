use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cnn::{cross_entropy, Arch, Cnn, Params, Real};
use super::dataset::{Dataset, Sample, Split};
use super::eval::{evaluate, Evaluation};
use super::MlError;
use crate::dsp::Heatmap;
use crate::gesture::{Arm, Gesture};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub conv1: usize,
    pub conv2: usize,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 3,
            batch_size: 64,
            learning_rate: 1e-3,
            conv1: 128,
            conv2: 128,
            hidden: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub arm: Arm,
    pub labels: Vec<Gesture>,
    pub config: TrainConfig,
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub epochs: Vec<EpochReport>,
    /// 1-based epoch of the returned checkpoint.
    pub selected_epoch: usize,
    pub train_accuracy: f64,
    pub test: Option<Evaluation>,
}

/// Adam state for every trainable tensor.
struct Adam<F> {
    m: Params<F>,
    v: Params<F>,
    t: i32,
    lr: f64,
}

impl<F: Real> Adam<F> {
    fn new(arch: &Arch, lr: f64) -> Self {
        Self {
            m: Params::zeros(arch),
            v: Params::zeros(arch),
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut Params<F>, grad: &Params<F>) {
        let (b1, b2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
        self.t += 1;
        let step = self.lr * (1.0 - b2.powi(self.t)).sqrt() / (1.0 - b1.powi(self.t));
        let f = |v: f64| F::from_f64(v).unwrap();
        let (b1f, b2f, stepf, epsf) = (f(b1), f(b2), f(step), f(eps));
        let one = F::one();
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            for i in 0..p.len() {
                m[i] = b1f * m[i] + (one - b1f) * g[i];
                v[i] = b2f * v[i] + (one - b2f) * g[i] * g[i];
                p[i] -= stepf * m[i] / (v[i].sqrt() + epsf);
            }
        }
    }
}

fn class_indices(labels: &[Gesture], samples: &[&Sample]) -> Vec<usize> {
    samples
        .iter()
        .map(|s| {
            labels
                .iter()
                .position(|&g| g == s.label)
                .expect("label in vocabulary")
        })
        .collect()
}

fn mean_loss<F: Real>(
    model: &Cnn<F>,
    samples: &[&Sample],
    labels: &[usize],
) -> Result<f64, MlError> {
    let mut total = 0.0;
    for (chunk, y) in samples.chunks(256).zip(labels.chunks(256)) {
        let hs: Vec<&Heatmap> = chunk.iter().map(|s| &s.heatmap).collect();
        let probs = model.forward_eval(&model.input(&hs)?);
        total += cross_entropy(&probs, y).to_f64().unwrap() * chunk.len() as f64;
    }
    Ok(total / samples.len() as f64)
}

/// Trains a classifier on the `Train` trials of a split dataset, keeping the
/// epoch checkpoint with the lowest validation cross-entropy. Labels follow
/// the canonical gesture order restricted to the dataset.
pub fn train(
    dataset: &Dataset,
    config: &TrainConfig,
    seed: u64,
) -> Result<(Cnn<f32>, TrainingReport), MlError> {
    if dataset.trials.iter().any(|t| t.split.is_none()) {
        return Err(MlError::Unsplit);
    }
    let present = dataset.gestures();
    let labels: Vec<Gesture> = Gesture::ALL
        .iter()
        .copied()
        .filter(|g| present.contains(g))
        .collect();
    let train_set = dataset.in_split(Split::Train);
    let val_set = dataset.in_split(Split::Val);
    if train_set.is_empty() || val_set.is_empty() {
        return Err(MlError::EmptySplit);
    }
    let arch = Arch {
        rows: crate::stream::GRID_ROWS,
        cols: crate::stream::GRID_COLS,
        conv1: config.conv1,
        conv2: config.conv2,
        hidden: config.hidden,
        classes: labels.len(),
    };
    let mut model = Cnn::<f32>::new(arch, labels.clone(), seed);
    let mut opt = Adam::new(&arch, config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let train_y = class_indices(&labels, &train_set);
    let val_y = class_indices(&labels, &val_set);

    let mut best: Option<(f64, usize, Cnn<f32>)> = None;
    let mut epochs = Vec::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let hs: Vec<&Heatmap> = batch.iter().map(|&i| &train_set[i].heatmap).collect();
            let y: Vec<usize> = batch.iter().map(|&i| train_y[i]).collect();
            let x: Array2<f32> = model.input(&hs)?;
            let (loss, grad, stats) = model.loss_and_grad(&x, &y);
            if !loss.is_finite() {
                return Err(MlError::Diverged { epoch });
            }
            loss_sum += loss as f64 * batch.len() as f64;
            opt.step(&mut model.params, &grad);
            model.update_running(&stats);
        }
        let val_loss = mean_loss(&model, &val_set, &val_y)?;
        if !val_loss.is_finite() {
            return Err(MlError::Diverged { epoch });
        }
        let val_accuracy = evaluate(&model, &val_set)?.accuracy;
        log::info!(
            "{} epoch {epoch}: train loss {:.4}, val loss {val_loss:.4}, val acc {val_accuracy:.3}",
            dataset.arm,
            loss_sum / train_set.len() as f64
        );
        epochs.push(EpochReport {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            val_loss,
            val_accuracy,
        });
        if best.as_ref().map_or(true, |b| val_loss < b.0) {
            best = Some((val_loss, epoch, model.clone()));
        }
    }
    let (_, selected_epoch, model) = best.ok_or(MlError::EmptySplit)?;
    let train_accuracy = evaluate(&model, &train_set)?.accuracy;
    let test_set = dataset.in_split(Split::Test);
    let test = if test_set.is_empty() {
        None
    } else {
        Some(evaluate(&model, &test_set)?)
    };
    let report = TrainingReport {
        arm: dataset.arm,
        labels,
        config: *config,
        seed,
        n_train: train_set.len(),
        n_val: val_set.len(),
        epochs,
        selected_epoch,
        train_accuracy,
        test,
    };
    Ok((model, report))
}
