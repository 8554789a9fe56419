//! The principal learner.
//!
//! The selection loop only needs class probabilities on the pool and test
//! rows after each retrain, so anything implementing [`PrincipalLearner`]
//! can play the role. [`BuiltinLearner`] is a softmax-linear or small MLP
//! classifier trained by minibatch SGD with a step-decayed learning rate.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::acquisition::{entropy, softmax};
use crate::dataset::Dataset;
use crate::rng::{self, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    SoftmaxLinear,
    /// ReLU hidden layers of the given widths, softmax output.
    Mlp(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub architecture: Architecture,
    pub learning_rate: f64,
    /// Multiplier applied every `decay_every` epochs.
    pub lr_decay: f64,
    pub decay_every: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::SoftmaxLinear,
            learning_rate: 0.01,
            lr_decay: 0.1,
            decay_every: 10,
            batch_size: 30,
            epochs: 100,
            seed: 0,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("learner {what} must be positive")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay.is_finite()) {
            return bad("lr_decay");
        }
        if self.decay_every == 0 {
            return bad("decay_every");
        }
        if self.batch_size == 0 {
            return bad("batch_size");
        }
        if self.epochs == 0 {
            return bad("epochs");
        }
        if let Architecture::Mlp(widths) = &self.architecture {
            if widths.contains(&0) {
                return bad("hidden width");
            }
        }
        Ok(())
    }

    fn rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.lr_decay.powi((epoch / self.decay_every) as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    /// Row-major `outputs × inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    inputs: usize,
    outputs: usize,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
            inputs,
            outputs,
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(o, b)| {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        }));
    }
}

/// Trained classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerModel {
    layers: Vec<Layer>,
    num_classes: usize,
    loss_history: Vec<f64>,
}

impl LearnerModel {
    /// Class probabilities for one row.
    pub fn predict_row(&self, x: &[f64]) -> Vec<f64> {
        let activations = self.forward(x);
        softmax(activations.last().expect("at least one layer"))
    }

    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Mean training cross-entropy after each epoch.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    /// Layer outputs; hidden ones after ReLU, the last one as logits.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut input = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.forward(&input, &mut out);
            if l + 1 < self.layers.len() {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out.clone());
            input = out;
        }
        acts
    }

    fn mean_loss(&self, x: &[&[f64]], y: &[usize]) -> f64 {
        let total: f64 = x
            .iter()
            .zip(y)
            .map(|(row, &c)| -self.predict_row(row)[c].max(1e-300).ln())
            .sum();
        total / x.len() as f64
    }
}

/// Trains a fresh model on `(x, y)`.
pub fn train(x: &[&[f64]], y: &[usize], num_classes: usize, config: &LearnerConfig) -> Result<LearnerModel> {
    config.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    assert_eq!(x.len(), y.len(), "features and labels differ in length");
    if num_classes < 2 {
        return Err(Error::SingleClass);
    }
    let dim = x[0].len();
    let mut rng = rng::substream(config.seed, stream::LEARNER);

    let widths: Vec<usize> = match &config.architecture {
        Architecture::SoftmaxLinear => vec![dim, num_classes],
        Architecture::Mlp(hidden) => std::iter::once(dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(num_classes))
            .collect(),
    };
    let layers: Vec<Layer> = widths
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let mut layer = Layer::zeros(w[0], w[1]);
            // Zero output layer for the linear model; He init for hidden layers.
            if l + 2 < widths.len() {
                let he = Normal::new(0.0, (2.0 / w[0] as f64).sqrt()).expect("finite std");
                layer.weights.iter_mut().for_each(|v| *v = he.sample(&mut rng));
            }
            layer
        })
        .collect();

    let mut model = LearnerModel {
        layers,
        num_classes,
        loss_history: Vec::with_capacity(config.epochs),
    };
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut grads: Vec<Layer> = model
        .layers
        .iter()
        .map(|l| Layer::zeros(l.inputs, l.outputs))
        .collect();

    for epoch in 0..config.epochs {
        let rate = config.rate_at(epoch);
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            for g in grads.iter_mut() {
                g.weights.fill(0.0);
                g.bias.fill(0.0);
            }
            for &s in batch {
                accumulate_gradient(&model, x[s], y[s], &mut grads);
            }
            let step = rate / batch.len() as f64;
            for (layer, g) in model.layers.iter_mut().zip(&grads) {
                layer.weights.iter_mut().zip(&g.weights).for_each(|(w, d)| *w -= step * d);
                layer.bias.iter_mut().zip(&g.bias).for_each(|(b, d)| *b -= step * d);
            }
        }
        model.loss_history.push(model.mean_loss(x, y));
    }
    Ok(model)
}

/// Adds the cross-entropy gradient of one example into `grads`.
fn accumulate_gradient(model: &LearnerModel, x: &[f64], label: usize, grads: &mut [Layer]) {
    let acts = model.forward(x);
    let mut delta = softmax(acts.last().expect("at least one layer"));
    delta[label] -= 1.0;

    for l in (0..model.layers.len()).rev() {
        let input: &[f64] = if l == 0 { x } else { &acts[l - 1] };
        let layer = &model.layers[l];
        let g = &mut grads[l];
        for o in 0..layer.outputs {
            g.bias[o] += delta[o];
            let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
            row.iter_mut().zip(input).for_each(|(w, v)| *w += delta[o] * v);
        }
        if l > 0 {
            let mut back = vec![0.0; layer.inputs];
            for o in 0..layer.outputs {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                back.iter_mut().zip(row).for_each(|(b, w)| *b += delta[o] * w);
            }
            // ReLU derivative of the layer below.
            for (b, a) in back.iter_mut().zip(&acts[l - 1]) {
                if *a <= 0.0 {
                    *b = 0.0;
                }
            }
            delta = back;
        }
    }
}

/// Learner probabilities and entropies over the pool, frozen at a retrain.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSnapshot {
    pub probs: Vec<Vec<f64>>,
    pub entropies: Vec<f64>,
    /// Label count the learner was trained on.
    pub stage: usize,
}

impl LearnerSnapshot {
    pub fn new(probs: Vec<Vec<f64>>, stage: usize) -> Self {
        let entropies = probs.iter().map(|p| entropy(p)).collect();
        Self {
            probs,
            entropies,
            stage,
        }
    }

    pub fn from_model(model: &LearnerModel, pool: &[Vec<f64>], stage: usize) -> Self {
        Self::new(model.predict_proba(pool), stage)
    }
}

/// Learner outputs the loop consumes after a retrain.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub pool: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
}

/// A classifier that can be (re)trained on the labeled part of the pool.
pub trait PrincipalLearner: Sync {
    /// Trains on pool rows `labeled` with labels `labels` and predicts every
    /// pool and test row.
    fn fit_predict(&self, data: &Dataset, labeled: &[usize], labels: &[usize]) -> Result<Predictions>;
}

/// The built-in SGD classifier, trained from scratch on every call.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinLearner {
    pub config: LearnerConfig,
}

impl BuiltinLearner {
    pub fn new(config: LearnerConfig) -> Self {
        Self { config }
    }
}

impl PrincipalLearner for BuiltinLearner {
    fn fit_predict(&self, data: &Dataset, labeled: &[usize], labels: &[usize]) -> Result<Predictions> {
        let rows: Vec<&[f64]> = labeled.iter().map(|&i| data.pool[i].as_slice()).collect();
        let model = train(&rows, labels, data.num_classes, &self.config)?;
        Ok(Predictions {
            pool: model.predict_proba(&data.pool),
            test: model.predict_proba(&data.test),
        })
    }
}

/// Precomputed predictions keyed by the label count they were made at.
///
/// A request at `t` labels is served by the latest entry at or below `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalPredictions {
    stages: BTreeMap<usize, Predictions>,
}

impl ExternalPredictions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, stage: usize, predictions: Predictions) {
        self.stages.insert(stage, predictions);
    }

    pub fn stages(&self) -> impl Iterator<Item = usize> + '_ {
        self.stages.keys().copied()
    }
}

impl PrincipalLearner for ExternalPredictions {
    fn fit_predict(&self, data: &Dataset, labeled: &[usize], _labels: &[usize]) -> Result<Predictions> {
        let t = labeled.len();
        let (_, preds) = self
            .stages
            .range(..=t)
            .next_back()
            .ok_or(Error::MissingPredictions(t))?;
        if preds.pool.len() != data.pool.len() || preds.test.len() != data.test.len() {
            return Err(Error::InvalidConfig(format!(
                "external predictions cover {} pool / {} test rows, dataset has {} / {}",
                preds.pool.len(),
                preds.test.len(),
                data.pool.len(),
                data.test.len()
            )));
        }
        Ok(preds.clone())
    }
}
