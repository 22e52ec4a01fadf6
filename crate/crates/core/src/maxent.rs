//! Aspect-level prediction: one multiclass maximum-entropy (softmax
//! regression) classifier per aspect, over a verb's embedding plus a
//! constant bias feature.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::evaluation::macro_f1;
use crate::optim::{minimize, Method, Objective, OptimConfig};
use crate::types::{AspectId, Polarity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassWeightMode {
    Uniform,
    InverseFrequency,
    /// Inverse frequency times a per-class multiplier from {0.5, 1, 2},
    /// chosen by macro-F1 on a development set.
    GridTuned,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub l2_strength: f64,
    pub optimizer: Method,
    pub max_iters: usize,
    pub convergence_tol: f64,
    pub class_weight_mode: ClassWeightMode,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_strength: 1.0,
            optimizer: Method::Lbfgs,
            max_iters: 500,
            convergence_tol: 1e-6,
            class_weight_mode: ClassWeightMode::InverseFrequency,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Input("max_iters must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Input("convergence_tol must be positive".into()));
        }
        if !(self.l2_strength >= 0.0) {
            return Err(Error::Input("l2_strength must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Softmax classifier with a 3 × (dim + 1) weight matrix in class order
/// (Negative, Neutral, Positive); the last column multiplies the bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxEntModel {
    pub aspect: AspectId,
    pub dim: usize,
    pub class_order: [Polarity; 3],
    /// Row-major, `3 * (dim + 1)` entries.
    pub weights: Vec<f64>,
}

impl MaxEntModel {
    pub fn zeros(aspect: AspectId, dim: usize) -> Self {
        MaxEntModel {
            aspect,
            dim,
            class_order: Polarity::ALL,
            weights: vec![0.0; 3 * (dim + 1)],
        }
    }

    pub fn n_features(&self) -> usize {
        self.dim + 1
    }

    pub fn logits(&self, features: &[f64]) -> Result<[f64; 3]> {
        let n = self.n_features();
        if features.len() != n {
            return Err(Error::Shape {
                expected: n,
                actual: features.len(),
            });
        }
        Ok(logits(&self.weights, features))
    }

    pub fn save(&self, path: impl AsRef<Path>, header: &str) -> Result<()> {
        let path = path.as_ref();
        let body = serde_json::to_string_pretty(self)?;
        fs::write(path, format!("# {header}\n{body}\n")).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n");
        let model: MaxEntModel = serde_json::from_str(&body)?;
        if model.weights.len() != 3 * (model.dim + 1) || model.class_order != Polarity::ALL {
            return Err(Error::Format(format!(
                "{}: model shape does not match its declared dimension",
                path.display()
            )));
        }
        Ok(model)
    }
}

fn logits(w: &[f64], x: &[f64]) -> [f64; 3] {
    let n = x.len();
    let mut z = [0.0; 3];
    for (c, zc) in z.iter_mut().enumerate() {
        *zc = w[c * n..(c + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
    }
    z
}

/// Numerically stable softmax over three logits.
pub fn softmax3(z: [f64; 3]) -> [f64; 3] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| (v - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

/// Embedding with a trailing constant 1.0.
pub fn featurize(verb: &str, table: &EmbeddingTable) -> Result<Vec<f64>> {
    let v = table.lookup(verb)?;
    let mut f = Vec::with_capacity(v.len() + 1);
    f.extend_from_slice(v);
    f.push(1.0);
    Ok(f)
}

pub fn predict_probs(model: &MaxEntModel, features: &[f64]) -> Result<[f64; 3]> {
    Ok(softmax3(model.logits(features)?))
}

/// Argmax label; ties go to the lowest polarity.
pub fn predict_label(model: &MaxEntModel, verb: &str, table: &EmbeddingTable) -> Result<Polarity> {
    let f = featurize(verb, table)?;
    Ok(Polarity::argmax(&predict_probs(model, &f)?))
}

/// Class-weighted negative log-likelihood with an L2 penalty on every
/// weight except the bias column.
#[derive(Clone, Debug)]
pub struct MaxEntObjective {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    sample_weights: Vec<f64>,
    n_features: usize,
    l2: f64,
}

impl MaxEntObjective {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<Polarity>,
        class_weights: [f64; 3],
        l2: f64,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Input("no training examples".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::Shape {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        let n_features = features[0].len();
        if let Some(bad) = features.iter().find(|f| f.len() != n_features) {
            return Err(Error::Shape {
                expected: n_features,
                actual: bad.len(),
            });
        }
        let labels: Vec<usize> = labels.iter().map(|p| p.index()).collect();
        let sample_weights = labels.iter().map(|&c| class_weights[c]).collect();
        Ok(MaxEntObjective {
            features,
            labels,
            sample_weights,
            n_features,
            l2,
        })
    }
}

impl Objective for MaxEntObjective {
    fn dim(&self) -> usize {
        3 * self.n_features
    }

    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n_features;
        let mut loss = 0.0;
        let mut grad = vec![0.0; 3 * n];
        for ((x, &y), &sw) in self.features.iter().zip(&self.labels).zip(&self.sample_weights) {
            if sw == 0.0 {
                continue;
            }
            let z = logits(w, x);
            let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            loss += sw * (lse - z[y]);
            for c in 0..3 {
                let p = (z[c] - lse).exp();
                let coef = sw * (p - if c == y { 1.0 } else { 0.0 });
                for (g, xi) in grad[c * n..(c + 1) * n].iter_mut().zip(x) {
                    *g += coef * xi;
                }
            }
        }
        if self.l2 > 0.0 {
            for c in 0..3 {
                for j in 0..n - 1 {
                    let wi = w[c * n + j];
                    loss += 0.5 * self.l2 * wi * wi;
                    grad[c * n + j] += self.l2 * wi;
                }
            }
        }
        (loss, grad)
    }
}

/// `N / (3 N_c)` per class; classes without examples get weight 0.
pub fn inverse_frequency_weights(labels: &[Polarity]) -> [f64; 3] {
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    let n = labels.len() as f64;
    counts.map(|c| if c == 0 { 0.0 } else { n / (3.0 * c as f64) })
}

/// Optimization trace of a single aspect model.
#[derive(Clone, Debug)]
pub struct TrainTrace {
    pub class_weights: [f64; 3],
    pub loss_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub fallbacks: usize,
}

fn collect(data: &[(String, Polarity)], table: &EmbeddingTable) -> Result<(Vec<Vec<f64>>, Vec<Polarity>)> {
    if data.is_empty() {
        return Err(Error::Input("empty training data".into()));
    }
    let feats = data
        .iter()
        .map(|(v, _)| featurize(v, table))
        .collect::<Result<Vec<_>>>()?;
    Ok((feats, data.iter().map(|(_, l)| *l).collect()))
}

fn fit(
    aspect: AspectId,
    dim: usize,
    features: Vec<Vec<f64>>,
    labels: Vec<Polarity>,
    class_weights: [f64; 3],
    cfg: &TrainConfig,
) -> Result<(MaxEntModel, TrainTrace)> {
    let obj = MaxEntObjective::new(features, labels, class_weights, cfg.l2_strength)?;
    let ocfg = OptimConfig {
        method: cfg.optimizer,
        max_iters: cfg.max_iters,
        grad_tol: cfg.convergence_tol,
        ..OptimConfig::default()
    };
    let res = minimize(&obj, &vec![0.0; obj.dim()], &ocfg);
    let model = MaxEntModel {
        aspect,
        dim,
        class_order: Polarity::ALL,
        weights: res.x,
    };
    let trace = TrainTrace {
        class_weights,
        loss_trace: res.loss_trace,
        iterations: res.iterations,
        converged: res.converged,
        fallbacks: res.fallbacks,
    };
    Ok((model, trace))
}

/// Trains one aspect classifier, also returning the optimization trace.
///
/// Training starts from all-zero weights and is fully deterministic for a
/// fixed data order. `GridTuned` needs a development set; use
/// [`train_aspect_tuned`].
pub fn train_aspect_with_trace(
    data: &[(String, Polarity)],
    aspect: AspectId,
    table: &EmbeddingTable,
    cfg: &TrainConfig,
) -> Result<(MaxEntModel, TrainTrace)> {
    cfg.validate()?;
    let (features, labels) = collect(data, table)?;
    let class_weights = match cfg.class_weight_mode {
        ClassWeightMode::Uniform => [1.0; 3],
        ClassWeightMode::InverseFrequency => inverse_frequency_weights(&labels),
        ClassWeightMode::GridTuned => {
            return Err(Error::Input(
                "grid-tuned class weights need a development set".into(),
            ))
        }
    };
    fit(aspect, table.dim(), features, labels, class_weights, cfg)
}

pub fn train_aspect(
    data: &[(String, Polarity)],
    aspect: AspectId,
    table: &EmbeddingTable,
    cfg: &TrainConfig,
) -> Result<MaxEntModel> {
    train_aspect_with_trace(data, aspect, table, cfg).map(|(m, _)| m)
}

const GRID: [f64; 3] = [0.5, 1.0, 2.0];

/// Like [`train_aspect`], but with `GridTuned` mode searches the 27
/// multiplier combinations over inverse-frequency weights and keeps the one
/// with the best development macro-F1 (first in grid order on ties). Other
/// modes ignore `dev`.
pub fn train_aspect_tuned(
    train: &[(String, Polarity)],
    dev: &[(String, Polarity)],
    aspect: AspectId,
    table: &EmbeddingTable,
    cfg: &TrainConfig,
) -> Result<(MaxEntModel, TrainTrace)> {
    if cfg.class_weight_mode != ClassWeightMode::GridTuned {
        return train_aspect_with_trace(train, aspect, table, cfg);
    }
    cfg.validate()?;
    let (features, labels) = collect(train, table)?;
    let (dev_feats, dev_gold) = collect(dev, table)?;
    let base = inverse_frequency_weights(&labels);
    let mut best: Option<(f64, MaxEntModel, TrainTrace)> = None;
    for m0 in GRID {
        for m1 in GRID {
            for m2 in GRID {
                let w = [base[0] * m0, base[1] * m1, base[2] * m2];
                let (model, trace) =
                    fit(aspect, table.dim(), features.clone(), labels.clone(), w, cfg)?;
                let pred: Vec<Polarity> = dev_feats
                    .iter()
                    .map(|f| predict_probs(&model, f).map(|p| Polarity::argmax(&p)))
                    .collect::<Result<_>>()?;
                let f1 = macro_f1(&dev_gold, &pred)?;
                if best.as_ref().is_none_or(|(b, _, _)| f1 > *b) {
                    best = Some((f1, model, trace));
                }
            }
        }
    }
    let (_, model, trace) = best.expect("grid is nonempty");
    Ok((model, trace))
}

/// The nine per-aspect classifiers, indexed by canonical aspect order.
#[derive(Clone, Debug, PartialEq)]
pub struct AspectModels {
    models: Vec<MaxEntModel>,
}

impl AspectModels {
    pub fn new(models: Vec<MaxEntModel>) -> Result<Self> {
        if models.len() != 9 {
            return Err(Error::Input(format!("expected 9 aspect models, got {}", models.len())));
        }
        let dim = models[0].dim;
        for (a, m) in AspectId::ALL.iter().zip(&models) {
            if m.aspect != *a {
                return Err(Error::Input(format!("model for {} found where {a} was expected", m.aspect)));
            }
            if m.dim != dim {
                return Err(Error::Input("aspect models disagree on embedding dimension".into()));
            }
        }
        Ok(AspectModels { models })
    }

    pub fn get(&self, aspect: AspectId) -> &MaxEntModel {
        &self.models[aspect.index()]
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim
    }

    /// Class probabilities of every aspect for one verb.
    pub fn predict_probs(&self, verb: &str, table: &EmbeddingTable) -> Result<[[f64; 3]; 9]> {
        let f = featurize(verb, table)?;
        let mut out = [[0.0; 3]; 9];
        for (o, m) in out.iter_mut().zip(&self.models) {
            *o = predict_probs(m, &f)?;
        }
        Ok(out)
    }

    pub fn file_name(aspect: AspectId) -> String {
        format!("{}.json", aspect.name())
    }

    pub fn save_dir(&self, dir: impl AsRef<Path>, header: &str) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for m in &self.models {
            m.save(dir.join(Self::file_name(m.aspect)), header)?;
        }
        Ok(())
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let models = AspectId::ALL
            .iter()
            .map(|a| MaxEntModel::load(dir.join(Self::file_name(*a))))
            .collect::<Result<Vec<_>>>()?;
        AspectModels::new(models)
    }
}
