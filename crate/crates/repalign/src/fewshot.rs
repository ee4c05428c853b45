//! Few-shot transfer evaluation through linear probing.
//!
//! A probe is a multinomial logistic regression trained by full-batch gradient
//! descent from zero initialization — no stochastic elements, so identical
//! inputs give bit-identical weights. `evaluate_nshot` samples n examples per
//! class by seed, fits a probe, and scores the held-out remainder.
//! `ushape_fsl_experiment` runs that evaluation across a noise/inverted agent
//! family to expose the relationship between alignment and few-shot accuracy.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::agent::Agent;
use crate::error::{Error, Result};
use crate::metrics::{pearson_pairwise_alignment, spearman_pairwise_alignment};
use crate::rng::{derive_rng, derive_seed};
use crate::stimulus::EmbeddingSet;
use crate::synth::{gen_agent_family, FamilyConfig};

/// Embeddings with one class label per stimulus.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    coords: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabeledDataset {
    pub fn new(coords: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if coords.nrows() != labels.len() {
            return Err(Error::Input(format!(
                "{} coordinate rows but {} labels",
                coords.nrows(),
                labels.len()
            )));
        }
        if n_classes == 0 {
            return Err(Error::Input("need at least one class".into()));
        }
        let mut counts = vec![0usize; n_classes];
        for &label in &labels {
            if label >= n_classes {
                return Err(Error::Input(format!(
                    "label {label} out of range for {n_classes} classes"
                )));
            }
            counts[label] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Input(format!("class {empty} has no examples")));
        }
        Ok(LabeledDataset { coords, labels, n_classes })
    }

    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows of this dataset at the given indices, in the given order.
    pub fn gather(&self, indices: &[usize]) -> Result<LabeledDataset> {
        let d = self.coords.ncols();
        let mut coords = Array2::<f64>::zeros((indices.len(), d));
        let mut labels = Vec::with_capacity(indices.len());
        for (row, &idx) in indices.iter().enumerate() {
            if idx >= self.len() {
                return Err(Error::Input(format!("index {idx} out of range {}", self.len())));
            }
            coords.row_mut(row).assign(&self.coords.row(idx));
            labels.push(self.labels[idx]);
        }
        LabeledDataset::new(coords, labels, self.n_classes)
    }
}

/// Probe hyperparameters; training is always full-batch from zero init.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { learning_rate: 0.1, epochs: 500, l2_penalty: 1e-4 }
    }
}

impl ProbeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Input(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs < 1 {
            return Err(Error::Input("need at least 1 epoch".into()));
        }
        if !(self.l2_penalty >= 0.0) {
            return Err(Error::Input(format!(
                "l2 penalty must be >= 0, got {}",
                self.l2_penalty
            )));
        }
        Ok(())
    }
}

/// A trained linear classifier: `k x d` weights and `k` biases.
#[derive(Debug, Clone)]
pub struct LinearProbe {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    /// Training loss evaluated at the start of each epoch.
    pub loss_curve: Vec<f64>,
}

/// Mean cross-entropy plus `l2/2 * ||W||^2`, and its gradient, at the given
/// parameters. Biases are not penalized.
pub fn probe_loss_and_grad(
    weights: &Array2<f64>,
    biases: &Array1<f64>,
    data: &LabeledDataset,
    l2_penalty: f64,
) -> Result<(f64, Array2<f64>, Array1<f64>)> {
    let k = data.n_classes();
    let d = data.coords().ncols();
    if weights.nrows() != k || weights.ncols() != d || biases.len() != k {
        return Err(Error::Input(format!(
            "parameter shape ({}x{}, {}) does not match data ({k} classes, {d} dims)",
            weights.nrows(),
            weights.ncols(),
            biases.len()
        )));
    }
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = Array2::<f64>::zeros((k, d));
    let mut grad_b = Array1::<f64>::zeros(k);
    let mut logits = vec![0.0; k];
    for (row, &label) in data.coords().rows().into_iter().zip(data.labels()) {
        let x = row.as_slice().unwrap();
        for (c, logit) in logits.iter_mut().enumerate() {
            let w = weights.row(c);
            *logit = biases[c] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        loss += (lse - logits[label]) / n;
        for c in 0..k {
            let p = (logits[c] - lse).exp();
            let delta = (p - if c == label { 1.0 } else { 0.0 }) / n;
            grad_b[c] += delta;
            let mut grad_row = grad_w.row_mut(c);
            for (g, &xv) in grad_row.iter_mut().zip(x) {
                *g += delta * xv;
            }
        }
    }
    loss += 0.5 * l2_penalty * weights.iter().map(|w| w * w).sum::<f64>();
    grad_w.zip_mut_with(weights, |g, &w| *g += l2_penalty * w);
    Ok((loss, grad_w, grad_b))
}

/// Fit a multinomial logistic regression by full-batch gradient descent.
pub fn train_linear_probe(train: &LabeledDataset, config: &ProbeConfig) -> Result<LinearProbe> {
    config.validate()?;
    let k = train.n_classes();
    let d = train.coords().ncols();
    let mut weights = Array2::<f64>::zeros((k, d));
    let mut biases = Array1::<f64>::zeros(k);
    let mut loss_curve = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, grad_w, grad_b) = probe_loss_and_grad(&weights, &biases, train, config.l2_penalty)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite probe loss at epoch {epoch}")));
        }
        loss_curve.push(loss);
        weights.zip_mut_with(&grad_w, |w, &g| *w -= config.learning_rate * g);
        biases.zip_mut_with(&grad_b, |b, &g| *b -= config.learning_rate * g);
    }
    Ok(LinearProbe { weights, biases, loss_curve })
}

impl LinearProbe {
    /// Predicted class of one coordinate row; ties break to the lowest index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (c, w) in self.weights.rows().into_iter().enumerate() {
            let score = self.biases[c] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        best
    }

    pub fn accuracy(&self, data: &LabeledDataset) -> f64 {
        let correct = data
            .coords()
            .rows()
            .into_iter()
            .zip(data.labels())
            .filter(|(row, &label)| self.predict(row.as_slice().unwrap()) == label)
            .count();
        correct as f64 / data.len() as f64
    }
}

/// Deterministic n-per-class train/holdout split. Returns sorted index lists.
pub fn nshot_split(
    labels: &[usize],
    n_classes: usize,
    n_per_class: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_per_class == 0 {
        return Err(Error::Input("n_per_class must be at least 1".into()));
    }
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &label) in labels.iter().enumerate() {
        if label >= n_classes {
            return Err(Error::Input(format!("label {label} out of range")));
        }
        by_class[label].push(i);
    }
    let mut rng = derive_rng(seed, "nshot-split", 0);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut indices) in by_class.into_iter().enumerate() {
        if indices.len() <= n_per_class {
            return Err(Error::Input(format!(
                "class {class} has {} examples; need more than n_per_class = {n_per_class}",
                indices.len()
            )));
        }
        indices.shuffle(&mut rng);
        train.extend_from_slice(&indices[..n_per_class]);
        test.extend_from_slice(&indices[n_per_class..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Train on the gathered train indices, score on the gathered test indices.
/// Rows are gathered in index order, so consistently permuted inputs give
/// exactly the same result.
pub fn evaluate_split(
    data: &LabeledDataset,
    train_indices: &[usize],
    test_indices: &[usize],
    config: &ProbeConfig,
) -> Result<f64> {
    let train = data.gather(train_indices)?;
    let test = data.gather(test_indices)?;
    let probe = train_linear_probe(&train, config)?;
    Ok(probe.accuracy(&test))
}

/// Held-out accuracy of a probe trained on `n_per_class` seeded examples per
/// class of the agent's own embedding.
pub fn evaluate_nshot(
    agent: &Agent,
    labels: &[usize],
    n_per_class: usize,
    config: &ProbeConfig,
    seed: u64,
) -> Result<f64> {
    let coords = agent
        .embedding_coords()
        .ok_or_else(|| Error::Input("few-shot evaluation requires an embedding-backed agent".into()))?;
    let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    let data = LabeledDataset::new(coords.clone(), labels.to_vec(), n_classes)?;
    let (train, test) = nshot_split(labels, n_classes, n_per_class, seed)?;
    evaluate_split(&data, &train, &test, config)
}

/// One (agent, shot) row of the few-shot U-shape experiment.
#[derive(Debug, Clone, Serialize)]
pub struct FslRow {
    pub agent_id: String,
    pub noise_scale: Option<f64>,
    pub triplet_alignment: f64,
    pub pearson_alignment: f64,
    pub spearman_alignment: f64,
    pub shot: usize,
    pub mean_accuracy: f64,
    pub std_err: f64,
}

/// Experiment parameters for [`ushape_fsl_experiment`].
#[derive(Debug, Clone)]
pub struct FslConfig {
    pub noise_scales: Vec<f64>,
    pub include_inverted: bool,
    pub shots: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub probe: ProbeConfig,
}

/// Evaluate few-shot accuracy across an agent family with measured alignment.
///
/// Labels live in the reference space; every student is probed on its own
/// embedding coordinates. The inverted member's inversion is a property of its
/// similarity ordering, not of its coordinates, so its probe input is the
/// reference geometry — which is exactly what makes the anti-aligned endpoint
/// as learnable as the aligned one.
pub fn ushape_fsl_experiment(
    reference: &EmbeddingSet,
    labels: &[usize],
    config: &FslConfig,
) -> Result<Vec<FslRow>> {
    if config.noise_scales.is_empty() {
        return Err(Error::Input("noise scale grid must not be empty".into()));
    }
    if config.shots.is_empty() {
        return Err(Error::Input("shot list must not be empty".into()));
    }
    if config.trials < 1 {
        return Err(Error::Input("need at least 1 trial".into()));
    }
    let family = gen_agent_family(
        reference,
        &FamilyConfig {
            noise_scales: config.noise_scales.clone(),
            include_inverted: config.include_inverted,
            include_isometry: false,
            seed: derive_seed(config.seed, "fsl-family", 0),
        },
    )?;
    let reference_agent = Agent::from_embedding(
        reference.clone(),
        crate::agent::EmbeddingMetric::Euclidean,
    );
    let reference_sim = reference_agent.similarity_vector()?;

    let mut rows = Vec::new();
    for (member_idx, member) in family.iter().enumerate() {
        let member_sim = member.agent.similarity_vector()?;
        let pearson = pearson_pairwise_alignment(&reference_sim, &member_sim)?;
        let spearman = spearman_pairwise_alignment(&reference_sim, &member_sim)?;
        for (shot_idx, &shot) in config.shots.iter().enumerate() {
            let mut accuracies = Vec::with_capacity(config.trials);
            for trial in 0..config.trials {
                let eval_seed = derive_seed(
                    config.seed,
                    "fsl-eval",
                    ((member_idx * config.shots.len() + shot_idx) * config.trials + trial) as u64,
                );
                accuracies.push(evaluate_nshot(
                    &member.agent,
                    labels,
                    shot,
                    &config.probe,
                    eval_seed,
                )?);
            }
            let t = config.trials as f64;
            let mean = accuracies.iter().sum::<f64>() / t;
            let var = accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>()
                / if config.trials > 1 { t - 1.0 } else { 1.0 };
            rows.push(FslRow {
                agent_id: member.id.clone(),
                noise_scale: member.noise_scale,
                triplet_alignment: member.triplet_alignment,
                pearson_alignment: pearson,
                spearman_alignment: spearman,
                shot,
                mean_accuracy: mean,
                std_err: (var / t).sqrt(),
            });
        }
    }
    Ok(rows)
}
