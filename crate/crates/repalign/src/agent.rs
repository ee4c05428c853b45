//! Agents as distance oracles over a shared stimulus set.
//!
//! An agent is anything that can rank pairs of stimuli by dissimilarity:
//! a coordinate embedding under a chosen metric, or a raw similarity matrix
//! (e.g. averaged human judgments). Wrappers derive new agents from existing
//! ones: coordinate noise, order inversion, and isometric transforms.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::stimulus::{apply_isometry, EmbeddingSet, Isometry, StimulusSet};

/// Distance function applied to embedding coordinates.
///
/// `NegDot` and `NegCosine` negate the corresponding similarity kernel so that
/// smaller always means closer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMetric {
    Euclidean,
    NegDot,
    NegCosine,
}

impl EmbeddingMetric {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            EmbeddingMetric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            EmbeddingMetric::NegDot => -a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>(),
            EmbeddingMetric::NegCosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                -dot / (na * nb)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum AgentRepr {
    Embedding { coords: Array2<f64>, metric: EmbeddingMetric },
    Similarity { sim: Array2<f64> },
}

/// A distance oracle over a stimulus set.
#[derive(Debug, Clone)]
pub struct Agent {
    stimuli: StimulusSet,
    repr: AgentRepr,
    inverted: bool,
    label: String,
}

/// Symmetric pairwise distance matrix of an agent.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Array2<f64>,
}

impl Agent {
    pub fn from_embedding(embedding: EmbeddingSet, metric: EmbeddingMetric) -> Agent {
        Agent {
            stimuli: embedding.stimuli().clone(),
            repr: AgentRepr::Embedding { coords: embedding.coords().clone(), metric },
            inverted: false,
            label: "embedding".into(),
        }
    }

    /// Agent backed by a symmetric similarity matrix; distance is negated
    /// similarity, so only the ordering of the entries matters.
    pub fn from_similarity(stimuli: StimulusSet, sim: Array2<f64>) -> Result<Agent> {
        let n = stimuli.n();
        if sim.nrows() != n || sim.ncols() != n {
            return Err(Error::Input(format!(
                "similarity matrix is {}x{}, expected {n}x{n}",
                sim.nrows(),
                sim.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if !sim[[i, j]].is_finite() {
                    return Err(Error::Input(format!(
                        "non-finite similarity between `{}` and `{}`",
                        stimuli.id(i),
                        stimuli.id(j)
                    )));
                }
                if sim[[i, j]] != sim[[j, i]] {
                    return Err(Error::Input(format!(
                        "similarity matrix is not symmetric at (`{}`, `{}`)",
                        stimuli.id(i),
                        stimuli.id(j)
                    )));
                }
            }
        }
        Ok(Agent {
            stimuli,
            repr: AgentRepr::Similarity { sim },
            inverted: false,
            label: "similarity".into(),
        })
    }

    pub fn stimuli(&self) -> &StimulusSet {
        &self.stimuli
    }

    pub fn n(&self) -> usize {
        self.stimuli.n()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Agent {
        self.label = label.into();
        self
    }

    /// Embedding coordinates, if this agent is embedding-backed.
    ///
    /// Inversion does not touch coordinates: it lives at the distance level.
    pub fn embedding_coords(&self) -> Option<&Array2<f64>> {
        match &self.repr {
            AgentRepr::Embedding { coords, .. } => Some(coords),
            AgentRepr::Similarity { .. } => None,
        }
    }

    pub fn metric(&self) -> Option<EmbeddingMetric> {
        match &self.repr {
            AgentRepr::Embedding { metric, .. } => Some(*metric),
            AgentRepr::Similarity { .. } => None,
        }
    }

    /// Derived agent with i.i.d. Gaussian noise of the given scale.
    ///
    /// Embedding-backed agents get coordinate noise; similarity-backed agents
    /// get symmetric noise on the off-diagonal similarity entries.
    pub fn with_noise(&self, scale: f64, seed: u64) -> Result<Agent> {
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::Input(format!("noise scale must be finite and >= 0, got {scale}")));
        }
        let mut rng = derive_rng(seed, "agent-noise", 0);
        let repr = match &self.repr {
            AgentRepr::Embedding { coords, metric } => {
                let mut noisy = coords.clone();
                for v in noisy.iter_mut() {
                    let eta: f64 = rng.sample(StandardNormal);
                    *v += scale * eta;
                }
                AgentRepr::Embedding { coords: noisy, metric: *metric }
            }
            AgentRepr::Similarity { sim } => {
                let n = sim.nrows();
                let mut noisy = sim.clone();
                for i in 0..n {
                    for j in (i + 1)..n {
                        let eta: f64 = rng.sample(StandardNormal);
                        noisy[[i, j]] += scale * eta;
                        noisy[[j, i]] = noisy[[i, j]];
                    }
                }
                AgentRepr::Similarity { sim: noisy }
            }
        };
        Ok(Agent {
            stimuli: self.stimuli.clone(),
            repr,
            inverted: self.inverted,
            label: format!("noise({scale})"),
        })
    }

    /// Derived agent whose distance ordering is exactly reversed.
    pub fn inverted(&self) -> Agent {
        Agent {
            stimuli: self.stimuli.clone(),
            repr: self.repr.clone(),
            inverted: !self.inverted,
            label: format!("inverted({})", self.label),
        }
    }

    /// Derived agent with an isometry applied to its coordinates.
    pub fn with_isometry(&self, isometry: &Isometry) -> Result<Agent> {
        match &self.repr {
            AgentRepr::Embedding { coords, metric } => {
                let emb = EmbeddingSet::new(self.stimuli.clone(), coords.clone())?;
                let moved = apply_isometry(&emb, isometry)?;
                Ok(Agent {
                    stimuli: self.stimuli.clone(),
                    repr: AgentRepr::Embedding { coords: moved.coords().clone(), metric: *metric },
                    inverted: self.inverted,
                    label: format!("isometry({})", self.label),
                })
            }
            AgentRepr::Similarity { .. } => Err(Error::Input(
                "isometry wrapper requires an embedding-backed agent".into(),
            )),
        }
    }

    /// Distance from one external object to every stimulus.
    pub fn object_distances(&self, object: &ExternalObject) -> Result<Vec<f64>> {
        let n = self.n();
        let raw = match (&self.repr, object) {
            (AgentRepr::Embedding { coords, metric }, ExternalObject::Coords(e)) => {
                if e.len() != coords.ncols() {
                    return Err(Error::Input(format!(
                        "object has {} coordinates, agent embedding has {}",
                        e.len(),
                        coords.ncols()
                    )));
                }
                if let Some(col) = e.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Input(format!(
                        "non-finite object coordinate (column {col})"
                    )));
                }
                if *metric == EmbeddingMetric::NegCosine {
                    let norm: f64 = e.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        return Err(Error::Input(
                            "cosine distance undefined for the zero vector object".into(),
                        ));
                    }
                }
                (0..n)
                    .map(|i| metric.distance(e, coords.row(i).as_slice().unwrap()))
                    .collect::<Vec<f64>>()
            }
            (AgentRepr::Similarity { .. }, ExternalObject::SimilarityRow(row)) => {
                if row.len() != n {
                    return Err(Error::Input(format!(
                        "object similarity row has {} entries, expected {n}",
                        row.len()
                    )));
                }
                row.iter().map(|s| -s).collect()
            }
            (AgentRepr::Embedding { .. }, ExternalObject::SimilarityRow(_)) => {
                return Err(Error::Input(
                    "embedding-backed agent requires object coordinates, not a similarity row"
                        .into(),
                ))
            }
            (AgentRepr::Similarity { .. }, ExternalObject::Coords(_)) => {
                return Err(Error::Input(
                    "similarity-backed agent requires an object similarity row, not coordinates"
                        .into(),
                ))
            }
        };
        let sign = if self.inverted { -1.0 } else { 1.0 };
        Ok(raw.into_iter().map(|d| sign * d).collect())
    }

    /// Upper-triangle (row-major, `i < j`) vector of pairwise similarities,
    /// i.e. negated distances.
    pub fn similarity_vector(&self) -> Result<Vec<f64>> {
        let dm = pairwise_distances(self)?;
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(-dm.get(i, j));
            }
        }
        Ok(out)
    }

    /// Whether two agents are defined over the same ordered stimulus set.
    pub fn shares_stimuli(&self, other: &Agent) -> bool {
        self.stimuli == other.stimuli
    }
}

/// An object outside the stimulus set, to be compared against it.
#[derive(Debug, Clone)]
pub enum ExternalObject {
    /// Coordinates in the agent's embedding space.
    Coords(Vec<f64>),
    /// Precomputed similarity of the object to each stimulus, in stimulus order.
    SimilarityRow(Vec<f64>),
}

impl DistanceMatrix {
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::Input("distance matrix must be square".into()));
        }
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                if !values[[i, j]].is_finite() {
                    return Err(Error::Numeric(format!("non-finite distance at ({i}, {j})")));
                }
                if values[[i, j]] != values[[j, i]] {
                    return Err(Error::Input(format!("distance matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Full pairwise distance matrix of an agent.
///
/// Embedding agents evaluate their metric on coordinate rows; similarity
/// agents negate the similarity entries so that closer means more similar.
pub fn pairwise_distances(agent: &Agent) -> Result<DistanceMatrix> {
    let n = agent.n();
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 stimuli, got {n}")));
    }
    let sign = if agent.inverted { -1.0 } else { 1.0 };
    let mut values = Array2::<f64>::zeros((n, n));
    match &agent.repr {
        AgentRepr::Embedding { coords, metric } => {
            if *metric == EmbeddingMetric::NegCosine {
                for i in 0..n {
                    let norm: f64 = coords.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        return Err(Error::Input(format!(
                            "cosine distance undefined for zero-vector stimulus `{}`",
                            agent.stimuli.id(i)
                        )));
                    }
                }
            }
            for i in 0..n {
                let ri = coords.row(i);
                let ri = ri.as_slice().unwrap();
                for j in i..n {
                    let rj = coords.row(j);
                    let d = metric.distance(ri, rj.as_slice().unwrap());
                    values[[i, j]] = sign * d;
                    values[[j, i]] = sign * d;
                }
            }
        }
        AgentRepr::Similarity { sim } => {
            for i in 0..n {
                for j in 0..n {
                    values[[i, j]] = sign * -sim[[i, j]];
                }
            }
        }
    }
    DistanceMatrix::from_values(values)
}

/// Standard-normal embedding coordinates, a convenience for tests and sweeps.
pub fn gaussian_embedding(n: usize, d: usize, seed: u64) -> EmbeddingSet {
    let mut rng = derive_rng(seed, "gaussian-embedding", 0);
    let coords = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
    EmbeddingSet::new(StimulusSet::indexed(n), coords).expect("generated coordinates are finite")
}

/// Convenience: Euclidean agent over a fresh Gaussian embedding.
pub fn gaussian_agent(n: usize, d: usize, seed: u64) -> Agent {
    Agent::from_embedding(gaussian_embedding(n, d, seed), EmbeddingMetric::Euclidean)
}
