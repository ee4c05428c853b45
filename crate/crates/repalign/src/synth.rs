//! Deterministic synthetic data: clustered reference embeddings and agent
//! families with controlled, measured alignment.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::agent::{Agent, EmbeddingMetric};
use crate::error::{Error, Result};
use crate::metrics::{triplet_misalignment, TieMode};
use crate::rng::{derive_rng, derive_seed};
use crate::stimulus::{EmbeddingSet, Isometry, StimulusSet};
use crate::triplet::triplet_space;

/// Parameters for a clustered Gaussian embedding.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub per_class: usize,
    pub classes: usize,
    pub dim: usize,
    /// Minimum pairwise centroid distance, in units of the (unit) cluster sigma.
    pub separation: f64,
    pub seed: u64,
}

/// `classes` unit-sigma Gaussian clusters whose centroids are rescaled so the
/// closest pair sits exactly `separation` apart. Returns the embedding and the
/// class label of each stimulus, class-major.
pub fn gen_clustered_embedding(spec: &SynthSpec) -> Result<(EmbeddingSet, Vec<usize>)> {
    if spec.per_class == 0 || spec.classes == 0 || spec.dim == 0 {
        return Err(Error::Input("per_class, classes and dim must all be positive".into()));
    }
    if !(spec.separation >= 0.0) || !spec.separation.is_finite() {
        return Err(Error::Input(format!(
            "separation must be finite and >= 0, got {}",
            spec.separation
        )));
    }
    let mut rng = derive_rng(spec.seed, "synth-clusters", 0);
    let mut centroids = Array2::<f64>::zeros((spec.classes, spec.dim));
    for v in centroids.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    if spec.classes > 1 {
        let mut min_dist = f64::INFINITY;
        for a in 0..spec.classes {
            for b in (a + 1)..spec.classes {
                let d = centroids
                    .row(a)
                    .iter()
                    .zip(centroids.row(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(d);
            }
        }
        if min_dist == 0.0 {
            return Err(Error::Numeric("coincident random centroids".into()));
        }
        centroids *= spec.separation / min_dist;
    }

    let n = spec.per_class * spec.classes;
    let mut coords = Array2::<f64>::zeros((n, spec.dim));
    let mut labels = Vec::with_capacity(n);
    for class in 0..spec.classes {
        for item in 0..spec.per_class {
            let row = class * spec.per_class + item;
            for col in 0..spec.dim {
                let eta: f64 = rng.sample(StandardNormal);
                coords[[row, col]] = centroids[[class, col]] + eta;
            }
            labels.push(class);
        }
    }
    let embedding = EmbeddingSet::new(StimulusSet::indexed(n), coords)?;
    Ok((embedding, labels))
}

/// One member of an agent family, tagged with its measured triplet alignment
/// to the reference.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub agent: Agent,
    pub id: String,
    /// Noise scale for noise-wrapped members, `None` for isometry/inverted.
    pub noise_scale: Option<f64>,
    pub triplet_alignment: f64,
}

/// Family construction options.
#[derive(Debug, Clone)]
pub struct FamilyConfig {
    pub noise_scales: Vec<f64>,
    pub include_inverted: bool,
    pub include_isometry: bool,
    pub seed: u64,
}

/// Uniformly random rotation-ish orthogonal matrix (Gram-Schmidt on a Gaussian
/// matrix; may include a reflection, which is fine for distance preservation).
pub fn random_rotation(d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    loop {
        let mut m = Array2::<f64>::zeros((d, d));
        for v in m.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut ok = true;
        for col in 0..d {
            // two orthogonalization passes keep the Gram matrix at ~1e-15
            for _ in 0..2 {
                for prev in 0..col {
                    let dot: f64 = (0..d).map(|r| m[[r, col]] * m[[r, prev]]).sum();
                    for r in 0..d {
                        m[[r, col]] -= dot * m[[r, prev]];
                    }
                }
            }
            let norm: f64 = (0..d).map(|r| m[[r, col]] * m[[r, col]]).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for r in 0..d {
                m[[r, col]] /= norm;
            }
        }
        if ok {
            return m;
        }
    }
}

/// Build the agent family around a reference embedding: one noise-wrapped
/// member per scale, plus optional isometry (alignment 1) and inverted
/// (alignment 0) endpoints. Alignment is always measured, never inferred.
pub fn gen_agent_family(reference: &EmbeddingSet, config: &FamilyConfig) -> Result<Vec<FamilyMember>> {
    if config.noise_scales.is_empty() {
        return Err(Error::Input("noise scale grid must not be empty".into()));
    }
    let base = Agent::from_embedding(reference.clone(), EmbeddingMetric::Euclidean);
    let reference_space = triplet_space(&base)?;
    let mut members = Vec::new();

    let mut push = |agent: Agent, id: String, noise_scale: Option<f64>| -> Result<()> {
        let space = triplet_space(&agent)?;
        let alignment =
            1.0 - triplet_misalignment(&reference_space, &space, TieMode::Include)?;
        members.push(FamilyMember {
            agent: agent.with_label(id.clone()),
            id,
            noise_scale,
            triplet_alignment: alignment,
        });
        Ok(())
    };

    for (idx, &scale) in config.noise_scales.iter().enumerate() {
        let seed = derive_seed(config.seed, "family-noise", idx as u64);
        let agent = base.with_noise(scale, seed)?;
        push(agent, format!("noise({scale})"), Some(scale))?;
    }
    if config.include_isometry {
        let mut rng = derive_rng(config.seed, "family-isometry", 0);
        let d = reference.d();
        let rotation = random_rotation(d, &mut rng);
        let translation =
            Array1::from_shape_fn(d, |_| 3.0 * rng.sample::<f64, _>(StandardNormal));
        let scale = (rng.gen::<f64>() * 2.0 - 1.0).exp();
        let isometry = Isometry::new(rotation, translation, scale)?;
        push(base.with_isometry(&isometry)?, "isometry".into(), None)?;
    }
    if config.include_inverted {
        push(base.inverted(), "inverted".into(), None)?;
    }
    Ok(members)
}
