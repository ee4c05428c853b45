//! Stimulus sets and coordinate embeddings.

use std::collections::HashSet;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// An ordered set of uniquely identified stimuli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimulusSet {
    ids: Vec<String>,
}

impl StimulusSet {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Input(format!("duplicate stimulus id `{id}`")));
            }
        }
        Ok(StimulusSet { ids })
    }

    /// Auto-named set `s0..s{n-1}`, for synthetic data.
    pub fn indexed(n: usize) -> Self {
        StimulusSet { ids: (0..n).map(|i| format!("s{i}")).collect() }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }
}

/// Stimuli with an `n x d` coordinate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    stimuli: StimulusSet,
    coords: Array2<f64>,
}

impl EmbeddingSet {
    pub fn new(stimuli: StimulusSet, coords: Array2<f64>) -> Result<Self> {
        if coords.nrows() != stimuli.n() {
            return Err(Error::Input(format!(
                "coordinate rows ({}) do not match stimulus count ({})",
                coords.nrows(),
                stimuli.n()
            )));
        }
        if coords.ncols() == 0 {
            return Err(Error::Input("embedding dimensionality must be at least 1".into()));
        }
        for (row, id) in coords.rows().into_iter().zip(stimuli.ids()) {
            if let Some(col) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Input(format!(
                    "non-finite coordinate for stimulus `{id}` (column {col})"
                )));
            }
        }
        Ok(EmbeddingSet { stimuli, coords })
    }

    pub fn stimuli(&self) -> &StimulusSet {
        &self.stimuli
    }

    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.stimuli.n()
    }

    pub fn d(&self) -> usize {
        self.coords.ncols()
    }
}

/// A rotation + translation + uniform positive scaling of coordinate space.
#[derive(Debug, Clone)]
pub struct Isometry {
    rotation: Array2<f64>,
    translation: Array1<f64>,
    scale: f64,
}

impl Isometry {
    /// Maximum tolerated deviation of `R Rᵀ` from the identity.
    pub const ORTHOGONALITY_TOL: f64 = 1e-9;

    pub fn new(rotation: Array2<f64>, translation: Array1<f64>, scale: f64) -> Result<Self> {
        let d = rotation.nrows();
        if rotation.ncols() != d {
            return Err(Error::Input("rotation matrix must be square".into()));
        }
        if translation.len() != d {
            return Err(Error::Input(format!(
                "translation length ({}) does not match rotation dimension ({d})",
                translation.len()
            )));
        }
        if !(scale > 0.0) {
            return Err(Error::Input(format!("scale must be positive, got {scale}")));
        }
        let gram = rotation.dot(&rotation.t());
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[[i, j]] - target).abs() > Self::ORTHOGONALITY_TOL {
                    return Err(Error::Input(format!(
                        "rotation is not orthogonal: |RRᵀ - I| = {:.3e} at ({i}, {j})",
                        (gram[[i, j]] - target).abs()
                    )));
                }
            }
        }
        Ok(Isometry { rotation, translation, scale })
    }

    pub fn identity(d: usize) -> Self {
        Isometry {
            rotation: Array2::eye(d),
            translation: Array1::zeros(d),
            scale: 1.0,
        }
    }

    /// Pure uniform scaling.
    pub fn scaling(d: usize, scale: f64) -> Result<Self> {
        Self::new(Array2::eye(d), Array1::zeros(d), scale)
    }

    pub fn dim(&self) -> usize {
        self.rotation.nrows()
    }
}

/// Apply `x -> scale * R x + t` to every stimulus coordinate.
///
/// Distance orderings are preserved, so the returned embedding yields the same
/// triplet space up to exact-tie perturbation.
pub fn apply_isometry(embedding: &EmbeddingSet, isometry: &Isometry) -> Result<EmbeddingSet> {
    if isometry.dim() != embedding.d() {
        return Err(Error::Input(format!(
            "isometry dimension ({}) does not match embedding dimension ({})",
            isometry.dim(),
            embedding.d()
        )));
    }
    let mut coords = embedding.coords().dot(&isometry.rotation.t());
    coords *= isometry.scale;
    coords += &isometry.translation;
    EmbeddingSet::new(embedding.stimuli().clone(), coords)
}
