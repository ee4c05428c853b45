//! Alignment metrics between two agents over shared stimuli.
//!
//! Three views of the same question: exact triplet agreement (normalized
//! Hamming distance between triplet spaces), a seeded Monte-Carlo estimate of
//! the same quantity, and Pearson/Spearman correlations over the pairwise
//! similarity vectors.

use serde::Serialize;

use crate::agent::{pairwise_distances, Agent};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::stats::{average_ranks, pearson_rho, Z_95};
use crate::triplet::{triplet_count, triplet_space, triplet_unindex, TripletSpace};
use rand::Rng;

/// How exact-tie comparisons participate in triplet metrics.
///
/// `Include` counts tied positions like any other bit (both spaces answer 0
/// on a tie); `Exclude` drops every position tied in either space and
/// renormalizes. Exclusion is the sensible default for integer-valued human
/// ratings, inclusion for float embeddings where ties are accidental.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieMode {
    Include,
    Exclude,
}

/// Fraction of triplets on which two spaces disagree, in `[0, 1]`.
pub fn triplet_misalignment(sa: &TripletSpace, sb: &TripletSpace, tie_mode: TieMode) -> Result<f64> {
    if sa.n() != sb.n() {
        return Err(Error::Input(format!(
            "triplet spaces have different n ({} vs {})",
            sa.n(),
            sb.n()
        )));
    }
    match tie_mode {
        TieMode::Include => Ok(sa.bits().xor_count(sb.bits()) as f64 / sa.len() as f64),
        TieMode::Exclude => {
            let mask = sa.ties().union(sb.ties());
            let excluded = mask.count_ones();
            let counted = sa.len() - excluded;
            if counted == 0 {
                return Err(Error::Degenerate(
                    "all triplet positions are tied; misalignment undefined in exclude mode".into(),
                ));
            }
            Ok(sa.bits().xor_count_masked(sb.bits(), &mask) as f64 / counted as f64)
        }
    }
}

/// Monte-Carlo estimate of the probability that a uniformly random triplet is
/// answered oppositely by the two agents.
#[derive(Debug, Clone, Serialize)]
pub struct StochasticMisalignment {
    pub epsilon_hat: f64,
    pub m: usize,
    pub std_err: f64,
    pub seed: u64,
}

/// Estimate misalignment from `m` uniform triplet draws (with replacement).
pub fn sampled_misalignment(
    agent_a: &Agent,
    agent_b: &Agent,
    m: usize,
    seed: u64,
) -> Result<StochasticMisalignment> {
    if !agent_a.shares_stimuli(agent_b) {
        return Err(Error::Input("agents do not share a stimulus set".into()));
    }
    let n = agent_a.n();
    if n < 3 {
        return Err(Error::Input(format!("need n >= 3 stimuli, got {n}")));
    }
    if m < 1 {
        return Err(Error::Input("need at least one sample".into()));
    }
    let da = pairwise_distances(agent_a)?;
    let db = pairwise_distances(agent_b)?;
    let total = triplet_count(n);
    let mut rng = derive_rng(seed, "sampled-misalignment", 0);
    let mut disagreements = 0usize;
    for _ in 0..m {
        let t = rng.gen_range(0..total);
        let (i, j, k) = triplet_unindex(t, n).expect("sampled index in range");
        let bit_a = da.get(i, j) < da.get(i, k);
        let bit_b = db.get(i, j) < db.get(i, k);
        if bit_a != bit_b {
            disagreements += 1;
        }
    }
    let epsilon_hat = disagreements as f64 / m as f64;
    let std_err = (epsilon_hat * (1.0 - epsilon_hat) / m as f64).sqrt();
    Ok(StochasticMisalignment { epsilon_hat, m, std_err, seed })
}

/// Pearson correlation over two upper-triangle similarity vectors.
pub fn pearson_pairwise_alignment(sim_a: &[f64], sim_b: &[f64]) -> Result<f64> {
    pearson_rho(sim_a, sim_b)
}

/// Spearman rank correlation over two upper-triangle similarity vectors;
/// ties receive average ranks.
pub fn spearman_pairwise_alignment(sim_a: &[f64], sim_b: &[f64]) -> Result<f64> {
    if sim_a.len() != sim_b.len() {
        return Err(Error::Input(format!(
            "vectors have different lengths ({} vs {})",
            sim_a.len(),
            sim_b.len()
        )));
    }
    if sim_a.len() < 2 {
        return Err(Error::Input("need at least 2 pair values".into()));
    }
    if sim_a.iter().all(|&v| v == sim_a[0]) || sim_b.iter().all(|&v| v == sim_b[0]) {
        return Err(Error::Degenerate("correlation undefined for a constant vector".into()));
    }
    pearson_rho(&average_ranks(sim_a), &average_ranks(sim_b))
}

/// Squared standardized scores `((x - mean) / sigma)^2` with the population
/// standard deviation. Turns a symmetric U into a linear relationship.
pub fn z_squared(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::Input(format!("need at least 2 values, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite value".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var == 0.0 {
        return Err(Error::Degenerate("z-scores undefined for a constant vector".into()));
    }
    let sigma = var.sqrt();
    Ok(values.iter().map(|v| ((v - mean) / sigma).powi(2)).collect())
}

/// How the triplet component of an [`AlignmentReport`] is computed.
#[derive(Debug, Clone, Copy)]
pub enum ReportMode {
    Exact,
    Sampled { m: usize, seed: u64 },
}

/// Sampling metadata attached to a report in sampled mode.
#[derive(Debug, Clone, Serialize)]
pub struct SamplingInfo {
    pub m: usize,
    pub std_err: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
}

/// The three alignment metrics plus tie diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentReport {
    #[serde(rename = "triplet")]
    pub triplet_alignment: f64,
    pub pearson: f64,
    pub spearman: f64,
    pub n_triplets_used: usize,
    #[serde(rename = "ties_excluded")]
    pub n_ties_excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingInfo>,
}

/// Compute all three metrics between two agents over shared stimuli.
///
/// Pearson and Spearman always run over the full pairwise similarity vectors
/// (negated distances); `mode` selects exact or sampled triplet alignment.
pub fn alignment_report(
    agent_a: &Agent,
    agent_b: &Agent,
    mode: ReportMode,
    tie_mode: TieMode,
) -> Result<AlignmentReport> {
    if !agent_a.shares_stimuli(agent_b) {
        return Err(Error::Input("agents do not share a stimulus set".into()));
    }
    let sim_a = agent_a.similarity_vector()?;
    let sim_b = agent_b.similarity_vector()?;
    let pearson = pearson_pairwise_alignment(&sim_a, &sim_b)?;
    let spearman = spearman_pairwise_alignment(&sim_a, &sim_b)?;

    match mode {
        ReportMode::Exact => {
            let sa = triplet_space(agent_a)?;
            let sb = triplet_space(agent_b)?;
            let mis = triplet_misalignment(&sa, &sb, tie_mode)?;
            let excluded = match tie_mode {
                TieMode::Include => 0,
                TieMode::Exclude => sa.ties().union_count(sb.ties()),
            };
            Ok(AlignmentReport {
                triplet_alignment: 1.0 - mis,
                pearson,
                spearman,
                n_triplets_used: sa.len() - excluded,
                n_ties_excluded: excluded,
                sampling: None,
            })
        }
        ReportMode::Sampled { m, seed } => {
            let est = sampled_misalignment(agent_a, agent_b, m, seed)?;
            let alignment = 1.0 - est.epsilon_hat;
            let ci = (
                (alignment - Z_95 * est.std_err).max(0.0),
                (alignment + Z_95 * est.std_err).min(1.0),
            );
            Ok(AlignmentReport {
                triplet_alignment: alignment,
                pearson,
                spearman,
                n_triplets_used: m,
                n_ties_excluded: 0,
                sampling: Some(SamplingInfo { m, std_err: est.std_err, ci95: ci, seed }),
            })
        }
    }
}
