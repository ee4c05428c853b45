//! Binary-symmetric-channel mathematics and the teacher/student triplet game.
//!
//! A teacher who sees a new object answers random triplet queries of the form
//! "is the new object closer to stimulus j than to stimulus k?"; each answer
//! bit independently flips with probability epsilon before the student sees
//! it. The student localizes the object with likelihood-weighted particles
//! over the shared bounding box. At epsilon 0 this reduces to the half-plane
//! elimination picture; at epsilon 0.5 the channel carries nothing and the
//! posterior never moves; at epsilon 1 a decoder that knows epsilon simply
//! reads every bit inverted. Sweeping epsilon at a fixed query budget exposes
//! the U-shape: error is worst at 0.5 and symmetric about it.
//!
//! All logarithms are base 2; the bounds count bits.

use serde::Serialize;

use crate::agent::Agent;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, derive_seed};
use crate::stimulus::{EmbeddingSet, StimulusSet};
use crate::triplet::{triplet_count, triplet_unindex};
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

/// Flip probability clamp used when turning a decoder's epsilon model into
/// per-bit likelihoods, so hard eliminations keep a tiny floor weight.
const LIKELIHOOD_FLOOR: f64 = 1e-12;

/// Capacity of a binary symmetric channel with flip probability `epsilon`:
/// `1 + e log2(e) + (1-e) log2(1-e)`, with `0 log 0 = 0`.
pub fn bsc_capacity(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Input(format!("epsilon must be in [0, 1], got {epsilon}")));
    }
    fn xlog2(p: f64) -> f64 {
        if p == 0.0 {
            0.0
        } else {
            p * p.log2()
        }
    }
    Ok(1.0 + xlog2(epsilon) + xlog2(1.0 - epsilon))
}

/// Order-of-magnitude query bound for learning `m` new objects in `d`
/// dimensions over `n` shared stimuli through a channel with flip probability
/// `epsilon`: `m * d * log2(n) / C(epsilon)`. Returns infinity at epsilon 0.5,
/// where the capacity vanishes.
pub fn query_lower_bound(n: usize, d: usize, m: usize, epsilon: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Input(format!("need n >= 2 shared stimuli, got {n}")));
    }
    if d < 1 || m < 1 {
        return Err(Error::Input("d and m must be at least 1".into()));
    }
    let capacity = bsc_capacity(epsilon)?;
    if capacity == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((m * d) as f64 * (n as f64).log2() / capacity)
}

/// The bit channel between teacher and student.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelSpec {
    pub epsilon: f64,
    pub seed: u64,
}

/// Student-side interpretation of received bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    /// Likelihood weighting with the true channel epsilon.
    KnownEpsilon,
    /// Estimates epsilon from shared-data triplets before teaching
    /// (Laplace-smoothed disagreement rate), then proceeds as `KnownEpsilon`.
    Calibrated { calibration_triplets: usize },
    /// Assumes epsilon 0: hard half-plane elimination, with a floor weight so
    /// the posterior can recover when every particle has been contradicted.
    Naive,
}

/// One teacher query and what the student received.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QueryRecord {
    /// Stimulus pair (j, k): "is the new object closer to j than to k?"
    pub pair: (usize, usize),
    pub teacher_bit: bool,
    pub received_bit: bool,
}

/// Particle posterior and error history of one teaching episode.
#[derive(Debug, Clone)]
pub struct TeachingTrace {
    pub queries: Vec<QueryRecord>,
    /// Candidate locations, one row per particle.
    pub particles: Array2<f64>,
    /// Posterior weights; nonnegative, summing to 1 after every update.
    pub weights: Vec<f64>,
    /// Weighted mean distance to the true location after each query.
    pub error_curve: Vec<f64>,
    /// Same error measure before any query was answered.
    pub prior_error: f64,
    /// The epsilon the decoder actually used (estimated, for `Calibrated`).
    pub decoder_epsilon: f64,
    pub budget: usize,
}

/// Simulation parameters independent of the channel.
#[derive(Debug, Clone)]
pub struct TeachingConfig {
    pub budget: usize,
    pub decoder: DecoderKind,
    pub particles: usize,
    pub seed: u64,
}

struct Bbox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn bounding_box(coords: &Array2<f64>) -> Result<Bbox> {
    let d = coords.ncols();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in coords.rows() {
        for (c, &v) in row.iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    if lo.iter().zip(&hi).all(|(a, b)| a == b) {
        return Err(Error::Input(
            "degenerate teacher embedding: all stimuli share one location".into(),
        ));
    }
    Ok(Bbox { lo, hi })
}

impl Bbox {
    /// Expand every side to 125% of its length (or to a unit box around a
    /// collapsed axis), keeping the center fixed.
    fn inflated(&self) -> Bbox {
        let mut lo = Vec::with_capacity(self.lo.len());
        let mut hi = Vec::with_capacity(self.hi.len());
        for (&a, &b) in self.lo.iter().zip(&self.hi) {
            let center = 0.5 * (a + b);
            let half = if b > a { 0.625 * (b - a) } else { 0.5 };
            lo.push(center - half);
            hi.push(center + half);
        }
        Bbox { lo, hi }
    }

    fn diagonal(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

/// Diagonal of the (un-inflated) bounding box of an embedding's coordinates.
pub fn data_diagonal(coords: &Array2<f64>) -> Result<f64> {
    Ok(bounding_box(coords)?.diagonal())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Run one teaching episode.
///
/// The teacher must be embedding-backed with 1 to 3 dimensions; geometry is
/// Euclidean on its coordinates. Query pairs and particles derive from
/// `config.seed`; bit flips derive from `channel.seed` (one uniform draw per
/// bit, so epsilon 0 and epsilon 1 share the same stream with complementary
/// outcomes).
pub fn simulate_teaching(
    teacher: &Agent,
    new_object: &[f64],
    channel: &ChannelSpec,
    config: &TeachingConfig,
) -> Result<TeachingTrace> {
    let coords = teacher
        .embedding_coords()
        .ok_or_else(|| Error::Input("teaching requires an embedding-backed teacher".into()))?;
    let n = coords.nrows();
    let d = coords.ncols();
    if !(1..=3).contains(&d) {
        return Err(Error::Input(format!(
            "teaching simulation supports 1 to 3 dimensions, got {d}"
        )));
    }
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 shared stimuli, got {n}")));
    }
    if new_object.len() != d {
        return Err(Error::Input(format!(
            "new object has {} coordinates, teacher embedding has {d}",
            new_object.len()
        )));
    }
    if config.budget < 1 {
        return Err(Error::Input("query budget must be at least 1".into()));
    }
    if config.particles < 100 {
        return Err(Error::Input(format!(
            "need at least 100 particles, got {}",
            config.particles
        )));
    }
    if !(0.0..=1.0).contains(&channel.epsilon) {
        return Err(Error::Input(format!("epsilon must be in [0, 1], got {}", channel.epsilon)));
    }

    let prior_box = bounding_box(coords)?.inflated();
    let mut flip_rng = derive_rng(channel.seed, "bsc-flips", 0);
    let mut query_rng = derive_rng(config.seed, "teach-queries", 0);
    let mut particle_rng = derive_rng(config.seed, "teach-particles", 0);

    // Decoder epsilon model.
    let decoder_epsilon = match config.decoder {
        DecoderKind::KnownEpsilon => channel.epsilon,
        DecoderKind::Naive => 0.0,
        DecoderKind::Calibrated { calibration_triplets } => {
            if calibration_triplets < 1 {
                return Err(Error::Input("need at least 1 calibration triplet".into()));
            }
            if n < 3 {
                return Err(Error::Input("calibration requires n >= 3 shared stimuli".into()));
            }
            let mut calib_rng = derive_rng(config.seed, "teach-calibration", 0);
            let total = triplet_count(n);
            let mut disagreements = 0usize;
            for _ in 0..calibration_triplets {
                let t = calib_rng.gen_range(0..total);
                let (i, j, k) = triplet_unindex(t, n).expect("in range");
                let truth = squared_distance(
                    coords.row(i).as_slice().unwrap(),
                    coords.row(j).as_slice().unwrap(),
                ) < squared_distance(
                    coords.row(i).as_slice().unwrap(),
                    coords.row(k).as_slice().unwrap(),
                );
                let received = if flip_rng.gen::<f64>() < channel.epsilon { !truth } else { truth };
                // the student's own answer over shared data is the truth here
                if received != truth {
                    disagreements += 1;
                }
            }
            (disagreements as f64 + 1.0) / (calibration_triplets as f64 + 2.0)
        }
    };
    // A decoder epsilon above 0.5 means "read every bit inverted with the
    // mirrored flip probability"; expressing that as swapped likelihood
    // factors keeps the epsilon/1-epsilon runs exactly symmetric.
    let (like_match, like_mismatch) = {
        let flipped_reading = decoder_epsilon > 0.5;
        let p = if flipped_reading { 1.0 - decoder_epsilon } else { decoder_epsilon };
        let p = p.max(LIKELIHOOD_FLOOR);
        if flipped_reading {
            (p, 1.0 - p)
        } else {
            (1.0 - p, p)
        }
    };

    // Particle prior: uniform over the inflated bounding box.
    let m = config.particles;
    let mut particles = Array2::<f64>::zeros((m, d));
    for p in 0..m {
        for c in 0..d {
            let u: f64 = particle_rng.gen();
            particles[[p, c]] = prior_box.lo[c] + u * (prior_box.hi[c] - prior_box.lo[c]);
        }
    }
    let mut weights = vec![1.0 / m as f64; m];

    let particle_error = |weights: &[f64], particles: &Array2<f64>| -> f64 {
        weights
            .iter()
            .zip(particles.rows())
            .map(|(w, row)| w * squared_distance(row.as_slice().unwrap(), new_object).sqrt())
            .sum()
    };
    let prior_error = particle_error(&weights, &particles);

    let object_distances: Vec<f64> = (0..n)
        .map(|i| squared_distance(coords.row(i).as_slice().unwrap(), new_object))
        .collect();

    let mut queries = Vec::with_capacity(config.budget);
    let mut error_curve = Vec::with_capacity(config.budget);
    for _ in 0..config.budget {
        let j = query_rng.gen_range(0..n);
        let k_raw = query_rng.gen_range(0..n - 1);
        let k = if k_raw >= j { k_raw + 1 } else { k_raw };
        let teacher_bit = object_distances[j] < object_distances[k];
        let received_bit =
            if flip_rng.gen::<f64>() < channel.epsilon { !teacher_bit } else { teacher_bit };
        queries.push(QueryRecord { pair: (j, k), teacher_bit, received_bit });

        let xj = coords.row(j);
        let xj = xj.as_slice().unwrap();
        let xk = coords.row(k);
        let xk = xk.as_slice().unwrap();
        let mut sum = 0.0;
        for (p, w) in weights.iter_mut().enumerate() {
            let row = particles.row(p);
            let row = row.as_slice().unwrap();
            let predicted = squared_distance(row, xj) < squared_distance(row, xk);
            *w *= if predicted == received_bit { like_match } else { like_mismatch };
            sum += *w;
        }
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::Numeric(format!("posterior weight sum degenerated to {sum}")));
        }
        for w in weights.iter_mut() {
            *w /= sum;
        }
        error_curve.push(particle_error(&weights, &particles));
    }

    Ok(TeachingTrace {
        queries,
        particles,
        weights,
        error_curve,
        prior_error,
        decoder_epsilon,
        budget: config.budget,
    })
}

/// One row of a U-shape sweep.
#[derive(Debug, Clone, Serialize)]
pub struct UshapePoint {
    pub epsilon: f64,
    pub mean_error: f64,
    pub std_err: f64,
    pub trials: usize,
    pub budget: usize,
    /// Mean zero-query baseline over the same trials (not part of the CSV).
    pub mean_prior_error: f64,
}

/// Sweep parameters. Each trial draws a fresh Gaussian teacher configuration
/// and a new object uniform in the data box; trial data is shared across the
/// epsilon grid so comparisons are paired.
#[derive(Debug, Clone)]
pub struct UshapeConfig {
    pub n: usize,
    pub dim: usize,
    pub budget: usize,
    pub trials: usize,
    pub particles: usize,
    pub decoder: DecoderKind,
    pub seed: u64,
}

impl Default for UshapeConfig {
    fn default() -> Self {
        UshapeConfig {
            n: 32,
            dim: 2,
            budget: 200,
            trials: 100,
            particles: 1000,
            decoder: DecoderKind::KnownEpsilon,
            seed: 0,
        }
    }
}

/// Mean final localization error per epsilon at a fixed budget.
pub fn ushape_curve(epsilons: &[f64], config: &UshapeConfig) -> Result<Vec<UshapePoint>> {
    if epsilons.is_empty() {
        return Err(Error::Input("epsilon grid must not be empty".into()));
    }
    for &e in epsilons {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::Input(format!("epsilon must be in [0, 1], got {e}")));
        }
    }
    if config.trials < 1 {
        return Err(Error::Input("need at least 1 trial".into()));
    }

    // Trial data (teacher coordinates, object) is independent of epsilon.
    let mut trial_data = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let mut rng = derive_rng(config.seed, "ushape-data", trial as u64);
        let coords = Array2::from_shape_fn((config.n, config.dim), |_| {
            rng.sample::<f64, _>(StandardNormal)
        });
        let bbox = bounding_box(&coords)?;
        let object: Vec<f64> = (0..config.dim)
            .map(|c| bbox.lo[c] + rng.gen::<f64>() * (bbox.hi[c] - bbox.lo[c]))
            .collect();
        let embedding = EmbeddingSet::new(StimulusSet::indexed(config.n), coords)?;
        trial_data.push((embedding, object));
    }

    let mut points = Vec::with_capacity(epsilons.len());
    for (pi, &epsilon) in epsilons.iter().enumerate() {
        let mut finals = Vec::with_capacity(config.trials);
        let mut priors = Vec::with_capacity(config.trials);
        for (trial, (embedding, object)) in trial_data.iter().enumerate() {
            let teacher = Agent::from_embedding(
                embedding.clone(),
                crate::agent::EmbeddingMetric::Euclidean,
            );
            let channel = ChannelSpec {
                epsilon,
                seed: derive_seed(config.seed, "ushape-channel", (pi * config.trials + trial) as u64),
            };
            let sim = TeachingConfig {
                budget: config.budget,
                decoder: config.decoder,
                particles: config.particles,
                seed: derive_seed(config.seed, "ushape-sim", trial as u64),
            };
            let trace = simulate_teaching(&teacher, object, &channel, &sim)?;
            finals.push(*trace.error_curve.last().expect("budget >= 1"));
            priors.push(trace.prior_error);
        }
        let t = config.trials as f64;
        let mean = finals.iter().sum::<f64>() / t;
        let var = finals.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / if config.trials > 1 { t - 1.0 } else { 1.0 };
        points.push(UshapePoint {
            epsilon,
            mean_error: mean,
            std_err: (var / t).sqrt(),
            trials: config.trials,
            budget: config.budget,
            mean_prior_error: priors.iter().sum::<f64>() / t,
        });
    }
    Ok(points)
}

/// Summary comparison of a sweep's midpoint against its endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct UshapeOutcome {
    pub epsilon_low: f64,
    pub error_low: f64,
    pub epsilon_mid: f64,
    pub error_mid: f64,
    pub epsilon_high: f64,
    pub error_high: f64,
    /// Whether mid-epsilon error strictly exceeds both endpoint errors.
    pub u_shape_detected: bool,
}

/// Classify a sweep as U-shaped; `None` when the grid has fewer than 3 points.
pub fn ushape_outcome(points: &[UshapePoint]) -> Option<UshapeOutcome> {
    if points.len() < 3 {
        return None;
    }
    let mut sorted: Vec<&UshapePoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.epsilon.partial_cmp(&b.epsilon).unwrap());
    let low = sorted[0];
    let high = sorted[sorted.len() - 1];
    let mid = sorted
        .iter()
        .min_by(|a, b| {
            (a.epsilon - 0.5).abs().partial_cmp(&(b.epsilon - 0.5).abs()).unwrap()
        })
        .unwrap();
    Some(UshapeOutcome {
        epsilon_low: low.epsilon,
        error_low: low.mean_error,
        epsilon_mid: mid.epsilon,
        error_mid: mid.mean_error,
        epsilon_high: high.epsilon,
        error_high: high.mean_error,
        u_shape_detected: mid.mean_error > low.mean_error && mid.mean_error > high.mean_error,
    })
}
