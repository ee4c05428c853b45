//! Statistical invariants that span modules: estimator unbiasedness, the
//! information-ordering of poorly vs well aligned channels, and the
//! domain-shift ordering across an agent family with a shift the teacher
//! does not register.

mod common;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use repalign::agent::{gaussian_agent, Agent, EmbeddingMetric, ExternalObject};
use repalign::channel::{ushape_curve, DecoderKind, UshapeConfig};
use repalign::metrics::{sampled_misalignment, triplet_misalignment, TieMode};
use repalign::rng::derive_rng;
use repalign::robustness::{domain_shift_sensitivity, object_relative_triplets, CentroidSet};
use repalign::stats::spearman;
use repalign::stimulus::{EmbeddingSet, StimulusSet};
use repalign::triplet::triplet_space;

#[test]
fn sampled_misalignment_is_unbiased() {
    // mean of 1000 seeded estimates stays within 3 pooled standard errors of
    // the exact misalignment
    let base = gaussian_agent(50, 3, 77);
    let other = base.with_noise(0.6, 78).unwrap();
    let exact = triplet_misalignment(
        &triplet_space(&base).unwrap(),
        &triplet_space(&other).unwrap(),
        TieMode::Include,
    )
    .unwrap();
    let m = 10_000usize;
    let seeds = 1000u64;
    let mut sum = 0.0;
    for seed in 0..seeds {
        sum += sampled_misalignment(&base, &other, m, seed).unwrap().epsilon_hat;
    }
    let mean = sum / seeds as f64;
    let pooled_se = (exact * (1.0 - exact) / m as f64 / seeds as f64).sqrt();
    assert!(
        (mean - exact).abs() <= 3.0 * pooled_se,
        "mean {mean} vs exact {exact} (pooled se {pooled_se})"
    );
}

#[test]
fn final_error_is_isotonic_in_channel_informativeness() {
    // With the known-epsilon decoder, mean final error should be a
    // nonincreasing function of |0.5 - epsilon|. Fit the errors, ordered by
    // decreasing informativeness, with a nondecreasing isotonic regression and
    // require the residuals to be noise-sized.
    let grid = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95];
    let points = ushape_curve(
        &grid,
        &UshapeConfig {
            n: 16,
            dim: 2,
            budget: 120,
            trials: 40,
            particles: 500,
            decoder: DecoderKind::KnownEpsilon,
            seed: 555,
        },
    )
    .unwrap();
    let mut ordered: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| ((0.5 - p.epsilon).abs(), p.mean_error, p.std_err))
        .collect();
    // most informative (largest |0.5 - eps|) first: errors should then rise
    ordered.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let errors: Vec<f64> = ordered.iter().map(|t| t.1).collect();
    let fitted = common::pava_nondecreasing(&errors);
    let mean_se = ordered.iter().map(|t| t.2).sum::<f64>() / ordered.len() as f64;
    let rms_residual = (errors
        .iter()
        .zip(&fitted)
        .map(|(e, f)| (e - f) * (e - f))
        .sum::<f64>()
        / errors.len() as f64)
        .sqrt();
    assert!(
        rms_residual <= 3.0 * mean_se,
        "isotonic residual {rms_residual} vs mean se {mean_se}; errors {errors:?}"
    );
}

#[test]
fn domain_shift_ordering_tracks_alignment() {
    // Appendix-corollary setting: the centroid update is small enough that
    // the teacher flips nothing, while students represent external objects
    // with noise at their own scale. Student flip fractions then order by
    // noise scale, i.e. by |0.5 - epsilon|.
    let n = 24;
    let dim = 3;
    let teacher = gaussian_agent(n, dim, 990);
    let stimuli_ids = StimulusSet::indexed(n);

    let mut rng = derive_rng(991, "corollary-centroids", 0);
    let k = 3;
    let centroids = Array2::from_shape_fn((k, dim), |_| rng.sample::<f64, _>(StandardNormal));
    let delta = 1e-9;
    let mut updated = centroids.clone();
    for v in updated.iter_mut() {
        *v += delta * rng.sample::<f64, _>(StandardNormal);
    }
    let c = CentroidSet::new(centroids.clone()).unwrap();
    let c_star = CentroidSet::new(updated.clone()).unwrap();
    assert_eq!(
        domain_shift_sensitivity(&teacher, &c, &c_star).unwrap(),
        0.0,
        "teacher must not register the infinitesimal shift"
    );

    let noise_scales = [0.1, 0.3, 0.6, 1.2, 2.4];
    let trials = 40u64;
    let mut epsilons = Vec::new();
    let mut sensitivities = Vec::new();
    let teacher_space = triplet_space(&teacher).unwrap();
    for (ai, &scale) in noise_scales.iter().enumerate() {
        // the student's own stimulus representation
        let student = teacher.with_noise(scale, 2000 + ai as u64).unwrap();
        let eps =
            triplet_misalignment(&teacher_space, &triplet_space(&student).unwrap(), TieMode::Include)
                .unwrap();
        epsilons.push(eps);

        let student_coords = student.embedding_coords().unwrap().clone();
        let student_agent = Agent::from_embedding(
            EmbeddingSet::new(stimuli_ids.clone(), student_coords).unwrap(),
            EmbeddingMetric::Euclidean,
        );
        let mut flip_sum = 0.0;
        for trial in 0..trials {
            let mut trial_rng =
                derive_rng(3000 + ai as u64, "corollary-object-noise", trial);
            let mut flips = 0usize;
            let mut total = 0usize;
            for centroid in 0..k {
                // the student re-encodes the centroid before and after the
                // update; its encoding noise is independent per observation
                let before: Vec<f64> = (0..dim)
                    .map(|d| centroids[[centroid, d]] + scale * trial_rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let after: Vec<f64> = (0..dim)
                    .map(|d| updated[[centroid, d]] + scale * trial_rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let t_before =
                    object_relative_triplets(&student_agent, &ExternalObject::Coords(before))
                        .unwrap();
                let t_after =
                    object_relative_triplets(&student_agent, &ExternalObject::Coords(after))
                        .unwrap();
                flips += t_before.disagreement(&t_after).unwrap();
                total += t_before.len();
            }
            flip_sum += flips as f64 / total as f64;
        }
        sensitivities.push(flip_sum / trials as f64);
    }
    // better-aligned students (smaller eps, larger |0.5 - eps|) flip less
    let informativeness: Vec<f64> = epsilons.iter().map(|e| (0.5 - e).abs()).collect();
    let rho = spearman(&informativeness, &sensitivities).unwrap().rho;
    assert!(
        rho < -0.9,
        "expected strongly negative ordering, got {rho}; eps {epsilons:?}, sens {sensitivities:?}"
    );
}
