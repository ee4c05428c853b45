//! Representational alignment from similarity triplets.
//!
//! Agents — coordinate embeddings or similarity matrices over a shared
//! stimulus set — are compared through the binary answers to every canonical
//! triplet question "is `i` closer to `j` than to `k`?". On top of that sit
//! alignment metrics (triplet agreement, Pearson/Spearman pairwise), the
//! binary-symmetric-channel view of teaching a misaligned student, few-shot
//! linear probes, and the domain-shift / adversarial robustness checks, all at
//! desk scale with seeded determinism throughout.
//!
//! See the crate examples for one runnable program per capability, and the
//! `repalign` binary for the file-based command-line interface.

pub mod agent;
pub mod bits;
pub mod channel;
pub mod error;
pub mod fewshot;
pub mod io;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod robustness;
pub mod stats;
pub mod stimulus;
pub mod synth;
pub mod triplet;

pub use agent::{
    gaussian_agent, gaussian_embedding, pairwise_distances, Agent, DistanceMatrix,
    EmbeddingMetric, ExternalObject,
};
pub use channel::{
    bsc_capacity, query_lower_bound, simulate_teaching, ushape_curve, ushape_outcome,
    ChannelSpec, DecoderKind, TeachingConfig, TeachingTrace, UshapeConfig, UshapeOutcome,
    UshapePoint,
};
pub use error::{Error, Result};
pub use fewshot::{
    evaluate_nshot, evaluate_split, nshot_split, probe_loss_and_grad, train_linear_probe,
    ushape_fsl_experiment, FslConfig, FslRow, LabeledDataset, LinearProbe, ProbeConfig,
};
pub use metrics::{
    alignment_report, pearson_pairwise_alignment, sampled_misalignment,
    spearman_pairwise_alignment, triplet_misalignment, z_squared, AlignmentReport, ReportMode,
    SamplingInfo, StochasticMisalignment, TieMode,
};
pub use robustness::{
    adversarial_monotonicity_check, domain_shift_sensitivity, expected_max_binomial,
    object_relative_triplets, pair_count, select_adversarial, shift_magnitude_sweep,
    AdversarialRow, CentroidSet, ObjectRelativeTriplets, ShiftRow,
};
pub use stats::{
    partial_correlation, partial_correlation_from_rhos, pearson, planted_quadratic_check,
    spearman, CorrelationResult,
};
pub use stimulus::{apply_isometry, EmbeddingSet, Isometry, StimulusSet};
pub use synth::{
    gen_agent_family, gen_clustered_embedding, random_rotation, FamilyConfig, FamilyMember,
    SynthSpec,
};
pub use triplet::{
    triplet_count, triplet_index, triplet_space, triplet_space_from_distances, triplet_unindex,
    TripletSpace,
};
