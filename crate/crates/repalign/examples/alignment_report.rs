//! Compare two agents over shared stimuli: exact triplet agreement plus
//! Pearson/Spearman pairwise alignment, then the seeded Monte-Carlo estimate.
//!
//! ```bash
//! cargo run --example alignment_report
//! ```

use repalign::agent::{gaussian_agent, EmbeddingMetric};
use repalign::metrics::{alignment_report, ReportMode, TieMode};
use repalign::stimulus::Isometry;

fn main() -> repalign::Result<()> {
    let reference = gaussian_agent(40, 4, 7);
    let noisy = reference.with_noise(0.6, 8)?;
    let scaled = reference.with_isometry(&Isometry::scaling(4, 3.0)?)?;
    let inverted = reference.inverted();

    println!("{:<22} {:>8} {:>8} {:>9}", "pair", "triplet", "pearson", "spearman");
    for (name, other) in [
        ("reference vs noisy", &noisy),
        ("reference vs scaled", &scaled),
        ("reference vs inverted", &inverted),
    ] {
        let report = alignment_report(&reference, other, ReportMode::Exact, TieMode::Include)?;
        println!(
            "{:<22} {:>8.4} {:>8.4} {:>9.4}",
            name, report.triplet_alignment, report.pearson, report.spearman
        );
    }

    let sampled =
        alignment_report(&reference, &noisy, ReportMode::Sampled { m: 20_000, seed: 1 }, TieMode::Include)?;
    let info = sampled.sampling.expect("sampled mode");
    println!(
        "\nsampled triplet alignment: {:.4} +- {:.4} (m = {}, seed = {}, 95% CI [{:.4}, {:.4}])",
        sampled.triplet_alignment, info.std_err, info.m, info.seed, info.ci95.0, info.ci95.1
    );
    println!("kernel used for embedding agents: {:?}", EmbeddingMetric::Euclidean);
    Ok(())
}
