//! Black-box tests of the `repalign` binary: exit codes, error messages, and
//! consistency of CLI reports with direct library calls.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use repalign::agent::{Agent, EmbeddingMetric};
use repalign::io::{read_embedding_csv, write_embedding_csv};
use repalign::metrics::{alignment_report, ReportMode, TieMode};
use repalign::stats::partial_correlation;
use repalign::synth::{gen_agent_family, gen_clustered_embedding, FamilyConfig, SynthSpec};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repalign"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn repalign")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn summary_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn align_same_file_twice_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (emb, _) = gen_clustered_embedding(&SynthSpec {
        per_class: 6,
        classes: 3,
        dim: 3,
        separation: 5.0,
        seed: 1,
    })
    .unwrap();
    write_embedding_csv(&root.join("a.csv"), &emb).unwrap();
    let out = run(&["align", "a.csv", "a.csv", "--out", "rep"], root);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    let avg = &summary["results"]["average"];
    assert_eq!(avg["triplet"].as_f64().unwrap(), 1.0);
    assert_eq!(avg["pearson"].as_f64().unwrap(), 1.0);
    assert_eq!(avg["spearman"].as_f64().unwrap(), 1.0);
}

#[test]
fn align_joins_by_id_across_row_permutations() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (emb, _) = gen_clustered_embedding(&SynthSpec {
        per_class: 5,
        classes: 3,
        dim: 2,
        separation: 4.0,
        seed: 2,
    })
    .unwrap();
    write_embedding_csv(&root.join("a.csv"), &emb).unwrap();
    // row-permuted copy: reverse the data rows
    let text = fs::read_to_string(root.join("a.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let mut permuted = String::from(header);
    permuted.push('\n');
    permuted.push_str(&lines.join("\n"));
    permuted.push('\n');
    fs::write(root.join("b.csv"), permuted).unwrap();

    let out = run(&["align", "a.csv", "b.csv", "--out", "rep"], root);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    assert_eq!(summary["results"]["average"]["triplet"].as_f64().unwrap(), 1.0);
    assert_eq!(summary["results"]["average"]["spearman"].as_f64().unwrap(), 1.0);
}

#[test]
fn align_report_matches_direct_library_call() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (reference, _) = gen_clustered_embedding(&SynthSpec {
        per_class: 6,
        classes: 3,
        dim: 3,
        separation: 5.0,
        seed: 5,
    })
    .unwrap();
    let family = gen_agent_family(
        &reference,
        &FamilyConfig {
            noise_scales: vec![0.8],
            include_inverted: false,
            include_isometry: false,
            seed: 6,
        },
    )
    .unwrap();
    let noisy_coords = family[0].agent.embedding_coords().unwrap().clone();
    let noisy = repalign::stimulus::EmbeddingSet::new(reference.stimuli().clone(), noisy_coords)
        .unwrap();
    write_embedding_csv(&root.join("ref.csv"), &reference).unwrap();
    write_embedding_csv(&root.join("noisy.csv"), &noisy).unwrap();

    let out = run(&["align", "ref.csv", "noisy.csv", "--out", "rep"], root);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    let cli_report = &summary["results"]["pairs"][0]["report"];

    let agent_a = Agent::from_embedding(read_embedding_csv(&root.join("ref.csv")).unwrap(),
        EmbeddingMetric::Euclidean);
    let agent_b = Agent::from_embedding(read_embedding_csv(&root.join("noisy.csv")).unwrap(),
        EmbeddingMetric::Euclidean);
    let lib_report =
        alignment_report(&agent_a, &agent_b, ReportMode::Exact, TieMode::Include).unwrap();
    assert_eq!(cli_report["triplet"].as_f64().unwrap(), lib_report.triplet_alignment);
    assert_eq!(cli_report["pearson"].as_f64().unwrap(), lib_report.pearson);
    assert_eq!(cli_report["spearman"].as_f64().unwrap(), lib_report.spearman);
}

#[test]
fn align_id_mismatch_exits_2_with_symmetric_difference() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("a.csv"), "id,x0\nalpha,1.0\nbeta,2.0\ngamma,5.0\n").unwrap();
    fs::write(root.join("b.csv"), "id,x0\nalpha,1.0\nbeta,2.0\ndelta,5.0\n").unwrap();
    let out = run(&["align", "a.csv", "b.csv", "--out", "rep"], root);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("gamma"), "{err}");
    assert!(err.contains("delta"), "{err}");
}

#[test]
fn malformed_csv_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("a.csv"), "id,x0\ns0,1.0\ns1,not-a-number\n").unwrap();
    fs::write(root.join("b.csv"), "id,x0\ns0,1.0\ns1,2.0\n").unwrap();
    let out = run(&["align", "a.csv", "b.csv", "--out", "rep"], root);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn missing_input_file_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = run(&["align", "nope.csv", "other.csv", "--out", "rep"], root);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("nope.csv"));

    let out = run(&["stats", "--input", "missing.csv", "--out", "rep"], root);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("missing.csv"));
}

#[test]
fn invalid_flag_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = run(
        &["simulate-teaching", "--decoder", "psychic", "--seed", "1", "--out", "rep"],
        root,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("psychic"));

    // unknown flag: clap usage error, also exit 2
    let out = run(&["gen", "--bogus-flag", "--seed", "1", "--out", "rep"], root);
    assert_eq!(out.status.code(), Some(2));

    // missing required seed
    let out = run(&["gen", "--out", "rep"], root);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("seed"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("bad.cfg"), "seed = 1\nwat = 2\n").unwrap();
    let out = run(&["gen", "--config", "bad.cfg", "--out", "rep"], root);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("wat"));
}

#[test]
fn cli_flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("gen.cfg"), "seed = 1\nper-class = 5\nclasses = 2\ndim = 2\n").unwrap();
    let out = run(
        &["gen", "--config", "gen.cfg", "--per-class", "7", "--out", "rep"],
        root,
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    assert_eq!(summary["config"]["per-class"].as_str().unwrap(), "7");
    assert_eq!(summary["results"]["stimuli"].as_u64().unwrap(), 14);
}

#[test]
fn stats_command_reproduces_library_partial_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let x = [0.12, 0.5, 0.31, 0.88, 0.67, 0.45, 0.91, 0.23];
    let y = [0.8, 0.4, 0.55, 0.9, 0.52, 0.43, 0.99, 0.35];
    let z = [0.3, 0.33, 0.38, 0.6, 0.52, 0.41, 0.73, 0.3];
    let mut csv = String::from("alignment,performance,covariate\n");
    for i in 0..x.len() {
        csv.push_str(&format!("{},{},{}\n", x[i], y[i], z[i]));
    }
    fs::write(root.join("data.csv"), csv).unwrap();
    let out = run(&["stats", "--input", "data.csv", "--out", "rep"], root);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    let expected = partial_correlation(&x, &y, &z).unwrap();
    assert_eq!(summary["results"]["partial"]["rho"].as_f64().unwrap(), expected.rho);
    assert_eq!(summary["results"]["partial"]["p_value"].as_f64().unwrap(), expected.p_value);
}

#[test]
fn robustness_reports_zero_identity_sensitivity() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = run(
        &["robustness", "--stimuli", "10", "--trials", "5", "--pool-size", "3", "--seed", "3", "--out", "rep"],
        root,
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    assert_eq!(summary["results"]["identity_update_sensitivity"].as_f64().unwrap(), 0.0);
    assert_eq!(summary["results"]["formula_strictly_increasing"].as_bool().unwrap(), true);
}

#[test]
fn noiseless_grid_beats_prior_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = run(
        &[
            "simulate-teaching",
            "--epsilons",
            "0",
            "--budget",
            "120",
            "--trials",
            "20",
            "--particles",
            "400",
            "--stimuli",
            "16",
            "--seed",
            "9",
            "--out",
            "rep",
        ],
        root,
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    let point = &summary["results"]["points"][0];
    let mean_error = point["mean_error"].as_f64().unwrap();
    let prior = point["mean_prior_error"].as_f64().unwrap();
    assert!(mean_error < prior, "final {mean_error} vs prior {prior}");
}

#[test]
fn similarity_files_are_supported() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(
        root.join("s1.csv"),
        "id,a,b,c\na,1.0,0.8,0.2\nb,0.8,1.0,0.5\nc,0.2,0.5,1.0\n",
    )
    .unwrap();
    // monotone rescaling of the same ordering
    fs::write(
        root.join("s2.csv"),
        "id,a,b,c\na,10,8.5,2\nb,8.5,10,6\nc,2,6,10\n",
    )
    .unwrap();
    let out = run(&["align", "s1.csv", "s2.csv", "--similarity", "--out", "rep"], root);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let summary = summary_json(&root.join("rep"));
    assert_eq!(summary["results"]["average"]["triplet"].as_f64().unwrap(), 1.0);
    let spearman = summary["results"]["average"]["spearman"].as_f64().unwrap();
    assert!((spearman - 1.0).abs() < 1e-12, "spearman {spearman}");
}
