//! Self-describing run reports.
//!
//! Every CLI command emits a JSON summary embedding the tool version, the
//! fully resolved configuration (re-runnable as a config file), the seed, and
//! SHA-256 digests of the input files, alongside plot-ready CSV tables.
//! Nothing time- or path-dependent goes into a report, so a re-run with the
//! echoed configuration reproduces the bytes exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::channel::UshapePoint;
use crate::error::{Error, Result};
use crate::fewshot::FslRow;
use crate::metrics::AlignmentReport;
use crate::robustness::{AdversarialRow, ShiftRow};

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// The envelope every command's `summary.json` uses.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<R: Serialize> {
    pub tool: ToolInfo,
    pub command: String,
    pub seed: Option<u64>,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub results: R,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path)
        .map_err(|e| Error::Input(format!("cannot open `{}`: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 8192];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex_string(&hasher.finalize()))
}

fn hex_string(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn digest_inputs(paths: &[&Path]) -> Result<Vec<InputDigest>> {
    paths
        .iter()
        .map(|p| Ok(InputDigest { path: p.display().to_string(), sha256: sha256_file(p)? }))
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(out.as_bytes())?;
    file.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Input(format!("csv write failed: {e}"))
}

/// One alignment report row, flattened for batch concatenation.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentPairRow {
    pub agent_a: String,
    pub agent_b: String,
    pub triplet: f64,
    pub pearson: f64,
    pub spearman: f64,
    pub n_triplets_used: usize,
    pub ties_excluded: usize,
    pub sampling_m: Option<usize>,
    pub sampling_std_err: Option<f64>,
}

impl AlignmentPairRow {
    pub fn new(agent_a: &str, agent_b: &str, report: &AlignmentReport) -> Self {
        AlignmentPairRow {
            agent_a: agent_a.to_string(),
            agent_b: agent_b.to_string(),
            triplet: report.triplet_alignment,
            pearson: report.pearson,
            spearman: report.spearman,
            n_triplets_used: report.n_triplets_used,
            ties_excluded: report.n_ties_excluded,
            sampling_m: report.sampling.as_ref().map(|s| s.m),
            sampling_std_err: report.sampling.as_ref().map(|s| s.std_err),
        }
    }
}

pub fn write_alignment_pairs_csv(path: &Path, rows: &[AlignmentPairRow]) -> Result<()> {
    let mut writer = csv_writer(path)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

/// The `epsilon,mean_error,std_err,trials,budget` sweep table.
pub fn write_ushape_csv(path: &Path, points: &[UshapePoint]) -> Result<()> {
    let mut writer = csv_writer(path)?;
    writer
        .write_record(["epsilon", "mean_error", "std_err", "trials", "budget"])
        .map_err(csv_err)?;
    for p in points {
        writer
            .write_record([
                format!("{}", p.epsilon),
                format!("{}", p.mean_error),
                format!("{}", p.std_err),
                format!("{}", p.trials),
                format!("{}", p.budget),
            ])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_fsl_csv(path: &Path, rows: &[FslRow]) -> Result<()> {
    let mut writer = csv_writer(path)?;
    writer
        .write_record([
            "agent_id",
            "noise_scale",
            "triplet_alignment",
            "pearson_alignment",
            "spearman_alignment",
            "shot",
            "mean_accuracy",
            "std_err",
        ])
        .map_err(csv_err)?;
    for r in rows {
        writer
            .write_record([
                r.agent_id.clone(),
                r.noise_scale.map(|s| format!("{s}")).unwrap_or_default(),
                format!("{}", r.triplet_alignment),
                format!("{}", r.pearson_alignment),
                format!("{}", r.spearman_alignment),
                format!("{}", r.shot),
                format!("{}", r.mean_accuracy),
                format!("{}", r.std_err),
            ])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_adversarial_csv(path: &Path, rows: &[AdversarialRow]) -> Result<()> {
    let mut writer = csv_writer(path)?;
    writer
        .write_record(["epsilon", "formula_expectation", "empirical_mean", "empirical_stderr"])
        .map_err(csv_err)?;
    for r in rows {
        writer
            .write_record([
                format!("{}", r.epsilon),
                format!("{}", r.formula_expectation),
                format!("{}", r.empirical_mean),
                format!("{}", r.empirical_stderr),
            ])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_shift_csv(path: &Path, rows: &[ShiftRow]) -> Result<()> {
    let mut writer = csv_writer(path)?;
    writer
        .write_record(["magnitude", "mean_sensitivity", "std_err", "trials"])
        .map_err(csv_err)?;
    for r in rows {
        writer
            .write_record([
                format!("{}", r.magnitude),
                format!("{}", r.mean_sensitivity),
                format!("{}", r.std_err),
                format!("{}", r.trials),
            ])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}
