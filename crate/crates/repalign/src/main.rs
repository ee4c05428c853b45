//! Command-line front end: data ingestion, experiment orchestration, and
//! report emission. All computation lives in the library; this binary only
//! resolves configuration (CLI flags override config-file values, which
//! override defaults), runs the corresponding library call, and writes CSV
//! tables plus a self-describing `summary.json` under `--out`.
//!
//! Exit codes: 0 success, 2 input/usage error, 3 numeric failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::Serialize;

use repalign::agent::{gaussian_agent, Agent, EmbeddingMetric};
use repalign::channel::{ushape_curve, ushape_outcome, DecoderKind, UshapeConfig, UshapePoint};
use repalign::error::{Error, Result};
use repalign::fewshot::{ushape_fsl_experiment, FslConfig, FslRow, ProbeConfig};
use repalign::io;
use repalign::metrics::{alignment_report, z_squared, AlignmentReport, ReportMode, TieMode};
use repalign::report::{
    digest_inputs, write_adversarial_csv, write_alignment_pairs_csv, write_fsl_csv,
    write_json, write_shift_csv, write_ushape_csv, AlignmentPairRow, RunSummary, ToolInfo,
};
use repalign::rng::{derive_rng, derive_seed};
use repalign::robustness::{
    adversarial_monotonicity_check, domain_shift_sensitivity, shift_magnitude_sweep,
    AdversarialRow, CentroidSet, ShiftRow,
};
use repalign::stats::{partial_correlation, pearson, spearman, CorrelationResult};
use repalign::synth::{gen_clustered_embedding, SynthSpec};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Parser)]
#[command(name = "repalign", version, about = "Representational alignment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Alignment metrics between two or more agent files over shared stimuli.
    Align(AlignArgs),
    /// Teacher/student localization error across a channel-noise grid.
    SimulateTeaching(SimulateArgs),
    /// Few-shot accuracy across a synthetic agent family.
    UshapeFsl(FslArgs),
    /// Domain-shift sensitivity sweep and adversarial order-statistic table.
    Robustness(RobustnessArgs),
    /// Pearson, Spearman, and partial correlation over CSV columns.
    Stats(StatsArgs),
    /// Generate a clustered reference embedding and labels.
    Gen(GenArgs),
}

#[derive(Args)]
struct AlignArgs {
    /// Agent files (embedding CSVs, or similarity CSVs with --similarity).
    files: Vec<String>,
    /// Treat input files as similarity matrices.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    similarity: Option<bool>,
    /// Similarity kernel for embedding agents: neg-euclidean, dot, or cosine.
    #[arg(long)]
    kernel: Option<String>,
    /// Tie handling: include or exclude.
    #[arg(long)]
    tie_mode: Option<String>,
    /// Use the Monte-Carlo triplet estimator with this many samples.
    #[arg(long)]
    sampled: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated epsilon grid.
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// known-epsilon, calibrated, or naive.
    #[arg(long)]
    decoder: Option<String>,
    /// Calibration triplet count for the calibrated decoder.
    #[arg(long)]
    calibration: Option<usize>,
    #[arg(long)]
    particles: Option<usize>,
    /// Number of shared stimuli per trial.
    #[arg(long)]
    stimuli: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FslArgs {
    #[arg(long)]
    noise_scales: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    per_class: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    include_inverted: Option<bool>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2_penalty: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RobustnessArgs {
    #[arg(long)]
    stimuli: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Number of class centroids.
    #[arg(long)]
    classes: Option<usize>,
    /// Comma-separated centroid update magnitudes.
    #[arg(long)]
    magnitudes: Option<String>,
    /// Comma-separated epsilon grid for the adversarial table (open interval).
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Input CSV with one column per variable.
    #[arg(long)]
    input: Option<String>,
    /// Column name for the first variable.
    #[arg(long)]
    x: Option<String>,
    /// Column name for the second variable.
    #[arg(long)]
    y: Option<String>,
    /// Column name for the covariate.
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    per_class: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Align(args) => cmd_align(args),
        Command::SimulateTeaching(args) => cmd_simulate(args),
        Command::UshapeFsl(args) => cmd_ushape_fsl(args),
        Command::Robustness(args) => cmd_robustness(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// config-file merging

/// Key-value config file: `key = value` lines, `#` comments. CLI flags take
/// precedence; unknown keys are rejected.
struct Cfg {
    map: BTreeMap<String, String>,
}

impl Cfg {
    fn load(path: Option<&Path>) -> Result<Cfg> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("cannot open `{}`: {e}", path.display())))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Error::Input(format!(
                        "config line {} is not `key = value`: `{line}`",
                        lineno + 1
                    )));
                };
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Cfg { map })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(Error::Input(format!("unknown config key `{key}`")));
        }
        Ok(())
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: Display,
{
    raw.parse::<T>()
        .map_err(|e| Error::Input(format!("invalid value for `{key}`: `{raw}` ({e})")))
}

fn resolve<T: FromStr + Display>(cli: Option<T>, cfg: &mut Cfg, key: &str, default: T) -> Result<T>
where
    T::Err: Display,
{
    if let Some(v) = cli {
        cfg.take(key);
        return Ok(v);
    }
    match cfg.take(key) {
        Some(raw) => parse_value(key, &raw),
        None => Ok(default),
    }
}

fn resolve_opt<T: FromStr>(cli: Option<T>, cfg: &mut Cfg, key: &str) -> Result<Option<T>>
where
    T::Err: Display,
{
    if cli.is_some() {
        cfg.take(key);
        return Ok(cli);
    }
    match cfg.take(key) {
        Some(raw) => Ok(Some(parse_value(key, &raw)?)),
        None => Ok(None),
    }
}

fn required_seed(cli: Option<u64>, cfg: &mut Cfg) -> Result<u64> {
    resolve_opt(cli, cfg, "seed")?
        .ok_or_else(|| Error::Input("--seed is required for this command".into()))
}

fn parse_f64_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| parse_value::<f64>(key, s.trim()))
        .collect()
}

fn parse_usize_list(key: &str, raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| parse_value::<usize>(key, s.trim()))
        .collect()
}

fn join_f64(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn join_usize(values: &[usize]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn parse_tie_mode(raw: &str) -> Result<TieMode> {
    match raw {
        "include" => Ok(TieMode::Include),
        "exclude" => Ok(TieMode::Exclude),
        other => Err(Error::Input(format!(
            "invalid tie-mode `{other}`; expected include or exclude"
        ))),
    }
}

fn parse_kernel(raw: &str) -> Result<EmbeddingMetric> {
    match raw {
        "neg-euclidean" => Ok(EmbeddingMetric::Euclidean),
        "dot" => Ok(EmbeddingMetric::NegDot),
        "cosine" => Ok(EmbeddingMetric::NegCosine),
        other => Err(Error::Input(format!(
            "invalid kernel `{other}`; expected neg-euclidean, dot, or cosine"
        ))),
    }
}

fn parse_decoder(raw: &str, calibration: usize) -> Result<DecoderKind> {
    match raw {
        "known-epsilon" => Ok(DecoderKind::KnownEpsilon),
        "calibrated" => Ok(DecoderKind::Calibrated { calibration_triplets: calibration }),
        "naive" => Ok(DecoderKind::Naive),
        other => Err(Error::Input(format!(
            "invalid decoder `{other}`; expected known-epsilon, calibrated, or naive"
        ))),
    }
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)
        .map_err(|e| Error::Input(format!("cannot create `{}`: {e}", out.display())))
}

fn stem_of(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

// ---------------------------------------------------------------------------
// align

#[derive(Serialize)]
struct AlignResults {
    pairs: Vec<PairResult>,
    average: AverageReport,
}

#[derive(Serialize)]
struct PairResult {
    agent_a: String,
    agent_b: String,
    report: AlignmentReport,
}

#[derive(Serialize)]
struct AverageReport {
    triplet: f64,
    pearson: f64,
    spearman: f64,
}

fn cmd_align(args: AlignArgs) -> Result<()> {
    let mut cfg = Cfg::load(args.config.as_deref())?;
    let files: Vec<String> = if !args.files.is_empty() {
        cfg.take("files");
        args.files
    } else {
        match cfg.take("files") {
            Some(raw) => raw.split(',').map(|s| s.trim().to_string()).collect(),
            None => Vec::new(),
        }
    };
    if files.len() < 2 {
        return Err(Error::Input("need at least two agent files".into()));
    }
    let similarity = resolve(args.similarity, &mut cfg, "similarity", false)?;
    let kernel_raw = resolve(args.kernel, &mut cfg, "kernel", "neg-euclidean".to_string())?;
    let kernel = parse_kernel(&kernel_raw)?;
    let tie_raw = resolve(args.tie_mode, &mut cfg, "tie-mode", "include".to_string())?;
    let tie_mode = parse_tie_mode(&tie_raw)?;
    let sampled = resolve_opt(args.sampled, &mut cfg, "sampled")?;
    let seed = resolve_opt(args.seed, &mut cfg, "seed")?;
    cfg.finish()?;
    if sampled.is_some() && seed.is_none() {
        return Err(Error::Input("--seed is required with --sampled".into()));
    }

    let mut config = BTreeMap::new();
    config.insert("files".into(), files.join(","));
    config.insert("similarity".into(), similarity.to_string());
    config.insert("kernel".into(), kernel_raw.clone());
    config.insert("tie-mode".into(), tie_raw.clone());
    if let Some(m) = sampled {
        config.insert("sampled".into(), m.to_string());
    }
    if let Some(s) = seed {
        config.insert("seed".into(), s.to_string());
    }

    let paths: Vec<&Path> = files.iter().map(Path::new).collect();
    let inputs = digest_inputs(&paths)?;

    // Load agents; the first file's id order is canonical.
    let mut agents: Vec<Agent> = Vec::with_capacity(files.len());
    let mut canonical_ids: Option<Vec<String>> = None;
    for file in &files {
        let path = Path::new(file);
        let agent = if similarity {
            let (stimuli, sim) = io::read_similarity_csv(path)?;
            let (stimuli, sim) = match &canonical_ids {
                Some(ids) => io::reorder_similarity(&stimuli, &sim, ids)?,
                None => {
                    canonical_ids = Some(stimuli.ids().to_vec());
                    (stimuli, sim)
                }
            };
            Agent::from_similarity(stimuli, sim)?
        } else {
            let emb = io::read_embedding_csv(path)?;
            let emb = match &canonical_ids {
                Some(ids) => io::reorder_embedding(&emb, ids)?,
                None => {
                    canonical_ids = Some(emb.stimuli().ids().to_vec());
                    emb
                }
            };
            Agent::from_embedding(emb, kernel)
        };
        agents.push(agent.with_label(stem_of(file)));
    }

    let mode = match (sampled, seed) {
        (Some(m), Some(s)) => ReportMode::Sampled { m, seed: s },
        _ => ReportMode::Exact,
    };
    let mut pairs = Vec::new();
    let mut rows = Vec::new();
    for a in 0..agents.len() {
        for b in (a + 1)..agents.len() {
            let report = alignment_report(&agents[a], &agents[b], mode, tie_mode)?;
            rows.push(AlignmentPairRow::new(agents[a].label(), agents[b].label(), &report));
            pairs.push(PairResult {
                agent_a: agents[a].label().to_string(),
                agent_b: agents[b].label().to_string(),
                report,
            });
        }
    }
    let count = pairs.len() as f64;
    let average = AverageReport {
        triplet: pairs.iter().map(|p| p.report.triplet_alignment).sum::<f64>() / count,
        pearson: pairs.iter().map(|p| p.report.pearson).sum::<f64>() / count,
        spearman: pairs.iter().map(|p| p.report.spearman).sum::<f64>() / count,
    };

    ensure_out_dir(&args.out)?;
    write_alignment_pairs_csv(&args.out.join("pairs.csv"), &rows)?;
    write_json(
        &args.out.join("summary.json"),
        &RunSummary {
            tool: ToolInfo::current(),
            command: "align".into(),
            seed,
            config,
            inputs,
            results: AlignResults { pairs, average },
        },
    )?;
    println!("wrote pairs.csv and summary.json to {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate-teaching

#[derive(Serialize)]
struct SimulateResults {
    points: Vec<UshapePoint>,
    outcome: Option<repalign::channel::UshapeOutcome>,
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = Cfg::load(args.config.as_deref())?;
    let epsilons_raw = resolve(
        args.epsilons,
        &mut cfg,
        "epsilons",
        "0.05,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95".to_string(),
    )?;
    let epsilons = parse_f64_list("epsilons", &epsilons_raw)?;
    let budget = resolve(args.budget, &mut cfg, "budget", 200)?;
    let trials = resolve(args.trials, &mut cfg, "trials", 100)?;
    let decoder_raw = resolve(args.decoder, &mut cfg, "decoder", "known-epsilon".to_string())?;
    let calibration = resolve(args.calibration, &mut cfg, "calibration", 200)?;
    let decoder = parse_decoder(&decoder_raw, calibration)?;
    let particles = resolve(args.particles, &mut cfg, "particles", 1000)?;
    let stimuli = resolve(args.stimuli, &mut cfg, "stimuli", 32)?;
    let dim = resolve(args.dim, &mut cfg, "dim", 2)?;
    let seed = required_seed(args.seed, &mut cfg)?;
    cfg.finish()?;

    let mut config = BTreeMap::new();
    config.insert("epsilons".into(), join_f64(&epsilons));
    config.insert("budget".into(), budget.to_string());
    config.insert("trials".into(), trials.to_string());
    config.insert("decoder".into(), decoder_raw.clone());
    config.insert("calibration".into(), calibration.to_string());
    config.insert("particles".into(), particles.to_string());
    config.insert("stimuli".into(), stimuli.to_string());
    config.insert("dim".into(), dim.to_string());
    config.insert("seed".into(), seed.to_string());

    let points = ushape_curve(
        &epsilons,
        &UshapeConfig { n: stimuli, dim, budget, trials, particles, decoder, seed },
    )?;
    let outcome = ushape_outcome(&points);

    ensure_out_dir(&args.out)?;
    write_ushape_csv(&args.out.join("ushape.csv"), &points)?;
    write_json(
        &args.out.join("summary.json"),
        &RunSummary {
            tool: ToolInfo::current(),
            command: "simulate-teaching".into(),
            seed: Some(seed),
            config,
            inputs: vec![],
            results: SimulateResults { points, outcome },
        },
    )?;
    println!("wrote ushape.csv and summary.json to {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// ushape-fsl

#[derive(Serialize)]
struct FslResults {
    rows: Vec<FslRow>,
    zsq_correlations: Vec<ShotCorrelation>,
}

#[derive(Serialize)]
struct ShotCorrelation {
    shot: usize,
    rho_zsq_triplet: f64,
    min_accuracy_agent: String,
    min_accuracy_alignment: f64,
}

fn cmd_ushape_fsl(args: FslArgs) -> Result<()> {
    let mut cfg = Cfg::load(args.config.as_deref())?;
    let scales_raw =
        resolve(args.noise_scales, &mut cfg, "noise-scales", "0,1,2,4,8,16,32,64".to_string())?;
    let noise_scales = parse_f64_list("noise-scales", &scales_raw)?;
    let shots_raw = resolve(args.shots, &mut cfg, "shots", "1,5".to_string())?;
    let shots = parse_usize_list("shots", &shots_raw)?;
    let trials = resolve(args.trials, &mut cfg, "trials", 20)?;
    let classes = resolve(args.classes, &mut cfg, "classes", 4)?;
    let per_class = resolve(args.per_class, &mut cfg, "per-class", 40)?;
    let dim = resolve(args.dim, &mut cfg, "dim", 4)?;
    let separation = resolve(args.separation, &mut cfg, "separation", 8.0)?;
    let include_inverted = resolve(args.include_inverted, &mut cfg, "include-inverted", true)?;
    let learning_rate = resolve(args.learning_rate, &mut cfg, "learning-rate", 0.1)?;
    let epochs = resolve(args.epochs, &mut cfg, "epochs", 500)?;
    let l2_penalty = resolve(args.l2_penalty, &mut cfg, "l2-penalty", 1e-4)?;
    let seed = required_seed(args.seed, &mut cfg)?;
    cfg.finish()?;

    let mut config = BTreeMap::new();
    config.insert("noise-scales".into(), join_f64(&noise_scales));
    config.insert("shots".into(), join_usize(&shots));
    config.insert("trials".into(), trials.to_string());
    config.insert("classes".into(), classes.to_string());
    config.insert("per-class".into(), per_class.to_string());
    config.insert("dim".into(), dim.to_string());
    config.insert("separation".into(), format!("{separation}"));
    config.insert("include-inverted".into(), include_inverted.to_string());
    config.insert("learning-rate".into(), format!("{learning_rate}"));
    config.insert("epochs".into(), epochs.to_string());
    config.insert("l2-penalty".into(), format!("{l2_penalty}"));
    config.insert("seed".into(), seed.to_string());

    let (reference, labels) = gen_clustered_embedding(&SynthSpec {
        per_class,
        classes,
        dim,
        separation,
        seed: derive_seed(seed, "fsl-reference", 0),
    })?;
    let rows = ushape_fsl_experiment(
        &reference,
        &labels,
        &FslConfig {
            noise_scales,
            include_inverted,
            shots: shots.clone(),
            trials,
            seed,
            probe: ProbeConfig { learning_rate, epochs, l2_penalty },
        },
    )?;

    // Per shot: correlation of accuracy with squared-z triplet alignment.
    let mut zsq_correlations = Vec::new();
    for &shot in &shots {
        let shot_rows: Vec<&FslRow> = rows.iter().filter(|r| r.shot == shot).collect();
        let alignments: Vec<f64> = shot_rows.iter().map(|r| r.triplet_alignment).collect();
        let accuracies: Vec<f64> = shot_rows.iter().map(|r| r.mean_accuracy).collect();
        let zsq = z_squared(&alignments)?;
        let rho = pearson(&zsq, &accuracies)?.rho;
        let min_row = shot_rows
            .iter()
            .min_by(|a, b| a.mean_accuracy.partial_cmp(&b.mean_accuracy).unwrap())
            .expect("nonempty family");
        zsq_correlations.push(ShotCorrelation {
            shot,
            rho_zsq_triplet: rho,
            min_accuracy_agent: min_row.agent_id.clone(),
            min_accuracy_alignment: min_row.triplet_alignment,
        });
    }

    ensure_out_dir(&args.out)?;
    write_fsl_csv(&args.out.join("fsl.csv"), &rows)?;
    write_json(
        &args.out.join("summary.json"),
        &RunSummary {
            tool: ToolInfo::current(),
            command: "ushape-fsl".into(),
            seed: Some(seed),
            config,
            inputs: vec![],
            results: FslResults { rows, zsq_correlations },
        },
    )?;
    println!("wrote fsl.csv and summary.json to {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// robustness

#[derive(Serialize)]
struct RobustnessResults {
    identity_update_sensitivity: f64,
    domain_shift: Vec<ShiftRow>,
    adversarial: Vec<AdversarialRow>,
    formula_strictly_increasing: bool,
}

fn cmd_robustness(args: RobustnessArgs) -> Result<()> {
    let mut cfg = Cfg::load(args.config.as_deref())?;
    let stimuli = resolve(args.stimuli, &mut cfg, "stimuli", 20)?;
    let dim = resolve(args.dim, &mut cfg, "dim", 3)?;
    let classes = resolve(args.classes, &mut cfg, "classes", 4)?;
    let magnitudes_raw = resolve(
        args.magnitudes,
        &mut cfg,
        "magnitudes",
        "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5".to_string(),
    )?;
    let magnitudes = parse_f64_list("magnitudes", &magnitudes_raw)?;
    let epsilons_raw =
        resolve(args.epsilons, &mut cfg, "epsilons", "0.05,0.1,0.2,0.3,0.4".to_string())?;
    let epsilons = parse_f64_list("epsilons", &epsilons_raw)?;
    let pool_size = resolve(args.pool_size, &mut cfg, "pool-size", 10)?;
    let trials = resolve(args.trials, &mut cfg, "trials", 50)?;
    let seed = required_seed(args.seed, &mut cfg)?;
    cfg.finish()?;

    let mut config = BTreeMap::new();
    config.insert("stimuli".into(), stimuli.to_string());
    config.insert("dim".into(), dim.to_string());
    config.insert("classes".into(), classes.to_string());
    config.insert("magnitudes".into(), join_f64(&magnitudes));
    config.insert("epsilons".into(), join_f64(&epsilons));
    config.insert("pool-size".into(), pool_size.to_string());
    config.insert("trials".into(), trials.to_string());
    config.insert("seed".into(), seed.to_string());

    let agent = gaussian_agent(stimuli, dim, derive_seed(seed, "robustness-agent", 0));
    let mut rng = derive_rng(seed, "robustness-centroids", 0);
    let centroids = CentroidSet::new(Array2::from_shape_fn((classes, dim), |_| {
        rng.sample::<f64, _>(StandardNormal)
    }))?;

    let identity = domain_shift_sensitivity(&agent, &centroids, &centroids)?;
    let shift_rows = shift_magnitude_sweep(&agent, &centroids, &magnitudes, trials, seed)?;
    let adversarial = adversarial_monotonicity_check(&epsilons, stimuli, pool_size, trials, seed)?;
    let formula_strictly_increasing = adversarial
        .windows(2)
        .all(|w| w[1].formula_expectation > w[0].formula_expectation);

    ensure_out_dir(&args.out)?;
    write_shift_csv(&args.out.join("domain_shift.csv"), &shift_rows)?;
    write_adversarial_csv(&args.out.join("adversarial.csv"), &adversarial)?;
    write_json(
        &args.out.join("summary.json"),
        &RunSummary {
            tool: ToolInfo::current(),
            command: "robustness".into(),
            seed: Some(seed),
            config,
            inputs: vec![],
            results: RobustnessResults {
                identity_update_sensitivity: identity,
                domain_shift: shift_rows,
                adversarial,
                formula_strictly_increasing,
            },
        },
    )?;
    println!(
        "wrote domain_shift.csv, adversarial.csv and summary.json to {}",
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// stats

#[derive(Serialize)]
struct StatsResults {
    pearson: CorrelationResult,
    spearman: CorrelationResult,
    partial: CorrelationResult,
}

fn read_columns(path: &Path, names: [&str; 3]) -> Result<[Vec<f64>; 3]> {
    let file = fs::File::open(path)
        .map_err(|e| Error::Input(format!("cannot open `{}`: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse { line: 1, msg: e.to_string() })?
        .clone();
    let mut indices = [0usize; 3];
    for (slot, name) in names.iter().enumerate() {
        indices[slot] = headers
            .iter()
            .position(|h| h.trim() == *name)
            .ok_or_else(|| {
                Error::Input(format!(
                    "column `{name}` not found; file has [{}]",
                    headers.iter().collect::<Vec<_>>().join(", ")
                ))
            })?;
    }
    let mut cols: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvParse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        for (slot, &idx) in indices.iter().enumerate() {
            let field = record.get(idx).unwrap_or("");
            cols[slot].push(field.trim().parse::<f64>().map_err(|_| Error::CsvParse {
                line,
                msg: format!("column `{}` is not a number: `{field}`", names[slot]),
            })?);
        }
    }
    Ok(cols)
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let mut cfg = Cfg::load(args.config.as_deref())?;
    let input = resolve_opt(args.input, &mut cfg, "input")?
        .ok_or_else(|| Error::Input("--input is required".into()))?;
    let x_col = resolve(args.x, &mut cfg, "x", "alignment".to_string())?;
    let y_col = resolve(args.y, &mut cfg, "y", "performance".to_string())?;
    let z_col = resolve(args.z, &mut cfg, "z", "covariate".to_string())?;
    cfg.finish()?;

    let mut config = BTreeMap::new();
    config.insert("input".into(), input.clone());
    config.insert("x".into(), x_col.clone());
    config.insert("y".into(), y_col.clone());
    config.insert("z".into(), z_col.clone());

    let path = PathBuf::from(&input);
    let inputs = digest_inputs(&[&path])?;
    let [x, y, z] = read_columns(&path, [&x_col, &y_col, &z_col])?;

    let results = StatsResults {
        pearson: pearson(&x, &y)?,
        spearman: spearman(&x, &y)?,
        partial: partial_correlation(&x, &y, &z)?,
    };

    ensure_out_dir(&args.out)?;
    let csv_path = args.out.join("correlations.csv");
    {
        let file = fs::File::create(&csv_path)?;
        let mut writer = csv::Writer::from_writer(file);
        writer
            .write_record(["method", "rho", "n", "ci_low", "ci_high", "p_value"])
            .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
        for (name, r) in [
            ("pearson", &results.pearson),
            ("spearman", &results.spearman),
            ("partial", &results.partial),
        ] {
            writer
                .write_record([
                    name.to_string(),
                    format!("{}", r.rho),
                    format!("{}", r.n),
                    format!("{}", r.ci_low),
                    format!("{}", r.ci_high),
                    format!("{}", r.p_value),
                ])
                .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
        }
        writer.flush()?;
    }
    write_json(
        &args.out.join("summary.json"),
        &RunSummary {
            tool: ToolInfo::current(),
            command: "stats".into(),
            seed: None,
            config,
            inputs,
            results,
        },
    )?;
    println!("wrote correlations.csv and summary.json to {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// gen

#[derive(Serialize)]
struct GenResults {
    stimuli: usize,
    dim: usize,
    classes: usize,
    files: Vec<String>,
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let mut cfg = Cfg::load(args.config.as_deref())?;
    let classes = resolve(args.classes, &mut cfg, "classes", 4)?;
    let per_class = resolve(args.per_class, &mut cfg, "per-class", 40)?;
    let dim = resolve(args.dim, &mut cfg, "dim", 4)?;
    let separation = resolve(args.separation, &mut cfg, "separation", 8.0)?;
    let seed = required_seed(args.seed, &mut cfg)?;
    cfg.finish()?;

    let mut config = BTreeMap::new();
    config.insert("classes".into(), classes.to_string());
    config.insert("per-class".into(), per_class.to_string());
    config.insert("dim".into(), dim.to_string());
    config.insert("separation".into(), format!("{separation}"));
    config.insert("seed".into(), seed.to_string());

    let (embedding, labels) =
        gen_clustered_embedding(&SynthSpec { per_class, classes, dim, separation, seed })?;

    ensure_out_dir(&args.out)?;
    io::write_embedding_csv(&args.out.join("embedding.csv"), &embedding)?;
    io::write_labels_csv(&args.out.join("labels.csv"), embedding.stimuli(), &labels)?;
    write_json(
        &args.out.join("summary.json"),
        &RunSummary {
            tool: ToolInfo::current(),
            command: "gen".into(),
            seed: Some(seed),
            config,
            inputs: vec![],
            results: GenResults {
                stimuli: embedding.n(),
                dim,
                classes,
                files: vec!["embedding.csv".into(), "labels.csv".into()],
            },
        },
    )?;
    println!("wrote embedding.csv, labels.csv and summary.json to {}", args.out.display());
    Ok(())
}
