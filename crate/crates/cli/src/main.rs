//! `omes` command-line frontend.
//!
//! Exit codes: 0 success, 1 invalid input or arguments, 2 computation error.
//! Results go to stdout (JSON unless `--format csv`) or to `--out`;
//! diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use omes::baselines::{evaluate_baselines, BaselineConfig};
use omes::harness::{
    evaluate_model, rank_correlation, read_battery_config, read_score_table, run_battery, write_score_table,
    ClassifierConfig, ClassifierKind, EvalConfig,
};
use omes::ingest::{self, ReadOptions, ReportFormat, SkippedRow};
use omes::synth::{self, EncoderKind, EncoderSpec};
use omes::{DciSource, Error, OmesConfig, Pooling, Result, Validate};

#[derive(Parser)]
#[command(name = "omes", version, about = "Disentanglement evaluation: OMES, MIG, Modularity, DCI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a pairs file with OMES (plus baselines if --labeled is given).
    Eval(EvalArgs),
    /// MIG, Modularity and DCI of a labeled file.
    Baselines(BaselinesArgs),
    /// Write spec.json, pairs.csv and labeled.csv for a synthetic encoder.
    Simulate(SimulateArgs),
    /// Build single-factor pairs from a labeled file.
    Pair(PairArgs),
    /// Evaluate a collection of synthetic models and correlate the metrics.
    Battery(BatteryArgs),
    /// Spearman correlations between the columns of a score table.
    Rankcorr(RankcorrArgs),
    /// Check any interchange file against its schema.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct InputFlags {
    /// Drop malformed data rows with a warning instead of failing.
    #[arg(long)]
    skip_bad_rows: bool,
}

impl InputFlags {
    fn options(&self) -> ReadOptions {
        ReadOptions { skip_bad_rows: self.skip_bad_rows }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value = "max")]
    pooling: Pooling,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 3)]
    min_pairs: usize,
    /// Labeled file for baselines (and accuracies with --classifier).
    #[arg(long)]
    labeled: Option<PathBuf>,
    #[arg(long, default_value_t = omes::baselines::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value = "l1")]
    dci_source: DciSource,
    /// Train per-factor classifiers on full and pruned representations.
    #[arg(long, value_parser = parse_classifier)]
    classifier: Option<ClassifierKind>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: ReportFormat,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct BaselinesArgs {
    #[arg(long)]
    labeled: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = omes::baselines::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value = "l1")]
    dci_source: DciSource,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct SimulateArgs {
    /// Factor layout: shapes3d or dsprites.
    #[arg(long, default_value = "shapes3d")]
    profile: String,
    #[arg(long, default_value = "ideal")]
    encoder: EncoderKind,
    /// Number of pairs.
    #[arg(long)]
    n: usize,
    /// Number of labeled rows (defaults to --n).
    #[arg(long)]
    n_labeled: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    extra_dims: usize,
    /// Encoder seed (mixing matrix, noise); defaults to --seed.
    #[arg(long)]
    encoder_seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    labeled: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct BatteryArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Score table CSV; defaults to <out>.scores.csv.
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args)]
struct RankcorrArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    any: PathBuf,
    /// Factor spec to check CSV files against.
    #[arg(long)]
    spec: Option<PathBuf>,
}

fn parse_classifier(s: &str) -> std::result::Result<ClassifierKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "logistic" => Ok(ClassifierKind::Logistic),
        "mlp" => Ok(ClassifierKind::Mlp),
        other => Err(format!("unknown classifier {other:?} (expected logistic or mlp)")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Eval(a) => eval(a),
        Command::Baselines(a) => baselines(a),
        Command::Simulate(a) => simulate(a),
        Command::Pair(a) => pair(a),
        Command::Battery(a) => battery(a),
        Command::Rankcorr(a) => rankcorr(a),
        Command::Validate(a) => validate(a),
    }
}

fn warn_skipped(path: &Path, skipped: &[SkippedRow]) {
    if skipped.is_empty() {
        return;
    }
    eprintln!("warning: skipped {} bad rows in {}", skipped.len(), path.display());
    for s in skipped {
        eprintln!("  line {}: {}", s.line, s.reason);
    }
}

/// Write to `out`, or print to stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => ingest::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn eval(a: EvalArgs) -> Result<()> {
    let config = OmesConfig {
        alpha: a.alpha,
        pooling: a.pooling,
        active_threshold: a.threshold,
        min_pairs_per_factor: a.min_pairs,
    };
    config.validate()?;
    let spec = ingest::read_factor_spec(&a.spec)?;
    let pairs = ingest::read_pairs_with(&a.pairs, &spec, a.input.options())?;
    warn_skipped(&a.pairs, &pairs.skipped);
    let labeled = match &a.labeled {
        Some(path) => {
            let l = ingest::read_labeled_with(path, &spec, a.input.options())?;
            warn_skipped(path, &l.skipped);
            Some(l.value)
        }
        None => None,
    };
    let eval = EvalConfig {
        omes: config,
        baselines: BaselineConfig {
            bins: a.bins,
            dci_source: a.dci_source,
            active_threshold: a.threshold,
            ..Default::default()
        },
        classifier: a.classifier.map(|kind| ClassifierConfig { kind, ..Default::default() }),
    };
    let mut report = if labeled.is_some() {
        evaluate_model(&pairs.value, labeled.as_ref(), &eval)?
    } else {
        omes::evaluate_pairs(&pairs.value, &config)?
    };
    if !pairs.skipped.is_empty() {
        report.warnings.push(format!("{} bad rows skipped in pairs file", pairs.skipped.len()));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(a.out.as_deref(), &ingest::render_report(&report, a.format))
}

fn baselines(a: BaselinesArgs) -> Result<()> {
    let spec = ingest::read_factor_spec(&a.spec)?;
    let labeled = ingest::read_labeled_with(&a.labeled, &spec, a.input.options())?;
    warn_skipped(&a.labeled, &labeled.skipped);
    let config = BaselineConfig { bins: a.bins, dci_source: a.dci_source, ..Default::default() };
    let scores = evaluate_baselines(&labeled.value, &config);
    for e in &scores.errors {
        eprintln!("warning: {e}");
    }
    if scores.mig.is_none() && scores.modularity.is_none() && scores.dci.is_none() {
        return Err(Error::Shape(format!("every baseline failed: {}", scores.errors.join("; "))));
    }
    emit(a.out.as_deref(), &ingest::to_json_string(&scores))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let spec = synth::profile(&a.profile)?;
    let encoder = EncoderSpec::new(a.encoder, a.encoder_seed.unwrap_or(a.seed))
        .with_noise(a.noise_sigma)
        .with_extra_dims(a.extra_dims);
    let (pairs, labeled) = synth::simulate(&spec, &encoder, a.n, a.n_labeled.unwrap_or(a.n), a.seed)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| Error::Io { path: a.out_dir.clone(), source })?;
    let spec_path = a.out_dir.join("spec.json");
    let pairs_path = a.out_dir.join("pairs.csv");
    let labeled_path = a.out_dir.join("labeled.csv");
    ingest::write_factor_spec(&spec_path, pairs.spec())?;
    ingest::write_pairs(&pairs_path, &pairs)?;
    ingest::write_labeled(&labeled_path, &labeled)?;
    let summary = serde_json::json!({
        "spec": spec_path,
        "pairs": pairs_path,
        "labeled": labeled_path,
        "n_pairs": pairs.len(),
        "n_labeled": labeled.len(),
        "latent_dim": pairs.dim(),
        "encoder": encoder,
    });
    emit(None, &ingest::to_json_string(&summary))
}

fn pair(a: PairArgs) -> Result<()> {
    let spec = ingest::read_factor_spec(&a.spec)?;
    let labeled = ingest::read_labeled_with(&a.labeled, &spec, a.input.options())?;
    warn_skipped(&a.labeled, &labeled.skipped);
    let pairs = omes::pairing::pair_labeled(&labeled.value)?;
    ingest::write_pairs(&a.out, &pairs)?;
    let summary = serde_json::json!({
        "pairs": a.out,
        "n_pairs": pairs.len(),
        "pairs_per_factor": pairs.pairs_per_factor(),
    });
    emit(None, &ingest::to_json_string(&summary))
}

fn battery(a: BatteryArgs) -> Result<()> {
    let config = read_battery_config(&a.config)?;
    let result = run_battery(&config)?;
    for row in &result.rows {
        if let Some(e) = &row.error {
            eprintln!("warning: model {}: {e}", row.model_id);
        }
    }
    if let Some(e) = &result.rankcorr_error {
        eprintln!("warning: rank correlation not computed: {e}");
    }
    let scores_path = a.scores.unwrap_or_else(|| {
        let mut name = a.out.file_stem().unwrap_or_default().to_os_string();
        name.push(".scores.csv");
        a.out.with_file_name(name)
    });
    ingest::write_atomic(&a.out, ingest::to_json_string(&result).as_bytes())?;
    write_score_table(&scores_path, &result.score_table())
}

fn rankcorr(a: RankcorrArgs) -> Result<()> {
    let table = read_score_table(&a.scores)?;
    let rc = rank_correlation(&table)?;
    for (x, y) in &rc.zero_variance {
        eprintln!("warning: ZERO_VARIANCE for {} vs {}", x.as_str(), y.as_str());
    }
    emit(a.out.as_deref(), &ingest::to_json_string(&rc))
}

fn validate(a: ValidateArgs) -> Result<()> {
    let spec = a.spec.as_deref().map(ingest::read_factor_spec).transpose()?;
    let summary = ingest::validate_file(&a.any, spec.as_ref())?;
    let out = serde_json::json!({
        "ok": true,
        "kind": summary.kind.as_str(),
        "rows": summary.rows,
        "latent_dim": summary.latent_dim,
        "factors": summary.factors,
    });
    emit(None, &ingest::to_json_string(&out))
}
