//! Explicitness evaluation, metric batteries over model collections and
//! Spearman agreement between metrics.

use std::path::Path;

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{evaluate_baselines, BaselineConfig};
use crate::classifier::{accuracy, fit_mlp, fit_softmax, MlpOptions, Standardizer};
use crate::error::{Error, Result};
use crate::ingest::{format_g17, write_atomic};
use crate::metric::evaluate_pairs;
use crate::rng::{fnv1a64, mix64, Stream};
use crate::stats;
use crate::synth::{make_labeled, make_pairs, profile, EncoderKind, EncoderSpec};
use crate::types::{
    AccuracySummary, DciSource, Factor, FactorSpec, LabeledRepresentationSet, MetricReport, OmesConfig, Validate,
    ValidationIssue,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Logistic,
    Mlp,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Mlp => "mlp",
        }
    }
}

/// Downstream factor classifier. `epochs` and `learning_rate` default per kind
/// when left unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub hidden: Vec<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: usize,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::Logistic,
            hidden: vec![256, 256],
            epochs: None,
            learning_rate: None,
            batch_size: 128,
            seed: 0,
            train_size: 10_000,
            test_size: 5_000,
        }
    }
}

impl ClassifierConfig {
    pub fn epochs(&self) -> usize {
        self.epochs.unwrap_or(match self.kind {
            ClassifierKind::Logistic => 400,
            ClassifierKind::Mlp => 20,
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(match self.kind {
            ClassifierKind::Logistic => 0.3,
            ClassifierKind::Mlp => 1e-3,
        })
    }

    /// Human-readable name recorded in reports.
    pub fn describe(&self) -> String {
        match self.kind {
            ClassifierKind::Logistic => format!("logistic(epochs={}, lr={})", self.epochs(), self.learning_rate()),
            ClassifierKind::Mlp => format!(
                "mlp(hidden={:?}, epochs={}, lr={}, batch={})",
                self.hidden,
                self.epochs(),
                self.learning_rate(),
                self.batch_size
            ),
        }
    }
}

impl Validate for ClassifierConfig {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        if self.train_size == 0 {
            out.push(ValidationIssue::new("train_size", "must be positive"));
        }
        if self.test_size == 0 {
            out.push(ValidationIssue::new("test_size", "must be positive"));
        }
        if self.epochs() == 0 {
            out.push(ValidationIssue::new("epochs", "must be positive"));
        }
        if !(self.learning_rate() > 0.0 && self.learning_rate().is_finite()) {
            out.push(ValidationIssue::new("learning_rate", "must be > 0"));
        }
        if self.kind == ClassifierKind::Mlp && (self.hidden.is_empty() || self.hidden.contains(&0)) {
            out.push(ValidationIssue::new("hidden", "layer widths must be positive"));
        }
        out
    }
}

/// Train a classifier for factor `j` on `dims` of the training split and
/// return its top-1 accuracy on the test split.
pub fn train_eval_classifier(
    train: &LabeledRepresentationSet,
    test: &LabeledRepresentationSet,
    j: usize,
    dims: &[usize],
    config: &ClassifierConfig,
) -> Result<f64> {
    config.validate()?;
    if train.spec() != test.spec() {
        return Err(Error::Shape("train and test splits use different factor specs".into()));
    }
    let n = train.spec().n();
    if j >= n {
        return Err(Error::Index { index: j, len: n });
    }
    let d = train.reps().dim();
    if dims.is_empty() {
        return Err(Error::Shape("empty dimension subset".into()));
    }
    if let Some(&h) = dims.iter().find(|&&h| h >= d) {
        return Err(Error::Index { index: h, len: d });
    }
    let y_train: Vec<usize> = train.labels().column(j).to_vec();
    if y_train.iter().all(|&v| v == y_train[0]) {
        return Err(Error::SingleClass(j));
    }
    let y_test: Vec<usize> = test.labels().column(j).to_vec();
    let x_train = train.reps().view().select(Axis(1), dims);
    let x_test = test.reps().view().select(Axis(1), dims);
    let scaler = Standardizer::fit(x_train.view());
    let (x_train, x_test) = (scaler.transform(x_train.view()), scaler.transform(x_test.view()));
    let classes = train.spec().cardinality(j);
    let pred = match config.kind {
        ClassifierKind::Logistic => {
            fit_softmax(x_train.view(), &y_train, classes, config.epochs(), config.learning_rate())
                .predict(x_test.view())
        }
        ClassifierKind::Mlp => {
            let opts = MlpOptions {
                hidden: config.hidden.clone(),
                epochs: config.epochs(),
                learning_rate: config.learning_rate(),
                batch_size: config.batch_size,
                seed: config.seed,
            };
            fit_mlp(x_train.view(), &y_train, classes, &opts).predict(x_test.view())
        }
    };
    Ok(accuracy(&pred, &y_test))
}

/// Split sizes actually used for a labeled set of `len` rows: the configured
/// sizes if they fit, otherwise the same proportions of `len`.
pub fn split_sizes(len: usize, config: &ClassifierConfig) -> (usize, usize) {
    let want = config.train_size + config.test_size;
    if len >= want {
        (config.train_size, config.test_size)
    } else {
        let train = (len * config.train_size / want).max(1).min(len.saturating_sub(1));
        (train, len - train)
    }
}

/// Everything needed to score one model.
#[derive(Debug, Clone, Default)]
pub struct EvalConfig {
    pub omes: OmesConfig,
    pub baselines: BaselineConfig,
    /// `None` skips the downstream accuracies.
    pub classifier: Option<ClassifierConfig>,
}

/// OMES from the pairs, plus baselines and full/pruned accuracies when a
/// labeled set is available.
pub fn evaluate_model(
    pairs: &crate::types::PairedRepresentationSet,
    labeled: Option<&LabeledRepresentationSet>,
    config: &EvalConfig,
) -> Result<MetricReport> {
    let mut report = evaluate_pairs(pairs, &config.omes)?;
    let Some(labeled) = labeled else {
        report.warnings.push("no labeled set: baselines and accuracies absent".to_string());
        return Ok(report);
    };
    if labeled.spec().names() != pairs.spec().names() || labeled.spec().cardinalities() != pairs.spec().cardinalities()
    {
        return Err(Error::Shape("pairs and labeled set use different factor specs".into()));
    }
    if labeled.reps().dim() != pairs.dim() {
        return Err(Error::DimMismatch(format!(
            "pairs have d = {}, labeled set has d = {}",
            pairs.dim(),
            labeled.reps().dim()
        )));
    }
    let baselines = evaluate_baselines(labeled, &config.baselines);
    for e in &baselines.errors {
        report.warnings.push(format!("baseline {e}"));
    }
    report.baselines = Some(baselines);

    if let Some(cc) = &config.classifier {
        let (n_train, n_test) = split_sizes(labeled.len(), cc);
        if n_train + n_test < cc.train_size + cc.test_size {
            report.warnings.push(format!(
                "labeled set has {} rows; classifier split reduced to {n_train}/{n_test}",
                labeled.len()
            ));
        }
        let train = labeled.slice_rows(0, n_train)?;
        let test = labeled.slice_rows(n_train, n_train + n_test)?;
        let active = report
            .association
            .as_ref()
            .map(|a| a.active_dims.clone())
            .expect("evaluate_pairs fills the association summary");
        let pruning = report.pruning.clone().expect("evaluate_pairs fills the pruning");
        let n = labeled.spec().n();
        let mut full = Vec::with_capacity(n);
        let mut pruned = Vec::with_capacity(n);
        for j in 0..n {
            let cfg = ClassifierConfig { seed: mix64(cc.seed ^ mix64(j as u64)), ..cc.clone() };
            full.push(train_eval_classifier(&train, &test, j, &active, &cfg)?);
            pruned.push(train_eval_classifier(&train, &test, j, &[pruning[j]], &cfg)?);
        }
        report.accuracies = Some(AccuracySummary { classifier: cc.describe(), full, pruned });
    }
    Ok(report)
}

/// Spearman rank correlation: Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Shape(format!("spearman needs equal lengths >= 2, got {} and {}", x.len(), y.len())));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::Shape(format!("non-finite value {v}")));
    }
    let (rx, ry) = (stats::mid_ranks(x), stats::mid_ranks(y));
    let constant = |r: &[f64]| r.iter().all(|&v| v == r[0]);
    if constant(&rx) || constant(&ry) {
        return Err(Error::ZeroVariance(if constant(&rx) { "first argument" } else { "second argument" }.to_string()));
    }
    Ok(stats::pearson(rx.iter().copied(), ry.iter().copied()).expect("non-constant ranks"))
}

// ---------------------------------------------------------------------------
// Batteries

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Omes,
    Mig,
    Modularity,
    Dci,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [MetricName::Omes, MetricName::Mig, MetricName::Modularity, MetricName::Dci];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Omes => "omes",
            MetricName::Mig => "mig",
            MetricName::Modularity => "modularity",
            MetricName::Dci => "dci",
        }
    }

    fn needs_labels(self) -> bool {
        self != MetricName::Omes
    }

    fn pick(self, report: &MetricReport) -> Option<f64> {
        match self {
            MetricName::Omes => Some(report.omes),
            MetricName::Mig => report.baselines.as_ref().and_then(|b| b.mig),
            MetricName::Modularity => report.baselines.as_ref().and_then(|b| b.modularity),
            MetricName::Dci => report.baselines.as_ref().and_then(|b| b.dci),
        }
    }
}

impl std::str::FromStr for MetricName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// One synthetic model of a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub encoder: EncoderSpec,
    pub n_pairs: usize,
    #[serde(default)]
    pub n_labeled: usize,
    /// Data seed; pairs and labeled rows use independent substreams of it.
    pub seed: u64,
}

/// Evenly spaced noise levels over a list of encoder kinds, expanded into
/// `count` models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub count: usize,
    pub kinds: Vec<EncoderKind>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub n_pairs: usize,
    #[serde(default)]
    pub n_labeled: usize,
}

/// Battery configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    /// Named factor layout (`shapes3d`, `dsprites`) ...
    #[serde(default)]
    pub profile: Option<String>,
    /// ... or an explicit one.
    #[serde(default)]
    pub factors: Option<Vec<Factor>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_metrics")]
    pub metrics: Vec<MetricName>,
    #[serde(default)]
    pub omes: OmesConfig,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub dci_source: DciSource,
    #[serde(default)]
    pub classifier: Option<ClassifierConfig>,
    /// Abort on the first failing model instead of recording the error.
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn all_metrics() -> Vec<MetricName> {
    MetricName::ALL.to_vec()
}

fn default_bins() -> usize {
    crate::baselines::DEFAULT_BINS
}

impl BatteryConfig {
    pub fn new(spec: &FactorSpec, models: Vec<ModelSpec>) -> Self {
        Self {
            profile: None,
            factors: Some(spec.factors().to_vec()),
            seed: 0,
            metrics: all_metrics(),
            omes: OmesConfig::default(),
            bins: default_bins(),
            dci_source: DciSource::default(),
            classifier: None,
            strict: false,
            models,
            sweep: None,
        }
    }

    pub fn factor_spec(&self) -> Result<FactorSpec> {
        match (&self.profile, &self.factors) {
            (Some(p), None) => profile(p),
            (None, Some(f)) => FactorSpec::new(f.clone()),
            _ => {
                Err(Error::Invalid(vec![ValidationIssue::new("profile", "exactly one of profile / factors required")]))
            }
        }
    }

    /// Explicit models followed by the expanded sweep.
    pub fn all_models(&self) -> Vec<ModelSpec> {
        let mut out = self.models.clone();
        if let Some(sw) = &self.sweep {
            let base = Stream::new(self.seed, "sweep");
            for i in 0..sw.count {
                let t = if sw.count > 1 { i as f64 / (sw.count - 1) as f64 } else { 0.0 };
                let sigma = sw.sigma_min + (sw.sigma_max - sw.sigma_min) * t;
                let kind = sw.kinds[i % sw.kinds.len()];
                let mut s = base.derive_index(i as u64);
                out.push(ModelSpec {
                    model_id: format!("sweep-{i:03}"),
                    encoder: EncoderSpec::new(kind, s.next_u64()).with_noise(sigma),
                    n_pairs: sw.n_pairs,
                    n_labeled: sw.n_labeled,
                    seed: s.next_u64(),
                });
            }
        }
        out
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            omes: self.omes,
            baselines: BaselineConfig { bins: self.bins, dci_source: self.dci_source, ..Default::default() },
            classifier: self.classifier.clone(),
        }
    }
}

impl Validate for BatteryConfig {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out: Vec<ValidationIssue> = self.omes.issues();
        if let Err(e) = self.factor_spec() {
            out.push(ValidationIssue::new("factors", e.to_string()));
        }
        if self.metrics.is_empty() {
            out.push(ValidationIssue::new("metrics", "at least one metric required"));
        }
        if self.bins < 2 {
            out.push(ValidationIssue::new("bins", "bins must be >= 2"));
        }
        if let Some(c) = &self.classifier {
            out.extend(
                c.issues().into_iter().map(|i| ValidationIssue::new(format!("classifier.{}", i.path), i.message)),
            );
        }
        if let Some(sw) = &self.sweep {
            if sw.kinds.is_empty() {
                out.push(ValidationIssue::new("sweep.kinds", "at least one encoder kind required"));
            }
            if !(sw.sigma_min >= 0.0 && sw.sigma_max >= sw.sigma_min) {
                out.push(ValidationIssue::new("sweep", "need 0 <= sigma_min <= sigma_max"));
            }
        }
        let models = self.all_models();
        if models.is_empty() {
            out.push(ValidationIssue::new("models", "battery has no models"));
        }
        let mut ids = std::collections::HashSet::new();
        for (i, m) in models.iter().enumerate() {
            if !ids.insert(m.model_id.as_str()) {
                out.push(ValidationIssue::new(format!("models[{i}].model_id"), "duplicate model_id"));
            }
            if m.n_pairs == 0 {
                out.push(ValidationIssue::new(format!("models[{i}].n_pairs"), "must be positive"));
            }
            if m.n_labeled == 0 && self.metrics.iter().any(|x| x.needs_labels()) {
                out.push(ValidationIssue::new(format!("models[{i}].n_labeled"), "baseline metrics need a labeled set"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub model_id: String,
    /// Aligned with [`BatteryResult::metrics`]; `None` where the metric failed.
    pub scores: Vec<Option<f64>>,
    #[serde(default)]
    pub accuracies: Option<AccuracySummary>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Metric-by-metric Spearman matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub metrics: Vec<MetricName>,
    /// `None` off the diagonal where a rank vector was constant.
    pub matrix: Vec<Vec<Option<f64>>>,
    /// Metric pairs left undefined by ZERO_VARIANCE.
    pub zero_variance: Vec<(MetricName, MetricName)>,
    /// Models scored on both metrics of a pair, per pair.
    pub models_used: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryResult {
    pub metrics: Vec<MetricName>,
    pub rows: Vec<BatteryRow>,
    pub rankcorr: Option<RankCorrelation>,
    #[serde(default)]
    pub rankcorr_error: Option<String>,
}

/// Table of per-model metric scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub metrics: Vec<MetricName>,
    pub model_ids: Vec<String>,
    pub scores: Vec<Vec<Option<f64>>>,
}

impl ScoreTable {
    pub fn column(&self, c: usize) -> Vec<Option<f64>> {
        self.scores.iter().map(|r| r[c]).collect()
    }
}

/// Pairwise Spearman between the columns of `table`, each pair over the
/// models that have both scores.
pub fn rank_correlation(table: &ScoreTable) -> Result<RankCorrelation> {
    if table.model_ids.len() < 3 {
        return Err(Error::TooFewModels(table.model_ids.len()));
    }
    let k = table.metrics.len();
    let mut matrix = vec![vec![None; k]; k];
    let mut used = vec![vec![0usize; k]; k];
    let mut zero_variance = Vec::new();
    for a in 0..k {
        for b in a..k {
            let (xs, ys): (Vec<f64>, Vec<f64>) = table.scores.iter().filter_map(|r| Some((r[a]?, r[b]?))).unzip();
            used[a][b] = xs.len();
            used[b][a] = xs.len();
            if a == b {
                matrix[a][a] = Some(1.0);
                continue;
            }
            if xs.len() < 3 {
                continue;
            }
            match spearman(&xs, &ys) {
                Ok(r) => {
                    matrix[a][b] = Some(r);
                    matrix[b][a] = Some(r);
                }
                Err(Error::ZeroVariance(_)) => zero_variance.push((table.metrics[a], table.metrics[b])),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(RankCorrelation { metrics: table.metrics.clone(), matrix, zero_variance, models_used: used })
}

fn derive_seed(battery_seed: u64, model_id: &str) -> u64 {
    mix64(battery_seed ^ mix64(fnv1a64(model_id.as_bytes())))
}

fn evaluate_one(model: &ModelSpec, spec: &FactorSpec, config: &BatteryConfig) -> Result<MetricReport> {
    let data = Stream::new(model.seed, "model-data");
    let (pair_seed, label_seed) = (data.derive("pairs").next_u64(), data.derive("labeled").next_u64());
    let pairs = make_pairs(spec, &model.encoder, model.n_pairs, pair_seed, None)?;
    let needs_labels = config.metrics.iter().any(|m| m.needs_labels()) || config.classifier.is_some();
    let labeled = if needs_labels && model.n_labeled > 0 {
        Some(make_labeled(spec, &model.encoder, model.n_labeled, label_seed)?)
    } else {
        None
    };
    let mut eval = config.eval_config();
    if let Some(c) = &mut eval.classifier {
        // Per-factor seeds are mixed in by evaluate_model.
        c.seed = derive_seed(config.seed, &model.model_id);
    }
    evaluate_model(&pairs, labeled.as_ref(), &eval)
}

/// Evaluate every model (in parallel), keep rows in input order, then rank
/// the models under each metric and correlate.
pub fn run_battery(config: &BatteryConfig) -> Result<BatteryResult> {
    config.validate()?;
    let spec = config.factor_spec()?;
    let models = config.all_models();
    let outcomes: Vec<Result<MetricReport>> = models.par_iter().map(|m| evaluate_one(m, &spec, config)).collect();
    let mut rows = Vec::with_capacity(models.len());
    for (model, outcome) in models.iter().zip(outcomes) {
        match outcome {
            Ok(report) => rows.push(BatteryRow {
                model_id: model.model_id.clone(),
                scores: config.metrics.iter().map(|m| m.pick(&report)).collect(),
                accuracies: report.accuracies,
                error: None,
            }),
            Err(e) if config.strict => return Err(e),
            Err(e) => rows.push(BatteryRow {
                model_id: model.model_id.clone(),
                scores: vec![None; config.metrics.len()],
                accuracies: None,
                error: Some(format!("{}: {e}", e.code())),
            }),
        }
    }
    let table = ScoreTable {
        metrics: config.metrics.clone(),
        model_ids: rows.iter().map(|r| r.model_id.clone()).collect(),
        scores: rows.iter().map(|r| r.scores.clone()).collect(),
    };
    let (rankcorr, rankcorr_error) = match rank_correlation(&table) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(format!("{}: {e}", e.code()))),
    };
    Ok(BatteryResult { metrics: config.metrics.clone(), rows, rankcorr, rankcorr_error })
}

impl BatteryResult {
    pub fn score_table(&self) -> ScoreTable {
        ScoreTable {
            metrics: self.metrics.clone(),
            model_ids: self.rows.iter().map(|r| r.model_id.clone()).collect(),
            scores: self.rows.iter().map(|r| r.scores.clone()).collect(),
        }
    }
}

/// `model_id,<metric>...`; failed scores are empty cells.
pub fn score_table_to_csv(table: &ScoreTable) -> String {
    let mut out = String::from("model_id");
    for m in &table.metrics {
        out.push(',');
        out.push_str(m.as_str());
    }
    out.push('\n');
    for (id, row) in table.model_ids.iter().zip(&table.scores) {
        out.push_str(id);
        for v in row {
            out.push(',');
            if let Some(v) = v {
                out.push_str(&format_g17(*v));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_score_table(path: &Path, table: &ScoreTable) -> Result<()> {
    write_atomic(path, score_table_to_csv(table).as_bytes())
}

pub fn parse_score_table(text: &str) -> Result<ScoreTable> {
    let bad = |line: usize, message: String| Error::Malformed { path: None, line: Some(line), message };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if header.get(0).map(str::trim) != Some("model_id") || header.len() < 2 {
        return Err(bad(1, "header must be model_id followed by metric names".into()));
    }
    let metrics = header
        .iter()
        .skip(1)
        .map(|h| h.trim().parse::<MetricName>().map_err(|e| bad(1, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut model_ids = Vec::new();
    let mut scores = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        model_ids.push(record[0].to_string());
        let row = record
            .iter()
            .skip(1)
            .map(|f| {
                let f = f.trim();
                if f.is_empty() {
                    return Ok(None);
                }
                match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    _ => Err(bad(line, format!("{f:?} is not a finite number"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        scores.push(row);
    }
    Ok(ScoreTable { metrics, model_ids, scores })
}

pub fn read_score_table(path: &Path) -> Result<ScoreTable> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_score_table(&text).map_err(|e| e.at_path(path))
}

pub fn parse_battery_config(text: &str) -> Result<BatteryConfig> {
    serde_json::from_str(text).map_err(|e| Error::Malformed {
        path: None,
        line: Some(e.line()),
        message: e.to_string(),
    })
}

pub fn read_battery_config(path: &Path) -> Result<BatteryConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_battery_config(&text).map_err(|e| e.at_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::make_labeled;

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]).unwrap_err().code(), "ZERO_VARIANCE");
        assert_eq!(spearman(&[1.0], &[1.0]).unwrap_err().code(), "SHAPE");
    }

    #[test]
    fn spearman_ignores_monotone_transforms() {
        let x = [0.3, -1.0, 2.5, 0.1, 7.0];
        let y = [1.0, 2.0, 0.5, 4.0, 3.0];
        let ex: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        let cy: Vec<f64> = y.iter().map(|v| v * v * v).collect();
        assert_eq!(spearman(&x, &y).unwrap(), spearman(&ex, &cy).unwrap());
    }

    fn small_spec() -> FactorSpec {
        FactorSpec::from_pairs(&[("a", 4), ("b", 5)]).unwrap()
    }

    #[test]
    fn ideal_code_is_classified_exactly() {
        let l = make_labeled(&small_spec(), &EncoderSpec::ideal(0), 1500, 1).unwrap();
        let (train, test) = (l.slice_rows(0, 1000).unwrap(), l.slice_rows(1000, 1500).unwrap());
        let cfg = ClassifierConfig::default();
        for j in 0..2 {
            assert!(train_eval_classifier(&train, &test, j, &[0, 1], &cfg).unwrap() >= 0.99);
            assert!(train_eval_classifier(&train, &test, j, &[j], &cfg).unwrap() >= 0.99);
        }
    }

    #[test]
    fn shuffled_labels_give_chance_accuracy() {
        let spec = small_spec();
        let l = make_labeled(&spec, &EncoderSpec::ideal(0), 6000, 1).unwrap();
        let mut s = Stream::new(2, "shuffle");
        let labels = ndarray::Array2::from_shape_fn((6000, 2), |(_, j)| s.below(spec.cardinality(j)));
        let l = LabeledRepresentationSet::new(l.reps().clone(), labels, l.spec().clone()).unwrap();
        let (train, test) = (l.slice_rows(0, 4000).unwrap(), l.slice_rows(4000, 6000).unwrap());
        let acc = train_eval_classifier(&train, &test, 0, &[0, 1], &ClassifierConfig::default()).unwrap();
        assert!((acc - 0.25).abs() <= 0.05, "{acc}");
    }

    #[test]
    fn single_class_is_rejected() {
        let spec = small_spec();
        let l = make_labeled(&spec, &EncoderSpec::ideal(0), 10, 1).unwrap();
        let labels = ndarray::Array2::zeros((10, 2));
        let l = LabeledRepresentationSet::new(l.reps().clone(), labels, l.spec().clone()).unwrap();
        let e = train_eval_classifier(&l, &l, 1, &[0], &ClassifierConfig::default()).unwrap_err();
        assert_eq!(e.code(), "SINGLE_CLASS");
    }

    #[test]
    fn model_without_labels_has_omes_only() {
        let pairs = make_pairs(&small_spec(), &EncoderSpec::ideal(0), 300, 1, None).unwrap();
        let r = evaluate_model(&pairs, None, &EvalConfig::default()).unwrap();
        assert!(r.baselines.is_none() && r.accuracies.is_none());
        assert!(r.warnings.iter().any(|w| w.contains("baselines")));
    }

    fn tiny_battery(models: Vec<ModelSpec>) -> BatteryConfig {
        BatteryConfig { metrics: vec![MetricName::Omes, MetricName::Mig], ..BatteryConfig::new(&small_spec(), models) }
    }

    fn model(id: &str, sigma: f64) -> ModelSpec {
        ModelSpec { model_id: id.into(), encoder: EncoderSpec::noisy(sigma, 3), n_pairs: 400, n_labeled: 400, seed: 9 }
    }

    #[test]
    fn two_models_are_not_correlated() {
        let r = run_battery(&tiny_battery(vec![model("a", 0.0), model("b", 1.0)])).unwrap();
        assert!(r.rankcorr.is_none());
        assert!(r.rankcorr_error.unwrap().starts_with("TOO_FEW_MODELS"));
    }

    #[test]
    fn repeated_model_flags_zero_variance() {
        let m = |id: &str| ModelSpec { model_id: id.into(), ..model("x", 0.5) };
        let r = run_battery(&tiny_battery(vec![m("a"), m("b"), m("c")])).unwrap();
        let rc = r.rankcorr.unwrap();
        assert_eq!(rc.zero_variance, vec![(MetricName::Omes, MetricName::Mig)]);
        assert_eq!(rc.matrix[0][1], None);
    }

    #[test]
    fn battery_rows_keep_input_order_and_table_round_trips() {
        let models = vec![model("z", 2.0), model("a", 0.0), model("m", 1.0)];
        let r = run_battery(&tiny_battery(models)).unwrap();
        let ids: Vec<&str> = r.rows.iter().map(|r| r.model_id.as_str()).collect();
        assert_eq!(ids, ["z", "a", "m"]);
        let rc = r.rankcorr.as_ref().unwrap();
        for a in 0..2 {
            assert_eq!(rc.matrix[a][a], Some(1.0));
            for b in 0..2 {
                assert_eq!(rc.matrix[a][b], rc.matrix[b][a]);
            }
        }
        let table = r.score_table();
        assert_eq!(parse_score_table(&score_table_to_csv(&table)).unwrap(), table);
    }

    #[test]
    fn sweep_expands_deterministically() {
        let cfg = BatteryConfig {
            sweep: Some(SweepSpec {
                count: 5,
                kinds: vec![EncoderKind::Noisy, EncoderKind::Mixing],
                sigma_min: 0.0,
                sigma_max: 4.0,
                n_pairs: 10,
                n_labeled: 10,
            }),
            ..tiny_battery(vec![])
        };
        let models = cfg.all_models();
        assert_eq!(models.len(), 5);
        assert_eq!(models[2].encoder.noise_sigma, 2.0);
        assert_eq!(models[1].encoder.kind, EncoderKind::Mixing);
        assert_eq!(models, cfg.all_models());
    }
}
