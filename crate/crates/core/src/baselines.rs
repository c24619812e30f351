//! Comparison metrics: MIG, Modularity and DCI disentanglement.
//!
//! Mutual information uses a plug-in estimate on equal-width histograms of
//! each latent dimension, in nats. DCI importances come either from an
//! L1-penalized softmax regression or directly from the MI matrix.

use ndarray::{Array2, ArrayView2, Axis};

use crate::classifier::{fit_l1_softmax, L1Options, Standardizer};
use crate::error::{Error, Result};
use crate::stats;
use crate::types::{BaselineScores, DciSource, LabeledRepresentationSet};

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct BaselineConfig {
    pub bins: usize,
    pub dci_source: DciSource,
    pub active_threshold: f64,
    pub l1: L1Options,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, dci_source: DciSource::L1Linear, active_threshold: 0.05, l1: L1Options::default() }
    }
}

/// MI between each active dimension (rows) and each factor (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct MiMatrix {
    pub mi: Array2<f64>,
    pub factor_entropy: Vec<f64>,
    pub bins: usize,
    /// Original ids of the rows of `mi`.
    pub active_dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceMatrix {
    pub r: Array2<f64>,
    pub source: DciSource,
    /// Factors whose L1 column came out all zero and were filled from MI.
    pub fallback_factors: Vec<usize>,
}

/// Dimensions of a labeled set whose sample std reaches `threshold`.
pub fn active_dims(labeled: &LabeledRepresentationSet, threshold: f64) -> Result<Vec<usize>> {
    let reps = labeled.reps();
    let active: Vec<usize> =
        (0..reps.dim()).filter(|&h| stats::sample_std(&reps.column(h).to_vec()) >= threshold).collect();
    if active.is_empty() {
        return Err(Error::AllInactive { threshold });
    }
    Ok(active)
}

/// Equal-width bin index of every value over the observed range.
pub fn discretize(values: &[f64], bins: usize) -> Vec<usize> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    values
        .iter()
        .map(|&v| if width > 0.0 { (((v - lo) / width * bins as f64) as usize).min(bins - 1) } else { 0 })
        .collect()
}

fn entropy_of_counts(counts: &[usize], total: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Plug-in mutual information (nats) between two discrete codes.
pub fn discrete_mi(a: &[usize], a_levels: usize, b: &[usize], b_levels: usize) -> f64 {
    let n = a.len() as f64;
    let mut joint = vec![0usize; a_levels * b_levels];
    let mut ca = vec![0usize; a_levels];
    let mut cb = vec![0usize; b_levels];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * b_levels + y] += 1;
        ca[x] += 1;
        cb[y] += 1;
    }
    let mut mi = 0.0;
    for x in 0..a_levels {
        for y in 0..b_levels {
            let c = joint[x * b_levels + y];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (ca[x] as f64 * cb[y] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

pub fn mi_matrix(labeled: &LabeledRepresentationSet, bins: usize) -> Result<MiMatrix> {
    mi_matrix_with(labeled, bins, BaselineConfig::default().active_threshold)
}

pub fn mi_matrix_with(labeled: &LabeledRepresentationSet, bins: usize, threshold: f64) -> Result<MiMatrix> {
    if bins < 2 {
        return Err(Error::Invalid(vec![crate::types::ValidationIssue::new("bins", "bins must be >= 2")]));
    }
    let spec = labeled.spec();
    let labels = labeled.labels();
    let total = labeled.len() as f64;
    let mut factor_entropy = Vec::with_capacity(spec.n());
    let mut label_cols = Vec::with_capacity(spec.n());
    for j in 0..spec.n() {
        let col: Vec<usize> = labels.column(j).to_vec();
        let mut counts = vec![0usize; spec.cardinality(j)];
        col.iter().for_each(|&v| counts[v] += 1);
        if counts.iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::ConstantFactor(j));
        }
        factor_entropy.push(entropy_of_counts(&counts, total));
        label_cols.push(col);
    }
    let active = active_dims(labeled, threshold)?;
    let mut mi = Array2::zeros((active.len(), spec.n()));
    for (row, &h) in active.iter().enumerate() {
        let codes = discretize(&labeled.reps().column(h).to_vec(), bins);
        for j in 0..spec.n() {
            mi[[row, j]] = discrete_mi(&codes, bins, &label_cols[j], spec.cardinality(j));
        }
    }
    Ok(MiMatrix { mi, factor_entropy, bins, active_dims: active })
}

/// Mean over factors of the normalized gap between the two most informative
/// dimensions.
pub fn mig_from(mi: &MiMatrix) -> Result<f64> {
    let m = mi.mi.nrows();
    if m < 2 {
        return Err(Error::NeedTwoDims(m));
    }
    let n = mi.mi.ncols();
    let mut total = 0.0;
    for j in 0..n {
        let mut col = mi.mi.column(j).to_vec();
        col.sort_by(|a, b| b.total_cmp(a));
        total += (col[0] - col[1]) / mi.factor_entropy[j];
    }
    Ok((total / n as f64).clamp(0.0, 1.0))
}

pub fn mig(labeled: &LabeledRepresentationSet, bins: usize) -> Result<f64> {
    mig_from(&mi_matrix(labeled, bins)?)
}

/// Modularity and the rows (positions in `mi`) left out for carrying no
/// information about any factor.
pub fn modularity_from(mi: &MiMatrix) -> Result<(f64, Vec<usize>)> {
    let n = mi.mi.ncols();
    let mut scores = Vec::new();
    let mut excluded = Vec::new();
    for (h, row) in mi.mi.rows().into_iter().enumerate() {
        let (best, theta) =
            row.iter().enumerate().fold((0, 0.0f64), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
        if theta <= 0.0 {
            excluded.push(h);
            continue;
        }
        let delta = if n > 1 {
            let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != best).map(|(_, &v)| v * v).sum();
            off / (theta * theta * (n - 1) as f64)
        } else {
            0.0
        };
        scores.push(1.0 - delta);
    }
    if scores.is_empty() {
        return Err(Error::NoInformativeDims);
    }
    Ok((stats::mean(scores.iter().copied()).clamp(0.0, 1.0), excluded))
}

pub fn modularity(labeled: &LabeledRepresentationSet, bins: usize) -> Result<f64> {
    Ok(modularity_from(&mi_matrix(labeled, bins)?)?.0)
}

/// Importance of each active dimension for predicting each factor.
pub fn importance(labeled: &LabeledRepresentationSet, source: DciSource) -> Result<ImportanceMatrix> {
    importance_with(labeled, source, &BaselineConfig::default())
}

pub fn importance_with(
    labeled: &LabeledRepresentationSet,
    source: DciSource,
    config: &BaselineConfig,
) -> Result<ImportanceMatrix> {
    let mi = || mi_matrix_with(labeled, config.bins, config.active_threshold);
    match source {
        DciSource::Mi => Ok(ImportanceMatrix { r: mi()?.mi, source, fallback_factors: Vec::new() }),
        DciSource::L1Linear => {
            let active = active_dims(labeled, config.active_threshold)?;
            let x = labeled.reps().view().select(Axis(1), &active);
            let xs = Standardizer::fit(x.view()).transform(x.view());
            let spec = labeled.spec();
            let mut r = Array2::zeros((active.len(), spec.n()));
            let mut fallback = Vec::new();
            let mut mi_cache = None;
            for j in 0..spec.n() {
                let y: Vec<usize> = labeled.labels().column(j).to_vec();
                let model = fit_l1_softmax(xs.view(), &y, spec.cardinality(j), config.l1);
                let col = model.weights.map_axis(Axis(1), |w| w.iter().map(|v| v.abs()).sum::<f64>());
                if col.iter().all(|&v| v == 0.0) {
                    if mi_cache.is_none() {
                        mi_cache = Some(mi()?);
                    }
                    let m: &MiMatrix = mi_cache.as_ref().expect("filled above");
                    r.column_mut(j).assign(&m.mi.column(j));
                    fallback.push(j);
                } else {
                    r.column_mut(j).assign(&col);
                }
            }
            Ok(ImportanceMatrix { r, source, fallback_factors: fallback })
        }
    }
}

/// Importance-weighted mean of `1 - H_n(row)` over dimensions.
pub fn dci_from_importance(r: ArrayView2<'_, f64>) -> Result<f64> {
    let n = r.ncols();
    let total: f64 = r.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoImportance);
    }
    let mut score = 0.0;
    for row in r.rows() {
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            continue;
        }
        let d = if n > 1 {
            let h: f64 = row
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| {
                    let p = v / mass;
                    -p * p.ln()
                })
                .sum();
            1.0 - h / (n as f64).ln()
        } else {
            1.0
        };
        score += mass / total * d;
    }
    Ok(score.clamp(0.0, 1.0))
}

pub fn dci_disentanglement(labeled: &LabeledRepresentationSet, source: DciSource) -> Result<f64> {
    dci_from_importance(importance(labeled, source)?.r.view())
}

/// All three baselines; a failing metric is recorded in `errors` and left
/// `None` instead of aborting the others.
pub fn evaluate_baselines(labeled: &LabeledRepresentationSet, config: &BaselineConfig) -> BaselineScores {
    let mut out = BaselineScores { bins: config.bins, dci_source: config.dci_source, ..Default::default() };
    let record = |errors: &mut Vec<String>, metric: &str, e: Error| {
        errors.push(format!("{metric}: {}: {e}", e.code()));
    };
    match mi_matrix_with(labeled, config.bins, config.active_threshold) {
        Ok(mi) => {
            match mig_from(&mi) {
                Ok(v) => out.mig = Some(v),
                Err(e) => record(&mut out.errors, "mig", e),
            }
            match modularity_from(&mi) {
                Ok((v, excluded)) => {
                    out.modularity = Some(v);
                    out.modularity_excluded_dims = excluded.into_iter().map(|h| mi.active_dims[h]).collect();
                }
                Err(e) => record(&mut out.errors, "modularity", e),
            }
        }
        Err(e) => {
            record(&mut out.errors, "mig", clone_err(&e));
            record(&mut out.errors, "modularity", e);
        }
    }
    match importance_with(labeled, config.dci_source, config)
        .and_then(|imp| Ok((dci_from_importance(imp.r.view())?, imp.fallback_factors)))
    {
        Ok((v, fallback)) => {
            out.dci = Some(v);
            out.dci_fallback_factors = fallback;
        }
        Err(e) => record(&mut out.errors, "dci", e),
    }
    out
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::AllInactive { threshold } => Error::AllInactive { threshold: *threshold },
        Error::ConstantFactor(j) => Error::ConstantFactor(*j),
        other => Error::Shape(other.to_string()),
    }
}
