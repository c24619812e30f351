//! Domain types shared by every module.
//!
//! Constructors validate their invariants, so a value of any of these types
//! that exists in memory is known to be well-formed. Indices of factors and
//! latent dimensions are zero-based everywhere.

use std::collections::HashSet;
use std::fmt;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One violated invariant, addressed by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub trait Validate {
    /// Every violated invariant; empty when the value is well-formed.
    fn issues(&self) -> Vec<ValidationIssue>;

    fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(issues))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub cardinality: usize,
}

impl Factor {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Self {
        Self { name: name.into(), cardinality }
    }
}

/// Names and cardinalities of the factors of variation, in order.
///
/// `latent_dim` is the representation width declared alongside the factors in
/// the spec sidecar file; readers use it to cross-check CSV headers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorSpec {
    factors: Vec<Factor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    latent_dim: Option<usize>,
}

impl FactorSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let spec = Self { factors, latent_dim: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_pairs<S: AsRef<str>>(factors: &[(S, usize)]) -> Result<Self> {
        Self::new(factors.iter().map(|(name, card)| Factor::new(name.as_ref(), *card)).collect())
    }

    pub fn with_latent_dim(mut self, d: usize) -> Result<Self> {
        self.latent_dim = Some(d);
        self.validate()?;
        Ok(self)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn cardinality(&self, j: usize) -> usize {
        self.factors[j].cardinality
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.cardinality).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.factors.iter().map(|f| f.name.clone()).collect()
    }

    pub fn latent_dim(&self) -> Option<usize> {
        self.latent_dim
    }

    /// Spec whose factor `i` is this spec's factor `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let factors = order
            .iter()
            .map(|&j| self.factors.get(j).cloned().ok_or(Error::Index { index: j, len: self.n() }))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = Self::new(factors)?;
        spec.latent_dim = self.latent_dim;
        Ok(spec)
    }
}

impl Validate for FactorSpec {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        if self.factors.is_empty() {
            out.push(ValidationIssue::new("factors", "at least one factor required"));
        }
        let mut seen = HashSet::new();
        for (j, f) in self.factors.iter().enumerate() {
            if f.name.is_empty() {
                out.push(ValidationIssue::new(format!("factors[{j}].name"), "empty name"));
            } else if !seen.insert(f.name.as_str()) {
                out.push(ValidationIssue::new(format!("factors[{j}].name"), format!("duplicate name {:?}", f.name)));
            }
            if f.cardinality < 2 {
                out.push(ValidationIssue::new(
                    format!("factors[{j}].cardinality"),
                    format!("cardinality < 2 (got {})", f.cardinality),
                ));
            }
        }
        if self.latent_dim == Some(0) {
            out.push(ValidationIssue::new("latent_dim", "latent_dim must be >= 1"));
        }
        out
    }
}

/// N×d matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationMatrix(Array2<f64>);

impl RepresentationMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let m = Self(data);
        m.validate()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), d), flat).map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(data)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn n_samples(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn column(&self, h: usize) -> ArrayView1<'_, f64> {
        self.0.column(h)
    }
}

impl Validate for RepresentationMatrix {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        if self.0.nrows() == 0 {
            out.push(ValidationIssue::new("data", "N must be >= 1"));
        }
        if self.0.ncols() == 0 {
            out.push(ValidationIssue::new("data", "d must be >= 1"));
        }
        if let Some(((i, h), v)) = self.0.indexed_iter().find(|(_, v)| !v.is_finite()) {
            out.push(ValidationIssue::new(format!("data[{i}][{h}]"), format!("non-finite value {v}")));
        }
        out
    }
}

/// Two N×d matrices whose row `i` holds the two sides of a pair that differ
/// only in factor `k[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRepresentationSet {
    r1: RepresentationMatrix,
    r2: RepresentationMatrix,
    k: Vec<usize>,
    spec: FactorSpec,
}

impl PairedRepresentationSet {
    pub fn new(r1: RepresentationMatrix, r2: RepresentationMatrix, k: Vec<usize>, spec: FactorSpec) -> Result<Self> {
        let set = Self { r1, r2, k, spec };
        set.validate()?;
        Ok(set)
    }

    pub fn r1(&self) -> &RepresentationMatrix {
        &self.r1
    }

    pub fn r2(&self) -> &RepresentationMatrix {
        &self.r2
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.r1.dim()
    }

    /// Number of pairs intervening on each factor.
    pub fn pairs_per_factor(&self) -> Vec<usize> {
        let mut counts = vec![0; self.spec.n()];
        for &k in &self.k {
            counts[k] += 1;
        }
        counts
    }

    pub fn into_parts(self) -> (RepresentationMatrix, RepresentationMatrix, Vec<usize>, FactorSpec) {
        (self.r1, self.r2, self.k, self.spec)
    }
}

impl Validate for PairedRepresentationSet {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = self.spec.issues();
        out.extend(prefixed("r1", self.r1.issues()));
        out.extend(prefixed("r2", self.r2.issues()));
        if self.r1.view().dim() != self.r2.view().dim() {
            out.push(ValidationIssue::new(
                "r2",
                format!("shape {:?} differs from r1 shape {:?}", self.r2.view().dim(), self.r1.view().dim()),
            ));
        }
        if self.k.len() != self.r1.n_samples() {
            out.push(ValidationIssue::new(
                "k",
                format!("length {} differs from N = {}", self.k.len(), self.r1.n_samples()),
            ));
        }
        let n = self.spec.n();
        if let Some((i, k)) = self.k.iter().enumerate().find(|(_, &k)| k >= n) {
            out.push(ValidationIssue::new(format!("k[{i}]"), format!("factor index out of range: {k} >= {n}")));
        }
        out
    }
}

/// Representations with full factor annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRepresentationSet {
    reps: RepresentationMatrix,
    labels: Array2<usize>,
    spec: FactorSpec,
}

impl LabeledRepresentationSet {
    pub fn new(reps: RepresentationMatrix, labels: Array2<usize>, spec: FactorSpec) -> Result<Self> {
        let set = Self { reps, labels, spec };
        set.validate()?;
        Ok(set)
    }

    pub fn reps(&self) -> &RepresentationMatrix {
        &self.reps
    }

    pub fn labels(&self) -> ArrayView2<'_, usize> {
        self.labels.view()
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.labels.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.nrows() == 0
    }

    /// Rows `start..end` as a new set.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        use ndarray::s;
        let reps = RepresentationMatrix::new(self.reps.view().slice(s![start..end, ..]).to_owned())?;
        let labels = self.labels.slice(s![start..end, ..]).to_owned();
        Self::new(reps, labels, self.spec.clone())
    }
}

impl Validate for LabeledRepresentationSet {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = self.spec.issues();
        out.extend(prefixed("reps", self.reps.issues()));
        if self.labels.nrows() != self.reps.n_samples() {
            out.push(ValidationIssue::new(
                "labels",
                format!("{} label rows for {} representation rows", self.labels.nrows(), self.reps.n_samples()),
            ));
        }
        if self.labels.ncols() != self.spec.n() {
            out.push(ValidationIssue::new(
                "labels",
                format!("{} label columns for {} factors", self.labels.ncols(), self.spec.n()),
            ));
            return out;
        }
        for (j, f) in self.spec.factors().iter().enumerate() {
            if let Some((i, v)) = self.labels.column(j).iter().enumerate().find(|(_, &v)| v >= f.cardinality) {
                out.push(ValidationIssue::new(
                    format!("labels[{i}][{j}]"),
                    format!("label {v} out of range for cardinality {}", f.cardinality),
                ));
            }
        }
        out
    }
}

/// Which latent dimensions survive the activity filter.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveDimMask {
    mask: Vec<bool>,
    threshold: f64,
}

impl ActiveDimMask {
    pub fn new(mask: Vec<bool>, threshold: f64) -> Result<Self> {
        let m = Self { mask, threshold };
        m.validate()?;
        Ok(m)
    }

    /// Every one of `d` dimensions active.
    pub fn all(d: usize, threshold: f64) -> Self {
        Self { mask: vec![true; d], threshold }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn m(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn d(&self) -> usize {
        self.mask.len()
    }

    /// Original dimension ids of the active dimensions, ascending.
    pub fn active_indices(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter_map(|(h, &on)| on.then_some(h)).collect()
    }
}

impl Validate for ActiveDimMask {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            out.push(ValidationIssue::new("threshold", "threshold must be a positive finite real"));
        }
        out
    }
}

/// m×n matrix over active dimensions; entry (h, j) is high when active
/// dimension h encodes factor j.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    s: Array2<f64>,
    mask: ActiveDimMask,
    spec: FactorSpec,
    pairs_per_factor: Vec<usize>,
}

impl AssociationMatrix {
    pub fn new(s: Array2<f64>, mask: ActiveDimMask, spec: FactorSpec, pairs_per_factor: Vec<usize>) -> Result<Self> {
        let a = Self { s, mask, spec, pairs_per_factor };
        a.validate()?;
        Ok(a)
    }

    /// Square matrix with every dimension active and no pair bookkeeping;
    /// used for synthetic matrices that do not come from data.
    pub fn synthetic(s: Array2<f64>, spec: FactorSpec) -> Result<Self> {
        let m = s.nrows();
        let n = spec.n();
        Self::new(s, ActiveDimMask::all(m, 0.05), spec, vec![0; n])
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.s.view()
    }

    pub fn get(&self, h: usize, j: usize) -> f64 {
        self.s[[h, j]]
    }

    pub fn mask(&self) -> &ActiveDimMask {
        &self.mask
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn pairs_per_factor(&self) -> &[usize] {
        &self.pairs_per_factor
    }

    pub fn m(&self) -> usize {
        self.s.nrows()
    }

    pub fn n(&self) -> usize {
        self.s.ncols()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.s.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

impl Validate for AssociationMatrix {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = self.spec.issues();
        out.extend(prefixed("mask", self.mask.issues()));
        if self.s.nrows() != self.mask.m() {
            out.push(ValidationIssue::new(
                "s",
                format!("{} rows but mask has {} active dims", self.s.nrows(), self.mask.m()),
            ));
        }
        if self.s.ncols() != self.spec.n() {
            out.push(ValidationIssue::new("s", format!("{} columns for {} factors", self.s.ncols(), self.spec.n())));
        }
        if self.pairs_per_factor.len() != self.spec.n() {
            out.push(ValidationIssue::new("pairs_per_factor", "length differs from n"));
        }
        if let Some(((h, j), v)) = self.s.indexed_iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            out.push(ValidationIssue::new(format!("s[{h}][{j}]"), format!("{v} outside [0, 1]")));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Max,
    #[serde(alias = "avg")]
    Average,
}

impl Pooling {
    pub fn pool(self, scores: &[f64]) -> f64 {
        match self {
            Pooling::Max => scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Pooling::Average => scores.iter().sum::<f64>() / scores.len() as f64,
        }
    }
}

impl std::str::FromStr for Pooling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(Pooling::Max),
            "avg" | "average" | "mean" => Ok(Pooling::Average),
            other => Err(format!("unknown pooling {other:?} (expected max or avg)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OmesConfig {
    pub alpha: f64,
    pub pooling: Pooling,
    pub active_threshold: f64,
    pub min_pairs_per_factor: usize,
}

impl Default for OmesConfig {
    fn default() -> Self {
        Self { alpha: 0.5, pooling: Pooling::Max, active_threshold: 0.05, min_pairs_per_factor: 3 }
    }
}

impl Validate for OmesConfig {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.alpha) {
            out.push(ValidationIssue::new("alpha", "alpha must lie in [0,1]"));
        }
        if !(self.active_threshold > 0.0 && self.active_threshold.is_finite()) {
            out.push(ValidationIssue::new("active_threshold", "threshold must be > 0"));
        }
        if self.min_pairs_per_factor < 2 {
            out.push(ValidationIssue::new("min_pairs_per_factor", "must be >= 2"));
        }
        out
    }
}

/// Which importance provider DCI uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DciSource {
    #[default]
    #[serde(rename = "l1", alias = "l1_linear")]
    L1Linear,
    Mi,
}

impl std::str::FromStr for DciSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "l1_linear" => Ok(DciSource::L1Linear),
            "mi" => Ok(DciSource::Mi),
            other => Err(format!("unknown DCI source {other:?} (expected l1 or mi)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct BaselineScores {
    pub mig: Option<f64>,
    pub modularity: Option<f64>,
    pub dci: Option<f64>,
    pub bins: usize,
    pub dci_source: DciSource,
    /// Factors whose L1 importance column collapsed and fell back to MI.
    #[serde(default)]
    pub dci_fallback_factors: Vec<usize>,
    /// Active dimensions with zero MI to every factor, left out of Modularity.
    #[serde(default)]
    pub modularity_excluded_dims: Vec<usize>,
    /// Per-metric failures, `CODE: message`.
    #[serde(default)]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub classifier: String,
    pub full: Vec<f64>,
    pub pruned: Vec<f64>,
}

/// Association matrix as carried inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationSummary {
    /// Original ids of the active dimensions; row `h` of `matrix` is
    /// dimension `active_dims[h]`.
    pub active_dims: Vec<usize>,
    pub threshold: f64,
    pub pairs_per_factor: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub factor_names: Vec<String>,
    pub omes: f64,
    pub os_per_factor: Vec<f64>,
    pub mes_per_factor: Vec<f64>,
    pub config: OmesConfig,
    #[serde(default)]
    pub baselines: Option<BaselineScores>,
    /// Per factor, the original id of the dimension that best encodes it.
    #[serde(default)]
    pub pruning: Option<Vec<usize>>,
    #[serde(default)]
    pub association: Option<AssociationSummary>,
    #[serde(default)]
    pub accuracies: Option<AccuracySummary>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl MetricReport {
    pub fn n(&self) -> usize {
        self.os_per_factor.len()
    }

    /// OMES recomputed from the per-factor vectors.
    pub fn recomputed_omes(&self) -> f64 {
        blend(self.config.alpha, &self.os_per_factor, &self.mes_per_factor)
    }
}

/// Mean over factors of `alpha * os + (1 - alpha) * mes`.
pub(crate) fn blend(alpha: f64, os: &[f64], mes: &[f64]) -> f64 {
    let total: f64 = os.iter().zip(mes).map(|(o, m)| alpha * o + (1.0 - alpha) * m).sum();
    total / os.len() as f64
}

impl Validate for MetricReport {
    fn issues(&self) -> Vec<ValidationIssue> {
        let mut out: Vec<ValidationIssue> = prefixed("config", self.config.issues()).collect();
        let n = self.os_per_factor.len();
        if n == 0 {
            out.push(ValidationIssue::new("os_per_factor", "empty"));
            return out;
        }
        if self.mes_per_factor.len() != n || self.factor_names.len() != n {
            out.push(ValidationIssue::new("mes_per_factor", "per-factor vectors differ in length"));
            return out;
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.omes) {
            out.push(ValidationIssue::new("omes", format!("{} outside [0, 1]", self.omes)));
        }
        for (name, v) in [("os_per_factor", &self.os_per_factor), ("mes_per_factor", &self.mes_per_factor)] {
            if let Some((j, x)) = v.iter().enumerate().find(|(_, &x)| !unit(x)) {
                out.push(ValidationIssue::new(format!("{name}[{j}]"), format!("{x} outside [0, 1]")));
            }
        }
        let again = self.recomputed_omes();
        if (again - self.omes).abs() > 1e-12 {
            out.push(ValidationIssue::new("omes", format!("stored {} but per-factor scores give {again}", self.omes)));
        }
        if let Some(p) = &self.pruning {
            if p.len() != n {
                out.push(ValidationIssue::new("pruning", "length differs from n"));
            }
        }
        if let Some(a) = &self.association {
            if a.matrix.len() != a.active_dims.len() || a.matrix.iter().any(|r| r.len() != n) {
                out.push(ValidationIssue::new("association.matrix", "shape differs from m x n"));
            }
            if a.matrix.iter().flatten().any(|&v| !unit(v)) {
                out.push(ValidationIssue::new("association.matrix", "entry outside [0, 1]"));
            }
        }
        out
    }
}

fn prefixed(prefix: &str, issues: Vec<ValidationIssue>) -> impl Iterator<Item = ValidationIssue> + '_ {
    issues.into_iter().map(move |i| ValidationIssue { path: format!("{prefix}.{}", i.path), message: i.message })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn messages(issues: &[ValidationIssue]) -> String {
        issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n")
    }

    #[test]
    fn well_formed_spec_is_ok() {
        let spec = FactorSpec::from_pairs(&[("shape", 3), ("scale", 6)]).unwrap();
        assert!(spec.issues().is_empty());
        assert_eq!(spec.n(), 2);
    }

    #[test]
    fn cardinality_one_is_rejected() {
        let err = FactorSpec::from_pairs(&[("x", 1)]).unwrap_err();
        assert!(err.to_string().contains("cardinality < 2"), "{err}");
    }

    #[test]
    fn duplicate_and_empty_names_are_listed_together() {
        let spec = FactorSpec {
            factors: vec![Factor::new("a", 2), Factor::new("a", 3), Factor::new("", 4)],
            latent_dim: None,
        };
        let issues = spec.issues();
        assert_eq!(issues.len(), 2, "{}", messages(&issues));
        assert_eq!(issues[0].path, "factors[1].name");
        assert_eq!(issues[1].path, "factors[2].name");
    }

    #[test]
    fn pair_index_out_of_range_is_rejected() {
        let spec = FactorSpec::from_pairs(&[("a", 2), ("b", 2), ("c", 2)]).unwrap();
        let r = RepresentationMatrix::new(array![[0.0]]).unwrap();
        let err = PairedRepresentationSet::new(r.clone(), r, vec![5], spec).unwrap_err();
        assert!(err.to_string().contains("factor index out of range"), "{err}");
    }

    #[test]
    fn non_finite_representation_is_rejected() {
        let err = RepresentationMatrix::new(array![[1.0, f64::NAN]]).unwrap_err();
        assert!(err.to_string().contains("data[0][1]"), "{err}");
        assert!(RepresentationMatrix::new(Array2::zeros((0, 3))).is_err());
    }

    #[test]
    fn mismatched_pair_shapes_are_rejected() {
        let spec = FactorSpec::from_pairs(&[("a", 2)]).unwrap();
        let a = RepresentationMatrix::new(array![[0.0, 1.0]]).unwrap();
        let b = RepresentationMatrix::new(array![[0.0]]).unwrap();
        assert!(PairedRepresentationSet::new(a, b, vec![0], spec).is_err());
    }

    #[test]
    fn labels_respect_cardinality() {
        let spec = FactorSpec::from_pairs(&[("a", 3)]).unwrap();
        let reps = RepresentationMatrix::new(array![[0.0], [1.0]]).unwrap();
        assert!(LabeledRepresentationSet::new(reps.clone(), array![[0], [2]], spec.clone()).is_ok());
        let err = LabeledRepresentationSet::new(reps, array![[0], [3]], spec).unwrap_err();
        assert!(err.to_string().contains("labels[1][0]"), "{err}");
    }

    #[test]
    fn association_entries_must_lie_in_unit_interval() {
        let spec = FactorSpec::from_pairs(&[("a", 2)]).unwrap();
        assert!(AssociationMatrix::synthetic(array![[0.5]], spec.clone()).is_ok());
        assert!(AssociationMatrix::synthetic(array![[1.5]], spec.clone()).is_err());
        // row count must follow the mask
        let mask = ActiveDimMask::new(vec![true, false], 0.05).unwrap();
        assert!(AssociationMatrix::new(array![[0.5], [0.5]], mask, spec, vec![0]).is_err());
    }

    #[test]
    fn config_bounds() {
        let bad = OmesConfig { alpha: 1.5, ..Default::default() };
        let issues = bad.issues();
        assert_eq!(issues[0].message, "alpha must lie in [0,1]");
        assert!(OmesConfig::default().issues().is_empty());
    }

    #[test]
    fn report_omes_must_match_its_per_factor_scores() {
        let mut report = MetricReport {
            factor_names: vec!["a".into(), "b".into()],
            omes: 0.7,
            os_per_factor: vec![0.8, 0.8],
            mes_per_factor: vec![0.6, 0.6],
            config: OmesConfig::default(),
            baselines: None,
            pruning: None,
            association: None,
            accuracies: None,
            warnings: vec![],
        };
        assert!(report.validate().is_ok());
        report.omes = 0.71;
        assert!(report.validate().is_err());
    }

    #[test]
    fn pooling_parses_cli_spellings() {
        assert_eq!("max".parse::<Pooling>().unwrap(), Pooling::Max);
        assert_eq!("avg".parse::<Pooling>().unwrap(), Pooling::Average);
        assert!("median".parse::<Pooling>().is_err());
        assert_eq!(Pooling::Average.pool(&[1.0, 0.0]), 0.5);
        assert_eq!(Pooling::Max.pool(&[1.0, 0.0]), 1.0);
    }
}
