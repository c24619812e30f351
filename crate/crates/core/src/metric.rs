//! The OMES metric: activity filtering, the dimension/factor association
//! matrix, overlap and multiple-encoding scores, their blend, and pruning.
//!
//! For pairs that differ only in factor `j`, a dimension that encodes `j`
//! decorrelates across the two sides while every other dimension stays put.
//! The association matrix records `1 - |pearson|` per (dimension, factor);
//! the overlap score compares each row with a one-hot ideal and the
//! multiple-encoding score does the same for each column.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats;
use crate::types::{
    blend, ActiveDimMask, AssociationMatrix, AssociationSummary, MetricReport, OmesConfig, PairedRepresentationSet,
    Pooling, RepresentationMatrix, Validate,
};

/// Below this many pairs for a factor the Pearson estimate is noisy enough
/// that the report carries a warning.
pub const STABLE_PAIR_COUNT: usize = 30;

/// Pooled and pre-pooling scores for every factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PerFactorScores {
    pub os: Vec<f64>,
    pub mes: Vec<f64>,
    /// n×m: row `j` holds the per-dimension overlap scores of factor `j`.
    pub per_dim_os: Array2<f64>,
    /// n×m: row `j` holds the per-dimension multiple-encoding scores of factor `j`.
    pub per_dim_mes: Array2<f64>,
}

/// Keep dimension `h` iff the sample std of column `h` over the stacked
/// `r1`/`r2` rows is at least `threshold`.
pub fn filter_active_dims(
    r1: &RepresentationMatrix,
    r2: &RepresentationMatrix,
    threshold: f64,
) -> Result<ActiveDimMask> {
    if r1.view().dim() != r2.view().dim() {
        return Err(Error::Shape(format!("r1 is {:?} but r2 is {:?}", r1.view().dim(), r2.view().dim())));
    }
    let mut mask = Vec::with_capacity(r1.dim());
    let mut stacked = Vec::with_capacity(2 * r1.n_samples());
    for h in 0..r1.dim() {
        stacked.clear();
        stacked.extend(r1.column(h).iter());
        stacked.extend(r2.column(h).iter());
        mask.push(stats::sample_std(&stacked) >= threshold);
    }
    let mask = ActiveDimMask::new(mask, threshold)?;
    if mask.m() == 0 {
        return Err(Error::AllInactive { threshold });
    }
    Ok(mask)
}

/// Association matrix over the active dimensions of `pairs`.
pub fn association_matrix(pairs: &PairedRepresentationSet, config: &OmesConfig) -> Result<AssociationMatrix> {
    config.validate()?;
    let mask = filter_active_dims(pairs.r1(), pairs.r2(), config.active_threshold)?;
    association_matrix_with_mask(pairs, mask, config)
}

/// Association matrix restricted to a precomputed activity mask.
pub fn association_matrix_with_mask(
    pairs: &PairedRepresentationSet,
    mask: ActiveDimMask,
    config: &OmesConfig,
) -> Result<AssociationMatrix> {
    if mask.d() != pairs.dim() {
        return Err(Error::Shape(format!("mask covers {} dims, pairs have {}", mask.d(), pairs.dim())));
    }
    let n = pairs.spec().n();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &k) in pairs.k().iter().enumerate() {
        groups[k].push(i);
    }
    for (j, g) in groups.iter().enumerate() {
        if g.len() < config.min_pairs_per_factor {
            return Err(Error::TooFewPairs { factor: j, found: g.len(), required: config.min_pairs_per_factor });
        }
    }

    let active = mask.active_indices();
    let rows: Vec<Vec<f64>> = active
        .par_iter()
        .map(|&h| {
            let a = pairs.r1().column(h).to_vec();
            let b = pairs.r2().column(h).to_vec();
            groups
                .iter()
                .map(|idx| {
                    let xs = idx.iter().map(|&i| a[i]);
                    let ys = idx.iter().map(|&i| b[i]);
                    // A dimension that does not move under interventions on
                    // this factor carries none of it: treat as fully correlated.
                    let pc = stats::pearson(xs, ys).unwrap_or(1.0);
                    1.0 - pc.abs()
                })
                .collect()
        })
        .collect();

    let m = active.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let s = Array2::from_shape_vec((m, n), flat).expect("m*n cells");
    AssociationMatrix::new(s, mask, pairs.spec().clone(), groups.iter().map(Vec::len).collect())
}

/// `1 - mean |ideal - actual|` with `ideal` one-hot at `hot`.
fn one_minus_mae<I: Iterator<Item = f64>>(actual: I, hot: usize, len: usize) -> f64 {
    let mut total = 0.0;
    for (c, v) in actual.enumerate() {
        let ideal = if c == hot { 1.0 } else { 0.0 };
        total += (ideal - v).abs();
    }
    1.0 - total / len as f64
}

/// Overlap score of factor `j`: each row of `s` against the one-hot at `j`.
pub fn overlap_score(s: ArrayView2<'_, f64>, j: usize, pooling: Pooling) -> Result<(f64, Vec<f64>)> {
    let (m, n) = s.dim();
    if j >= n {
        return Err(Error::Index { index: j, len: n });
    }
    if m == 0 {
        return Err(Error::Shape("association matrix has no rows".into()));
    }
    let per_dim: Vec<f64> = s.rows().into_iter().map(|row| one_minus_mae(row.iter().copied(), j, n)).collect();
    Ok((pooling.pool(&per_dim), per_dim))
}

/// Multiple-encoding score of factor `j`: column `j` against the one-hot at
/// each dimension in turn.
pub fn multiple_encoding_score(s: ArrayView2<'_, f64>, j: usize, pooling: Pooling) -> Result<(f64, Vec<f64>)> {
    let (m, n) = s.dim();
    if j >= n {
        return Err(Error::Index { index: j, len: n });
    }
    if m == 0 {
        return Err(Error::Shape("association matrix has no rows".into()));
    }
    let col = s.column(j);
    let per_dim: Vec<f64> = (0..m).map(|h| one_minus_mae(col.iter().copied(), h, m)).collect();
    Ok((pooling.pool(&per_dim), per_dim))
}

pub fn per_factor_scores(s: ArrayView2<'_, f64>, pooling: Pooling) -> Result<PerFactorScores> {
    let (m, n) = s.dim();
    let mut out = PerFactorScores {
        os: Vec::with_capacity(n),
        mes: Vec::with_capacity(n),
        per_dim_os: Array2::zeros((n, m)),
        per_dim_mes: Array2::zeros((n, m)),
    };
    for j in 0..n {
        let (os, os_dims) = overlap_score(s, j, pooling)?;
        let (mes, mes_dims) = multiple_encoding_score(s, j, pooling)?;
        out.os.push(os);
        out.mes.push(mes);
        out.per_dim_os.row_mut(j).assign(&ndarray::aview1(&os_dims));
        out.per_dim_mes.row_mut(j).assign(&ndarray::aview1(&mes_dims));
    }
    Ok(out)
}

/// Score an association matrix. The report carries the matrix itself and the
/// pruned dimensions but no baselines.
pub fn omes(s: &AssociationMatrix, config: &OmesConfig) -> Result<MetricReport> {
    config.validate()?;
    let scores = per_factor_scores(s.values(), config.pooling)?;
    let omes = blend(config.alpha, &scores.os, &scores.mes);
    let active = s.mask().active_indices();
    let pruning = prune(s).into_iter().map(|h| active[h]).collect();

    let mut warnings = Vec::new();
    for (j, &count) in s.pairs_per_factor().iter().enumerate() {
        if count > 0 && count < STABLE_PAIR_COUNT {
            warnings.push(format!(
                "factor {j} has only {count} pairs; correlations below {STABLE_PAIR_COUNT} pairs are unstable"
            ));
        }
    }

    let report = MetricReport {
        factor_names: s.spec().names(),
        omes,
        os_per_factor: scores.os,
        mes_per_factor: scores.mes,
        config: *config,
        baselines: None,
        pruning: Some(pruning),
        association: Some(AssociationSummary {
            active_dims: active,
            threshold: s.mask().threshold(),
            pairs_per_factor: s.pairs_per_factor().to_vec(),
            matrix: s.rows(),
        }),
        accuracies: None,
        warnings,
    };
    report.validate()?;
    Ok(report)
}

/// Per factor, the active-dimension position with the largest association;
/// ties go to the lowest position.
pub fn prune(s: &AssociationMatrix) -> Vec<usize> {
    prune_values(s.values())
}

pub fn prune_values(s: ArrayView2<'_, f64>) -> Vec<usize> {
    s.columns()
        .into_iter()
        .map(|col| {
            let mut best = 0;
            for (h, &v) in col.iter().enumerate() {
                if v > col[best] {
                    best = h;
                }
            }
            best
        })
        .collect()
}

/// Filter, associate, score and prune in one call.
pub fn evaluate_pairs(pairs: &PairedRepresentationSet, config: &OmesConfig) -> Result<MetricReport> {
    let s = association_matrix(pairs, config)?;
    omes(&s, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FactorSpec;
    use ndarray::{array, Array2};

    fn spec(n: usize) -> FactorSpec {
        let f: Vec<(String, usize)> = (0..n).map(|j| (format!("f{j}"), 4)).collect();
        FactorSpec::from_pairs(&f).unwrap()
    }

    fn reps(rows: Vec<Vec<f64>>) -> RepresentationMatrix {
        RepresentationMatrix::from_rows(&rows).unwrap()
    }

    fn cols(c: &[&[f64]]) -> RepresentationMatrix {
        let n = c[0].len();
        reps((0..n).map(|i| c.iter().map(|col| col[i]).collect()).collect())
    }

    #[test]
    fn constant_column_is_inactive() {
        let a = cols(&[&[7.0, 7.0, 7.0, 7.0], &[0.0, 1.0, 0.0, 1.0]]);
        let mask = filter_active_dims(&a, &a, 0.05).unwrap();
        assert_eq!(mask.mask(), &[false, true]);
        assert_eq!(mask.m(), 1);
    }

    #[test]
    fn all_constant_is_error() {
        let a = cols(&[&[1.0, 1.0], &[2.0, 2.0]]);
        let err = filter_active_dims(&a, &a, 0.05).unwrap_err();
        assert_eq!(err.code(), "ALL_INACTIVE");
    }

    #[test]
    fn threshold_boundary_keeps_equal() {
        // Boundary at exactly the oracle std of the stacked column.
        let base = [0.0, 0.03, 0.11, 0.07, 0.02, 0.09];
        let a = cols(&[&base[..3]]);
        let b = cols(&[&base[3..]]);
        let mu = base.iter().sum::<f64>() / 6.0;
        let oracle = (base.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / 5.0).sqrt();
        assert!(filter_active_dims(&a, &b, oracle).is_ok());
        let above = f64::from_bits(oracle.to_bits() + 1);
        assert_eq!(filter_active_dims(&a, &b, above).unwrap_err().code(), "ALL_INACTIVE");
    }

    #[test]
    fn std_just_below_threshold_is_dropped() {
        // Column with sample std 1 scaled to 0.049999 and to just over 0.05.
        let raw: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let unit = stats::sample_std(&raw);
        let scaled = |target: f64| -> Vec<f64> { raw.iter().map(|v| v * target / unit).collect() };
        let low = scaled(0.049999);
        let a = cols(&[&low[..4], &[0.0, 1.0, 0.0, 1.0]]);
        let b = cols(&[&low[4..], &[1.0, 0.0, 1.0, 0.0]]);
        assert_eq!(filter_active_dims(&a, &b, 0.05).unwrap().mask(), &[false, true]);
        let ok = scaled(0.05 * (1.0 + 1e-12));
        let a = cols(&[&ok[..4]]);
        let b = cols(&[&ok[4..]]);
        assert_eq!(filter_active_dims(&a, &b, 0.05).unwrap().mask(), &[true]);
    }

    fn single_factor_pairs(a: &[f64], b: &[f64]) -> PairedRepresentationSet {
        PairedRepresentationSet::new(cols(&[a]), cols(&[b]), vec![0; a.len()], spec(1)).unwrap()
    }

    #[test]
    fn identical_sides_give_zero_association() {
        let p = single_factor_pairs(&[1.0, 2.0, 3.0, 5.0], &[1.0, 2.0, 3.0, 5.0]);
        let s = association_matrix(&p, &OmesConfig::default()).unwrap();
        assert!(s.get(0, 0).abs() < 1e-15);
    }

    #[test]
    fn negated_sides_give_zero_association() {
        let p = single_factor_pairs(&[1.0, 2.0, 3.0, 5.0], &[-1.0, -2.0, -3.0, -5.0]);
        let s = association_matrix(&p, &OmesConfig::default()).unwrap();
        assert_eq!(s.get(0, 0), 0.0);
    }

    #[test]
    fn hand_pearson_cell() {
        let p = single_factor_pairs(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]);
        let s = association_matrix(&p, &OmesConfig::default()).unwrap();
        assert!((s.get(0, 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn constant_within_factor_subset_gives_zero() {
        // Dimension varies overall but is constant on both sides of factor-1 pairs.
        let a = cols(&[&[0.0, 1.0, 2.0, 5.0, 5.0, 5.0]]);
        let b = cols(&[&[2.0, 0.0, 1.0, 5.0, 5.0, 5.0]]);
        let p = PairedRepresentationSet::new(a, b, vec![0, 0, 0, 1, 1, 1], spec(2)).unwrap();
        let s = association_matrix(&p, &OmesConfig::default()).unwrap();
        assert_eq!(s.get(0, 1), 0.0);
        assert!(s.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn too_few_pairs() {
        let a = cols(&[&[0.0, 1.0, 2.0, 3.0, 4.0]]);
        let p = PairedRepresentationSet::new(a.clone(), a, vec![0, 0, 0, 1, 1], spec(2)).unwrap();
        let err = association_matrix(&p, &OmesConfig::default()).unwrap_err();
        assert!(matches!(err, Error::TooFewPairs { factor: 1, found: 2, required: 3 }), "{err}");
    }

    #[test]
    fn overlap_examples() {
        let eye = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(overlap_score(eye.view(), 0, Pooling::Max).unwrap().0, 1.0);
        assert_eq!(overlap_score(eye.view(), 0, Pooling::Average).unwrap().0, 0.5);
        let half = array![[0.5, 0.5]];
        assert_eq!(overlap_score(half.view(), 0, Pooling::Max).unwrap().1, vec![0.5]);
        assert_eq!(overlap_score(eye.view(), 2, Pooling::Max).unwrap_err().code(), "INDEX");
    }

    #[test]
    fn multiple_encoding_examples() {
        let eye = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(multiple_encoding_score(eye.view(), 0, Pooling::Max).unwrap().0, 1.0);
        let dup = array![[1.0], [1.0]];
        let (pooled, dims) = multiple_encoding_score(dup.view(), 0, Pooling::Max).unwrap();
        assert_eq!(dims, vec![0.5, 0.5]);
        assert_eq!(pooled, 0.5);
        let zero = array![[0.0], [0.0]];
        assert_eq!(multiple_encoding_score(zero.view(), 0, Pooling::Max).unwrap().1, vec![0.5, 0.5]);
        assert_eq!(multiple_encoding_score(eye.view(), 9, Pooling::Max).unwrap_err().code(), "INDEX");
    }

    #[test]
    fn omes_of_ideal_matrix_is_one_for_any_alpha() {
        let s = AssociationMatrix::synthetic(Array2::eye(4), spec(4)).unwrap();
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let cfg = OmesConfig { alpha, ..Default::default() };
            assert_eq!(omes(&s, &cfg).unwrap().omes, 1.0);
        }
    }

    #[test]
    fn alpha_endpoints_select_one_score() {
        let s = AssociationMatrix::synthetic(array![[0.9, 0.2], [0.4, 0.6], [0.1, 0.3]], spec(2)).unwrap();
        let os = omes(&s, &OmesConfig { alpha: 1.0, ..Default::default() }).unwrap();
        let mes = omes(&s, &OmesConfig { alpha: 0.0, ..Default::default() }).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((os.omes - mean(&os.os_per_factor)).abs() < 1e-15);
        assert!((mes.omes - mean(&mes.mes_per_factor)).abs() < 1e-15);
    }

    #[test]
    fn blend_arithmetic() {
        assert!((blend(0.5, &[0.8, 0.8], &[0.6, 0.6]) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn prune_examples() {
        assert_eq!(prune_values(Array2::<f64>::eye(3).view()), vec![0, 1, 2]);
        assert_eq!(prune_values(array![[0.3], [0.9], [0.1]].view()), vec![1]);
        assert_eq!(prune_values(array![[0.5], [0.5]].view()), vec![0]);
    }

    #[test]
    fn pruning_reports_original_dimension_ids() {
        // dim 0 constant -> inactive; dim 1 encodes the only factor
        let a = cols(&[&[3.0, 3.0, 3.0, 3.0], &[1.0, 2.0, 3.0, 4.0]]);
        let b = cols(&[&[3.0, 3.0, 3.0, 3.0], &[2.0, 4.0, 1.0, 3.0]]);
        let p = PairedRepresentationSet::new(a, b, vec![0; 4], spec(1)).unwrap();
        let r = evaluate_pairs(&p, &OmesConfig::default()).unwrap();
        assert_eq!(r.pruning, Some(vec![1]));
        assert_eq!(r.association.as_ref().unwrap().active_dims, vec![1]);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn evaluate_pairs_matches_stages() {
        let a = cols(&[&[1.0, 2.0, 3.0, 4.0, 0.0, 2.0], &[0.5, 0.1, 0.9, 0.3, 0.7, 0.2]]);
        let b = cols(&[&[2.0, 1.0, 4.0, 3.0, 0.0, 2.0], &[0.5, 0.1, 0.9, 0.8, 0.1, 0.4]]);
        let p = PairedRepresentationSet::new(a, b, vec![0, 0, 0, 1, 1, 1], spec(2)).unwrap();
        let cfg = OmesConfig::default();
        let mask = filter_active_dims(p.r1(), p.r2(), cfg.active_threshold).unwrap();
        let s = association_matrix_with_mask(&p, mask, &cfg).unwrap();
        assert_eq!(evaluate_pairs(&p, &cfg).unwrap(), omes(&s, &cfg).unwrap());
    }
}
