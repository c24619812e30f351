//! Building single-factor intervention pairs from annotated rows.

use std::collections::HashMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::types::{LabeledRepresentationSet, PairedRepresentationSet, RepresentationMatrix};

/// Row indices `(i, l, k)` with `i < l` whose factor vectors differ exactly
/// in coordinate `k`, ordered by `(k, i, l)`.
pub fn matching_rows(labels: ndarray::ArrayView2<'_, usize>) -> Vec<(usize, usize, usize)> {
    let (rows, n) = labels.dim();
    let mut out = Vec::new();
    for k in 0..n {
        let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for i in 0..rows {
            let key: Vec<usize> = (0..n).filter(|&c| c != k).map(|c| labels[[i, c]]).collect();
            groups.entry(key).or_default().push(i);
        }
        let mut found = Vec::new();
        for members in groups.values() {
            for (a, &i) in members.iter().enumerate() {
                for &l in &members[a + 1..] {
                    if labels[[i, k]] != labels[[l, k]] {
                        found.push((i, l, k));
                    }
                }
            }
        }
        found.sort_unstable();
        out.extend(found);
    }
    out
}

/// Every pair of rows whose factor vectors differ in exactly one factor.
pub fn pair_labeled(labeled: &LabeledRepresentationSet) -> Result<PairedRepresentationSet> {
    let matches = matching_rows(labeled.labels());
    if matches.is_empty() {
        return Err(Error::NoPairs);
    }
    let reps = labeled.reps().view();
    let d = reps.ncols();
    let mut r1 = Array2::zeros((matches.len(), d));
    let mut r2 = Array2::zeros((matches.len(), d));
    let mut k = Vec::with_capacity(matches.len());
    for (row, &(i, l, j)) in matches.iter().enumerate() {
        r1.row_mut(row).assign(&reps.row(i));
        r2.row_mut(row).assign(&reps.row(l));
        k.push(j);
    }
    PairedRepresentationSet::new(
        RepresentationMatrix::new(r1)?,
        RepresentationMatrix::new(r2)?,
        k,
        labeled.spec().clone(),
    )
}
