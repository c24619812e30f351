//! End-to-end model evaluation on synthetic encoders.

use ndarray::Axis;
use omes::baselines::{evaluate_baselines, mi_matrix, BaselineConfig};
use omes::harness::{evaluate_model, ClassifierConfig, EvalConfig};
use omes::synth::{make_labeled, make_pairs, profile, EncoderKind, EncoderSpec};
use omes::{evaluate_pairs, DciSource, FactorSpec, LabeledRepresentationSet, OmesConfig, RepresentationMatrix};

fn with_classifier() -> EvalConfig {
    EvalConfig { classifier: Some(ClassifierConfig::default()), ..EvalConfig::default() }
}

#[test]
fn ideal_model_scores_high_everywhere() {
    let spec = profile("shapes3d").unwrap();
    let enc = EncoderSpec::ideal(1);
    let pairs = make_pairs(&spec, &enc, 6000, 2, None).unwrap();
    let labeled = make_labeled(&spec, &enc, 15_000, 3).unwrap();
    let r = evaluate_model(&pairs, Some(&labeled), &with_classifier()).unwrap();
    assert!(r.omes >= 0.95, "omes {}", r.omes);
    let b = r.baselines.as_ref().unwrap();
    for (name, v) in [("mig", b.mig), ("modularity", b.modularity), ("dci", b.dci)] {
        assert!(v.unwrap() >= 0.95, "{name} {v:?}");
    }
    let acc = r.accuracies.as_ref().unwrap();
    for j in 0..spec.n() {
        assert!(acc.full[j] >= 0.99, "full {j}: {}", acc.full[j]);
        assert!(acc.pruned[j] >= acc.full[j] - 0.02, "pruned {j}: {}", acc.pruned[j]);
    }
    assert_eq!(r.pruning.as_deref(), Some(&[0, 1, 2, 3, 4, 5][..]));
}

#[test]
fn heavy_noise_pulls_omes_far_below_ideal() {
    let spec = profile("shapes3d").unwrap();
    let ideal =
        evaluate_pairs(&make_pairs(&spec, &EncoderSpec::ideal(1), 6000, 2, None).unwrap(), &OmesConfig::default())
            .unwrap();
    let noisy = make_pairs(&spec, &EncoderSpec::noisy(5.0, 1), 6000, 2, None).unwrap();
    let noisy = evaluate_pairs(&noisy, &OmesConfig::default()).unwrap();
    assert!(ideal.omes - noisy.omes >= 0.2, "{} vs {}", ideal.omes, noisy.omes);
}

/// Ideal diagonal entry under "redraw among the other K-1 values" pairing.
#[test]
fn ideal_diagonal_follows_cardinality() {
    let spec = FactorSpec::from_pairs(&[("a", 3), ("b", 10), ("c", 25)]).unwrap();
    let pairs = make_pairs(&spec, &EncoderSpec::ideal(0), 30_000, 5, None).unwrap();
    let s = omes::association_matrix(&pairs, &OmesConfig::default()).unwrap();
    for (j, k) in [3.0, 10.0, 25.0].into_iter().enumerate() {
        let expected = 1.0 - 1.0 / (k - 1.0);
        assert!((s.get(j, j) - expected).abs() < 0.03, "{j}: {} vs {expected}", s.get(j, j));
        for h in 0..3 {
            if h != j {
                assert_eq!(s.get(h, j), 0.0);
            }
        }
    }
}

fn separation(kind: EncoderKind) -> (omes::MetricReport, omes::MetricReport) {
    let spec = profile("shapes3d").unwrap();
    let ideal = make_pairs(&spec, &EncoderSpec::ideal(0), 10_000, 11, None).unwrap();
    let other = make_pairs(&spec, &EncoderSpec::new(kind, 0), 10_000, 11, None).unwrap();
    let cfg = OmesConfig::default();
    (evaluate_pairs(&ideal, &cfg).unwrap(), evaluate_pairs(&other, &cfg).unwrap())
}

#[test]
fn overlap_lowers_overlap_score_of_shared_factors() {
    let (ideal, overlap) = separation(EncoderKind::Overlap);
    for j in 0..2 {
        assert!(ideal.os_per_factor[j] - overlap.os_per_factor[j] >= 0.1);
    }
    for j in 2..6 {
        assert!((ideal.os_per_factor[j] - overlap.os_per_factor[j]).abs() < 0.05);
    }
}

#[test]
fn duplicate_lowers_multiple_encoding_score_only() {
    let (ideal, dup) = separation(EncoderKind::Duplicate);
    assert!(ideal.mes_per_factor[0] - dup.mes_per_factor[0] >= 0.1);
    assert!((ideal.os_per_factor[0] - dup.os_per_factor[0]).abs() <= 0.05);
}

#[test]
fn mi_is_stable_under_monotone_transforms() {
    let spec = FactorSpec::from_pairs(&[("a", 5), ("b", 8)]).unwrap();
    let l = make_labeled(&spec, &EncoderSpec::noisy(0.15, 2), 10_000, 4).unwrap();
    let warped = l.reps().as_array().mapv(|v| (2.0 * v).exp() + v);
    let w = LabeledRepresentationSet::new(
        RepresentationMatrix::new(warped).unwrap(),
        l.labels().to_owned(),
        l.spec().clone(),
    )
    .unwrap();
    let (a, b) = (mi_matrix(&l, 20).unwrap(), mi_matrix(&w, 20).unwrap());
    for (x, y) in a.mi.iter().zip(b.mi.iter()) {
        assert!((x - y).abs() < 0.05, "{x} vs {y}");
    }
}

#[test]
fn baselines_ignore_dimension_order() {
    let spec = FactorSpec::from_pairs(&[("a", 4), ("b", 6), ("c", 3)]).unwrap();
    let l = make_labeled(&spec, &EncoderSpec::noisy(0.1, 7).with_extra_dims(1), 3000, 4).unwrap();
    let perm = [3, 1, 0, 2];
    let p = LabeledRepresentationSet::new(
        RepresentationMatrix::new(l.reps().view().select(Axis(1), &perm)).unwrap(),
        l.labels().to_owned(),
        l.spec().clone(),
    )
    .unwrap();
    let cfg = BaselineConfig { dci_source: DciSource::Mi, ..BaselineConfig::default() };
    let (a, b) = (evaluate_baselines(&l, &cfg), evaluate_baselines(&p, &cfg));
    assert!((a.mig.unwrap() - b.mig.unwrap()).abs() < 1e-12);
    assert!((a.modularity.unwrap() - b.modularity.unwrap()).abs() < 1e-12);
    assert!((a.dci.unwrap() - b.dci.unwrap()).abs() < 1e-12);
}

#[test]
fn mixing_breaks_pruned_classification() {
    let spec = FactorSpec::from_pairs(&[("a", 6), ("b", 8), ("c", 5)]).unwrap();
    let enc = EncoderSpec::new(EncoderKind::Mixing, 3);
    let pairs = make_pairs(&spec, &enc, 3000, 1, None).unwrap();
    let labeled = make_labeled(&spec, &enc, 6000, 2).unwrap();
    let r = evaluate_model(&pairs, Some(&labeled), &with_classifier()).unwrap();
    let acc = r.accuracies.unwrap();
    let worst = (0..3).map(|j| acc.full[j] - acc.pruned[j]).fold(f64::NEG_INFINITY, f64::max);
    assert!(worst >= 0.1, "{acc:?}");
}
