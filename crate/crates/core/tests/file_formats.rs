//! Interchange files written by hand (as a foreign exporter would) and by the
//! library itself.

use std::fs;
use std::path::Path;

use omes::ingest::{
    self, read_factor_spec, read_labeled, read_pairs, read_report, validate_file, write_labeled, write_pairs,
    write_report, DatasetBundle, FileKind, ReportFormat,
};
use omes::pairing::pair_labeled;
use omes::synth::{make_labeled, make_pairs, EncoderSpec};
use omes::{evaluate_pairs, FactorSpec, OmesConfig};

fn put(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

/// Ten labeled rows with two factors, in the shape an external script emits:
/// mixed float spellings, CRLF-free, trailing newline.
const FOREIGN_LABELED: &str = "\
dim_0,dim_1,dim_2,f_shape,f_scale
0.0,0.10000000000000001,-1.5,0,0
0.5,0.2,1e-3,1,0
1,0.30000000000000004,2.25,2,0
0.0,0.9,-0.75,0,1
0.5,0.8,0.5,1,1
1.0,0.7,3.5E+00,2,1
0,0.45,0.125,0,0
0.5,0.55,-2,1,1
1,0.65,0.0625,2,0
0.0,0.35,1.75,0,1
";

const FOREIGN_SPEC: &str = r#"{
  "factors": [
    {"name": "shape", "cardinality": 3},
    {"name": "scale", "cardinality": 2}
  ],
  "latent_dim": 3
}
"#;

#[test]
fn foreign_files_pass_validation() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = put(dir.path(), "spec.json", FOREIGN_SPEC);
    let labeled_path = put(dir.path(), "labeled.csv", FOREIGN_LABELED);

    let spec_summary = validate_file(&spec_path, None).unwrap();
    assert_eq!(spec_summary.kind, FileKind::FactorSpec);
    assert_eq!(spec_summary.factors, Some(2));

    let spec = read_factor_spec(&spec_path).unwrap();
    let summary = validate_file(&labeled_path, Some(&spec)).unwrap();
    assert_eq!((summary.kind, summary.rows, summary.latent_dim), (FileKind::Labeled, Some(10), Some(3)));

    let labeled = read_labeled(&labeled_path, &spec).unwrap();
    assert_eq!(labeled.reps().view()[[1, 2]], 1e-3);
    assert_eq!(labeled.reps().view()[[5, 2]], 3.5);
}

#[test]
fn foreign_pairs_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = put(dir.path(), "spec.json", FOREIGN_SPEC);
    let labeled_path = put(dir.path(), "labeled.csv", FOREIGN_LABELED);
    let spec = read_factor_spec(&spec_path).unwrap();
    let labeled = read_labeled(&labeled_path, &spec).unwrap();

    let pairs = pair_labeled(&labeled).unwrap();
    let pairs_path = dir.path().join("pairs.csv");
    write_pairs(&pairs_path, &pairs).unwrap();
    assert_eq!(validate_file(&pairs_path, Some(&spec)).unwrap().kind, FileKind::Pairs);

    let back = read_pairs(&pairs_path, &spec).unwrap();
    assert_eq!(back, pairs);
    let config = OmesConfig { min_pairs_per_factor: 2, ..OmesConfig::default() };
    let direct = evaluate_pairs(&pairs, &config).unwrap();
    let from_file = evaluate_pairs(&back, &config).unwrap();
    assert_eq!(direct, from_file);
}

#[test]
fn hand_written_pairs_file_is_read() {
    let spec = FactorSpec::from_pairs(&[("a", 2), ("b", 2)]).unwrap();
    let text = "a_dim_0,a_dim_1,b_dim_0,b_dim_1,k\n0,0,1,0,0\n1,1,0,1,0\n0,1,0,0,1\n1,0,1,1,1\n";
    let p = ingest::parse_pairs(text, &spec, Default::default()).unwrap().value;
    assert_eq!(p.len(), 4);
    assert_eq!(p.k(), &[0, 0, 1, 1]);
}

#[test]
fn simulated_files_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FactorSpec::from_pairs(&[("x", 5), ("y", 7), ("z", 3)]).unwrap();
    let enc = EncoderSpec::noisy(0.3, 4).with_extra_dims(2);
    let pairs = make_pairs(&spec, &enc, 500, 1, None).unwrap();
    let labeled = make_labeled(&spec, &enc, 300, 2).unwrap();

    let spec_path = dir.path().join("spec.json");
    ingest::write_factor_spec(&spec_path, pairs.spec()).unwrap();
    let pairs_path = dir.path().join("pairs.csv");
    write_pairs(&pairs_path, &pairs).unwrap();
    let labeled_path = dir.path().join("labeled.csv");
    write_labeled(&labeled_path, &labeled).unwrap();

    let bundle = DatasetBundle { spec_path, reps_path: Some(labeled_path), pairs_path: Some(pairs_path) };
    let loaded = bundle.load().unwrap();
    assert_eq!(loaded.spec.latent_dim(), Some(5));
    assert_eq!(loaded.pairs.unwrap(), pairs);
    assert_eq!(loaded.labeled.unwrap(), labeled);

    // Nothing but the three outputs is left behind by the atomic writes.
    let mut names: Vec<String> =
        fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["labeled.csv", "pairs.csv", "spec.json"]);
}

#[test]
fn bundle_needs_a_data_file() {
    let bundle = DatasetBundle { spec_path: "spec.json".into(), reps_path: None, pairs_path: None };
    assert_eq!(bundle.load().unwrap_err().code(), "INVALID");
}

#[test]
fn report_round_trips_through_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FactorSpec::from_pairs(&[("x", 5), ("y", 7)]).unwrap();
    let pairs = make_pairs(&spec, &EncoderSpec::noisy(0.2, 1), 400, 3, None).unwrap();
    let report = evaluate_pairs(&pairs, &OmesConfig::default()).unwrap();

    let json_path = dir.path().join("report.json");
    write_report(&report, &json_path, ReportFormat::Json).unwrap();
    let back = read_report(&json_path).unwrap();
    let (a, b) = (report.association.as_ref().unwrap(), back.association.as_ref().unwrap());
    for (x, y) in a.matrix.iter().flatten().zip(b.matrix.iter().flatten()) {
        assert!((x - y).abs() <= 1e-12);
    }
    assert_eq!(back, report);
    assert_eq!(validate_file(&json_path, None).unwrap().kind, FileKind::Report);

    let csv_path = dir.path().join("report.csv");
    write_report(&report, &csv_path, ReportFormat::Csv).unwrap();
    let csv = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "factor,os,mes,pruned_dim");
    assert!(lines[1].starts_with("x,"));
}

#[test]
fn perfect_report_prints_integer_one() {
    let spec = FactorSpec::from_pairs(&[("a", 2), ("b", 2)]).unwrap();
    let s = omes::AssociationMatrix::synthetic(ndarray::Array2::eye(2), spec).unwrap();
    let report = omes::omes(&s, &OmesConfig::default()).unwrap();
    let json = ingest::to_json_string(&report);
    assert!(json.contains("\"omes\": 1,"), "{json}");
    assert!(json.contains("\"os_per_factor\": [\n    1,\n    1\n  ]"), "{json}");
}

#[test]
fn bad_files_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FactorSpec::from_pairs(&[("a", 2)]).unwrap();
    let path = put(dir.path(), "pairs.csv", "a_dim_0,b_dim_0,k\n1,2,0\n3,NaN,0\n");
    let err = read_pairs(&path, &spec).unwrap_err();
    assert_eq!(err.code(), "MALFORMED");
    let msg = err.to_string();
    assert!(msg.contains("line 3") && msg.contains("pairs.csv"), "{msg}");

    let missing = read_pairs(&dir.path().join("absent.csv"), &spec).unwrap_err();
    assert_eq!(missing.code(), "IO_FAILURE");
}
