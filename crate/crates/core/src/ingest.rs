//! Interchange files: factor-spec JSON, pairs and labeled CSV, reports.
//!
//! CSV files are UTF-8, comma-separated, LF-terminated, with a header row.
//! Pairs: `a_dim_0..a_dim_{d-1},b_dim_0..b_dim_{d-1},k`.
//! Labeled: `dim_0..dim_{d-1},f_<name>...` with factor columns in spec order.
//! Numbers are written with 17 significant digits so every f64 round-trips.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::types::{
    Factor, FactorSpec, LabeledRepresentationSet, MetricReport, PairedRepresentationSet, RepresentationMatrix,
};

/// Render `x` like C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty JSON whose floats use [`format_g17`].
struct G17Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for G17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize any value as pretty JSON with 17-significant-digit floats.
pub fn to_json_string<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Write `contents` to a sibling temp file, then rename over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name =
        path.file_name().ok_or_else(|| io_err(io::Error::new(io::ErrorKind::InvalidInput, "not a file path")))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

// ---------------------------------------------------------------------------
// Factor spec

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    factors: Vec<RawFactor>,
    #[serde(default)]
    latent_dim: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactor {
    name: String,
    cardinality: usize,
}

pub fn parse_factor_spec(text: &str) -> Result<FactorSpec> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::Malformed {
        path: None,
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    if raw.factors.is_empty() {
        return Err(Error::malformed("factors: at least one factor required"));
    }
    let mut seen = std::collections::HashSet::new();
    for (j, f) in raw.factors.iter().enumerate() {
        if f.name.is_empty() {
            return Err(Error::malformed(format!("factors[{j}].name: empty name")));
        }
        if f.cardinality < 2 {
            return Err(Error::malformed(format!("factors[{j}].cardinality: cardinality < 2 (got {})", f.cardinality)));
        }
        if !seen.insert(f.name.as_str()) {
            return Err(Error::DuplicateName(f.name.clone()));
        }
    }
    if raw.latent_dim == Some(0) {
        return Err(Error::malformed("latent_dim: must be >= 1"));
    }
    let spec = FactorSpec::new(raw.factors.into_iter().map(|f| Factor::new(f.name, f.cardinality)).collect())?;
    match raw.latent_dim {
        Some(d) => spec.with_latent_dim(d),
        None => Ok(spec),
    }
}

pub fn read_factor_spec(path: &Path) -> Result<FactorSpec> {
    parse_factor_spec(&read_text(path)?).map_err(|e| e.at_path(path))
}

pub fn write_factor_spec(path: &Path, spec: &FactorSpec) -> Result<()> {
    write_atomic(path, to_json_string(spec).as_bytes())
}

// ---------------------------------------------------------------------------
// CSV readers

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Drop rows that fail to parse instead of aborting.
    pub skip_bad_rows: bool,
}

/// A data row dropped under [`ReadOptions::skip_bad_rows`].
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub skipped: Vec<SkippedRow>,
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes())
}

fn header_of(reader: &mut csv::Reader<&[u8]>) -> Result<Vec<String>> {
    let header =
        reader.headers().map_err(|e| Error::Malformed { path: None, line: Some(1), message: e.to_string() })?;
    let cols: Vec<String> = header.iter().map(|c| c.trim().to_string()).collect();
    if cols.iter().all(|c| c.is_empty()) {
        return Err(Error::Malformed { path: None, line: Some(1), message: "missing header row".into() });
    }
    Ok(cols)
}

/// Count of leading columns named `{prefix}0, {prefix}1, ...`.
fn indexed_run(cols: &[String], prefix: &str) -> usize {
    cols.iter().enumerate().take_while(|(i, c)| c.strip_prefix(prefix) == Some(i.to_string().as_str())).count()
}

enum RowError {
    Malformed(String),
    Range(String),
}

fn parse_real(field: &str, column: &str) -> std::result::Result<f64, RowError> {
    let v: f64 =
        field.trim().parse().map_err(|_| RowError::Malformed(format!("column {column}: {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(RowError::Malformed(format!("column {column}: non-finite value {field:?}")));
    }
    Ok(v)
}

fn parse_index(field: &str, column: &str, bound: Option<usize>) -> std::result::Result<usize, RowError> {
    let v: usize = field
        .trim()
        .parse()
        .map_err(|_| RowError::Malformed(format!("column {column}: {field:?} is not a non-negative integer")))?;
    match bound {
        Some(b) if v >= b => Err(RowError::Range(format!("column {column}: {v} out of range [0, {b})"))),
        _ => Ok(v),
    }
}

/// Iterate data rows, parsing each with `parse` and handling failures per
/// `opts`. Returns the skipped rows.
fn for_each_row<F>(
    reader: &mut csv::Reader<&[u8]>,
    width: usize,
    opts: ReadOptions,
    mut parse: F,
) -> Result<Vec<SkippedRow>>
where
    F: FnMut(&csv::StringRecord) -> std::result::Result<(), RowError>,
{
    let mut skipped = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line() as usize;
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line() as usize);
                return Err(Error::Malformed { path: None, line: Some(line), message: e.to_string() });
            }
        }
        let line = record.position().map_or(line, |p| p.line() as usize);
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        let outcome = if record.len() != width {
            Err(RowError::Malformed(format!("expected {width} fields, found {}", record.len())))
        } else {
            parse(&record)
        };
        match outcome {
            Ok(()) => {}
            Err(RowError::Malformed(message)) if opts.skip_bad_rows => {
                skipped.push(SkippedRow { line, reason: message })
            }
            Err(RowError::Range(message)) if opts.skip_bad_rows => skipped.push(SkippedRow { line, reason: message }),
            Err(RowError::Malformed(message)) => {
                return Err(Error::Malformed { path: None, line: Some(line), message })
            }
            Err(RowError::Range(message)) => return Err(Error::Range { path: None, line: Some(line), message }),
        }
    }
    Ok(skipped)
}

fn no_rows() -> Error {
    Error::malformed("no data rows")
}

/// Raw pairs table: both sides and `k`, with `k` bounded by `n` if given.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPairs {
    pub r1: Array2<f64>,
    pub r2: Array2<f64>,
    pub k: Vec<usize>,
}

pub fn parse_pairs_raw(
    text: &str,
    n: Option<usize>,
    latent_dim: Option<usize>,
    opts: ReadOptions,
) -> Result<Loaded<RawPairs>> {
    let mut reader = csv_reader(text);
    let cols = header_of(&mut reader)?;
    let da = indexed_run(&cols, "a_dim_");
    let db = indexed_run(&cols[da..], "b_dim_");
    let rest = &cols[da + db..];
    if rest.len() == 1 && rest[0] == "k" && da != db {
        return Err(Error::DimMismatch(format!("{da} a_dim columns but {db} b_dim columns")));
    }
    if da == 0 || db == 0 || rest != ["k"] {
        return Err(Error::Malformed {
            path: None,
            line: Some(1),
            message: "header must be a_dim_0..a_dim_{d-1},b_dim_0..b_dim_{d-1},k".into(),
        });
    }
    let d = da;
    if let Some(expected) = latent_dim {
        if expected != d {
            return Err(Error::DimMismatch(format!("header has d = {d}, spec declares latent_dim = {expected}")));
        }
    }
    let (mut a, mut b, mut k) = (Vec::new(), Vec::new(), Vec::new());
    let skipped = for_each_row(&mut reader, 2 * d + 1, opts, |rec| {
        let mut row = Vec::with_capacity(2 * d);
        for (i, field) in rec.iter().take(2 * d).enumerate() {
            row.push(parse_real(field, &cols[i])?);
        }
        let kk = parse_index(&rec[2 * d], "k", n)?;
        a.extend_from_slice(&row[..d]);
        b.extend_from_slice(&row[d..]);
        k.push(kk);
        Ok(())
    })?;
    if k.is_empty() {
        return Err(no_rows());
    }
    let rows = k.len();
    let shape = |v| Array2::from_shape_vec((rows, d), v).expect("row-major buffer");
    Ok(Loaded { value: RawPairs { r1: shape(a), r2: shape(b), k }, skipped })
}

pub fn parse_pairs(text: &str, spec: &FactorSpec, opts: ReadOptions) -> Result<Loaded<PairedRepresentationSet>> {
    let raw = parse_pairs_raw(text, Some(spec.n()), spec.latent_dim(), opts)?;
    let RawPairs { r1, r2, k } = raw.value;
    let set =
        PairedRepresentationSet::new(RepresentationMatrix::new(r1)?, RepresentationMatrix::new(r2)?, k, spec.clone())?;
    Ok(Loaded { value: set, skipped: raw.skipped })
}

pub fn read_pairs(path: &Path, spec: &FactorSpec) -> Result<PairedRepresentationSet> {
    Ok(read_pairs_with(path, spec, ReadOptions::default())?.value)
}

pub fn read_pairs_with(path: &Path, spec: &FactorSpec, opts: ReadOptions) -> Result<Loaded<PairedRepresentationSet>> {
    parse_pairs(&read_text(path)?, spec, opts).map_err(|e| e.at_path(path))
}

/// Raw labeled table with the factor column names as found in the header.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLabeled {
    pub reps: Array2<f64>,
    pub labels: Array2<usize>,
    pub factor_names: Vec<String>,
}

/// Parse a labeled CSV. With a spec, factor columns must be exactly
/// `f_<name>` in spec order and labels are range-checked.
pub fn parse_labeled_raw(text: &str, spec: Option<&FactorSpec>, opts: ReadOptions) -> Result<Loaded<RawLabeled>> {
    let mut reader = csv_reader(text);
    let cols = header_of(&mut reader)?;
    let d = indexed_run(&cols, "dim_");
    if d == 0 {
        return Err(Error::Malformed { path: None, line: Some(1), message: "header must start with dim_0".into() });
    }
    if let Some(expected) = spec.and_then(|s| s.latent_dim()) {
        if expected != d {
            return Err(Error::DimMismatch(format!("header has d = {d}, spec declares latent_dim = {expected}")));
        }
    }
    let factor_cols = &cols[d..];
    let bad_header = |message: String| Error::Malformed { path: None, line: Some(1), message };
    let factor_names: Vec<String> = factor_cols
        .iter()
        .map(|c| {
            c.strip_prefix("f_")
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .ok_or_else(|| bad_header(format!("unexpected column {c:?}")))
        })
        .collect::<Result<_>>()?;
    let bounds: Vec<Option<usize>> = match spec {
        Some(spec) => {
            for name in spec.names() {
                if !factor_names.contains(&name) {
                    return Err(Error::MissingFactorColumn(format!("f_{name}")));
                }
            }
            if factor_names != spec.names() {
                return Err(bad_header(format!(
                    "factor columns must be {:?} in spec order",
                    spec.names().iter().map(|n| format!("f_{n}")).collect::<Vec<_>>()
                )));
            }
            spec.cardinalities().into_iter().map(Some).collect()
        }
        None => vec![None; factor_names.len()],
    };
    if factor_names.is_empty() {
        return Err(bad_header("no factor columns".into()));
    }
    let n = factor_names.len();
    let (mut reps, mut labels) = (Vec::new(), Vec::new());
    let skipped = for_each_row(&mut reader, d + n, opts, |rec| {
        let mut row = Vec::with_capacity(d);
        for (i, field) in rec.iter().take(d).enumerate() {
            row.push(parse_real(field, &cols[i])?);
        }
        let mut lab = Vec::with_capacity(n);
        for j in 0..n {
            lab.push(parse_index(&rec[d + j], &cols[d + j], bounds[j])?);
        }
        reps.extend(row);
        labels.extend(lab);
        Ok(())
    })?;
    let rows = labels.len() / n;
    if rows == 0 {
        return Err(no_rows());
    }
    Ok(Loaded {
        value: RawLabeled {
            reps: Array2::from_shape_vec((rows, d), reps).expect("row-major buffer"),
            labels: Array2::from_shape_vec((rows, n), labels).expect("row-major buffer"),
            factor_names,
        },
        skipped,
    })
}

pub fn parse_labeled(text: &str, spec: &FactorSpec, opts: ReadOptions) -> Result<Loaded<LabeledRepresentationSet>> {
    let raw = parse_labeled_raw(text, Some(spec), opts)?;
    let RawLabeled { reps, labels, .. } = raw.value;
    Ok(Loaded {
        value: LabeledRepresentationSet::new(RepresentationMatrix::new(reps)?, labels, spec.clone())?,
        skipped: raw.skipped,
    })
}

pub fn read_labeled(path: &Path, spec: &FactorSpec) -> Result<LabeledRepresentationSet> {
    Ok(read_labeled_with(path, spec, ReadOptions::default())?.value)
}

pub fn read_labeled_with(
    path: &Path,
    spec: &FactorSpec,
    opts: ReadOptions,
) -> Result<Loaded<LabeledRepresentationSet>> {
    parse_labeled(&read_text(path)?, spec, opts).map_err(|e| e.at_path(path))
}

// ---------------------------------------------------------------------------
// CSV writers

fn push_row<I: IntoIterator<Item = String>>(out: &mut String, fields: I) {
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        out.push_str(&f);
        first = false;
    }
    out.push('\n');
}

pub fn pairs_to_csv(pairs: &PairedRepresentationSet) -> String {
    let d = pairs.dim();
    let mut out = String::new();
    push_row(
        &mut out,
        (0..d)
            .map(|h| format!("a_dim_{h}"))
            .chain((0..d).map(|h| format!("b_dim_{h}")))
            .chain(std::iter::once("k".to_string())),
    );
    let (r1, r2) = (pairs.r1().view(), pairs.r2().view());
    for (i, &k) in pairs.k().iter().enumerate() {
        push_row(
            &mut out,
            r1.row(i).iter().chain(r2.row(i).iter()).map(|&v| format_g17(v)).chain(std::iter::once(k.to_string())),
        );
    }
    out
}

pub fn write_pairs(path: &Path, pairs: &PairedRepresentationSet) -> Result<()> {
    write_atomic(path, pairs_to_csv(pairs).as_bytes())
}

pub fn labeled_to_csv(labeled: &LabeledRepresentationSet) -> String {
    let d = labeled.reps().dim();
    let mut out = String::new();
    push_row(
        &mut out,
        (0..d).map(|h| format!("dim_{h}")).chain(labeled.spec().names().into_iter().map(|n| format!("f_{n}"))),
    );
    let reps = labeled.reps().view();
    let labels = labeled.labels();
    for i in 0..labeled.len() {
        push_row(
            &mut out,
            reps.row(i).iter().map(|&v| format_g17(v)).chain(labels.row(i).iter().map(|l| l.to_string())),
        );
    }
    out
}

pub fn write_labeled(path: &Path, labeled: &LabeledRepresentationSet) -> Result<()> {
    write_atomic(path, labeled_to_csv(labeled).as_bytes())
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected json or csv)")),
        }
    }
}

/// One row per factor: `factor,os,mes,pruned_dim`.
pub fn report_to_csv(report: &MetricReport) -> String {
    let mut out = String::from("factor,os,mes,pruned_dim\n");
    for j in 0..report.n() {
        let name = report.factor_names.get(j).cloned().unwrap_or_else(|| j.to_string());
        let pruned = report.pruning.as_ref().and_then(|p| p.get(j)).map(|h| h.to_string()).unwrap_or_default();
        push_row(&mut out, [name, format_g17(report.os_per_factor[j]), format_g17(report.mes_per_factor[j]), pruned]);
    }
    out
}

pub fn render_report(report: &MetricReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_json_string(report),
        ReportFormat::Csv => report_to_csv(report),
    }
}

pub fn write_report(report: &MetricReport, path: &Path, format: ReportFormat) -> Result<()> {
    write_atomic(path, render_report(report, format).as_bytes())
}

pub fn parse_report(text: &str) -> Result<MetricReport> {
    serde_json::from_str(text).map_err(|e| Error::Malformed {
        path: None,
        line: Some(e.line()),
        message: e.to_string(),
    })
}

pub fn read_report(path: &Path) -> Result<MetricReport> {
    parse_report(&read_text(path)?).map_err(|e| e.at_path(path))
}

// ---------------------------------------------------------------------------
// Bundles and schema checks

/// A factor spec plus the data files that go with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetBundle {
    pub spec_path: PathBuf,
    pub reps_path: Option<PathBuf>,
    pub pairs_path: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub spec: FactorSpec,
    pub labeled: Option<LabeledRepresentationSet>,
    pub pairs: Option<PairedRepresentationSet>,
}

impl DatasetBundle {
    pub fn load(&self) -> Result<LoadedBundle> {
        if self.reps_path.is_none() && self.pairs_path.is_none() {
            return Err(Error::Invalid(vec![crate::types::ValidationIssue::new(
                "bundle",
                "at least one of reps_path / pairs_path required",
            )]));
        }
        let spec = read_factor_spec(&self.spec_path)?;
        let labeled = self.reps_path.as_deref().map(|p| read_labeled(p, &spec)).transpose()?;
        let pairs = self.pairs_path.as_deref().map(|p| read_pairs(p, &spec)).transpose()?;
        Ok(LoadedBundle { spec, labeled, pairs })
    }
}

/// What kind of interchange file a path holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    FactorSpec,
    Report,
    Pairs,
    Labeled,
}

impl FileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FileKind::FactorSpec => "factor_spec",
            FileKind::Report => "report",
            FileKind::Pairs => "pairs",
            FileKind::Labeled => "labeled",
        }
    }
}

/// Summary of a file that passed [`validate_file`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSummary {
    pub kind: FileKind,
    pub rows: Option<usize>,
    pub latent_dim: Option<usize>,
    pub factors: Option<usize>,
}

/// Detect the file kind from its content and check it against the schema,
/// and against `spec` when one is given.
pub fn validate_file(path: &Path, spec: Option<&FactorSpec>) -> Result<FileSummary> {
    let text = read_text(path)?;
    validate_text(&text, spec).map_err(|e| e.at_path(path))
}

pub fn validate_text(text: &str, spec: Option<&FactorSpec>) -> Result<FileSummary> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Malformed {
            path: None,
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        if value.get("factors").is_some() {
            let s = parse_factor_spec(text)?;
            return Ok(FileSummary {
                kind: FileKind::FactorSpec,
                rows: None,
                latent_dim: s.latent_dim(),
                factors: Some(s.n()),
            });
        }
        let report = parse_report(text)?;
        crate::types::Validate::validate(&report)?;
        return Ok(FileSummary { kind: FileKind::Report, rows: None, latent_dim: None, factors: Some(report.n()) });
    }
    let first = trimmed.lines().next().unwrap_or("");
    if first.starts_with("a_dim_") {
        let (rows, d) = match spec {
            Some(s) => {
                let p = parse_pairs(text, s, ReadOptions::default())?.value;
                (p.len(), p.dim())
            }
            None => {
                let p = parse_pairs_raw(text, None, None, ReadOptions::default())?.value;
                (p.k.len(), p.r1.ncols())
            }
        };
        return Ok(FileSummary {
            kind: FileKind::Pairs,
            rows: Some(rows),
            latent_dim: Some(d),
            factors: spec.map(FactorSpec::n),
        });
    }
    if first.starts_with("dim_") {
        let (rows, d, n) = match spec {
            Some(s) => {
                let l = parse_labeled(text, s, ReadOptions::default())?.value;
                (l.len(), l.reps().dim(), s.n())
            }
            None => {
                let l = parse_labeled_raw(text, None, ReadOptions::default())?.value;
                (l.labels.nrows(), l.reps.ncols(), l.labels.ncols())
            }
        };
        return Ok(FileSummary { kind: FileKind::Labeled, rows: Some(rows), latent_dim: Some(d), factors: Some(n) });
    }
    Err(Error::Malformed {
        path: None,
        line: Some(1),
        message: "not a recognized interchange file (factor spec, report, pairs or labeled CSV)".into(),
    })
}
