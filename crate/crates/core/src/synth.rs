//! Seeded generators: factor samples, synthetic encoders, single-factor
//! intervention pairs and perturbed association matrices.
//!
//! Every generator is a pure function of its arguments. Randomness comes from
//! [`crate::rng::Stream`] substreams named after the quantity they produce, so
//! adding a draw in one place never shifts the draws of another.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::types::{
    AssociationMatrix, Factor, FactorSpec, LabeledRepresentationSet, PairedRepresentationSet, RepresentationMatrix,
};

/// Built-in factor layouts.
pub fn profile(name: &str) -> Result<FactorSpec> {
    let factors: &[(&str, usize)] = match name {
        "shapes3d" => {
            &[("floor_hue", 10), ("wall_hue", 10), ("object_hue", 10), ("scale", 8), ("shape", 4), ("orientation", 15)]
        }
        "dsprites" => &[("shape", 3), ("scale", 6), ("orientation", 40), ("pos_x", 32), ("pos_y", 32)],
        other => {
            return Err(Error::Invalid(vec![crate::types::ValidationIssue::new(
                "profile",
                format!("unknown profile {other:?} (expected shapes3d or dsprites)"),
            )]))
        }
    };
    FactorSpec::new(factors.iter().map(|(n, c)| Factor::new(*n, *c)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    /// Dimension `h` is factor `h` scaled to [0, 1].
    Ideal,
    /// Factors 0 and 1 share dimension 0; the others follow one per dimension.
    Overlap,
    /// Factor 0 is written to dimensions 0 and 1; the others follow.
    Duplicate,
    /// Linear mix `M * f` of the normalized factor vector.
    Mixing,
    /// Ideal code plus Gaussian noise.
    Noisy,
}

impl std::str::FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" => Ok(Self::Ideal),
            "overlap" => Ok(Self::Overlap),
            "duplicate" => Ok(Self::Duplicate),
            "mixing" => Ok(Self::Mixing),
            "noisy" => Ok(Self::Noisy),
            other => Err(format!("unknown encoder {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    /// Rows = output dims, columns = factors. `None` with `Mixing` draws a
    /// dense random orthogonal n×n matrix from `seed`.
    #[serde(default)]
    pub mixing: Option<Vec<Vec<f64>>>,
    /// Std of Gaussian noise added to every encoded dimension.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Standard-normal dimensions appended after the encoded ones.
    #[serde(default)]
    pub extra_noise_dims: usize,
    #[serde(default)]
    pub seed: u64,
}

impl EncoderSpec {
    pub fn new(kind: EncoderKind, seed: u64) -> Self {
        Self { kind, mixing: None, noise_sigma: 0.0, extra_noise_dims: 0, seed }
    }

    pub fn ideal(seed: u64) -> Self {
        Self::new(EncoderKind::Ideal, seed)
    }

    pub fn noisy(sigma: f64, seed: u64) -> Self {
        Self { noise_sigma: sigma, ..Self::new(EncoderKind::Noisy, seed) }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_extra_dims(mut self, extra: usize) -> Self {
        self.extra_noise_dims = extra;
        self
    }

    pub fn with_mixing(mut self, m: Array2<f64>) -> Self {
        self.mixing = Some(m.rows().into_iter().map(|r| r.to_vec()).collect());
        self
    }

    /// Resolve the spec against a factor layout.
    pub fn build(&self, spec: &FactorSpec) -> Result<Encoder> {
        let n = spec.n();
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Shape(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        let mixing = match self.kind {
            EncoderKind::Mixing => {
                let m = match &self.mixing {
                    Some(rows) => {
                        let cols = rows.first().map_or(0, Vec::len);
                        if rows.iter().any(|r| r.len() != cols) {
                            return Err(Error::Shape("ragged mixing matrix".into()));
                        }
                        Array2::from_shape_vec((rows.len(), cols), rows.concat())
                            .map_err(|e| Error::Shape(e.to_string()))?
                    }
                    None => random_orthogonal(n, n, self.seed),
                };
                if m.ncols() != n || m.nrows() < n {
                    return Err(Error::Shape(format!(
                        "mixing matrix is {}x{}; need m x {n} with m >= {n}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                if m.iter().any(|v| !v.is_finite()) || column_rank(m.view()) < n {
                    return Err(Error::Shape("mixing matrix must have full column rank".into()));
                }
                Some(m)
            }
            EncoderKind::Overlap if n < 2 => {
                return Err(Error::Shape("overlap encoder needs at least two factors".into()))
            }
            _ => None,
        };
        let code_dims = match self.kind {
            EncoderKind::Ideal | EncoderKind::Noisy => n,
            EncoderKind::Overlap => n - 1,
            EncoderKind::Duplicate => n + 1,
            EncoderKind::Mixing => mixing.as_ref().map_or(n, Array2::nrows),
        };
        Ok(Encoder {
            kind: self.kind,
            cards: spec.cardinalities(),
            mixing,
            noise_sigma: self.noise_sigma,
            extra: self.extra_noise_dims,
            code_dims,
            seed: self.seed,
        })
    }
}

/// An [`EncoderSpec`] resolved against a factor layout.
#[derive(Debug, Clone)]
pub struct Encoder {
    kind: EncoderKind,
    cards: Vec<usize>,
    mixing: Option<Array2<f64>>,
    noise_sigma: f64,
    extra: usize,
    code_dims: usize,
    seed: u64,
}

impl Encoder {
    pub fn latent_dim(&self) -> usize {
        self.code_dims + self.extra
    }

    pub fn mixing(&self) -> Option<&Array2<f64>> {
        self.mixing.as_ref()
    }

    /// Noise stream for one dataset drawn from this encoder.
    pub fn noise_stream(&self, dataset_seed: u64) -> Stream {
        Stream::new(self.seed, "encoder-noise").derive_index(dataset_seed)
    }

    /// Encode one factor vector into `out` (length [`Self::latent_dim`]).
    pub fn encode_row(&self, factors: &[usize], noise: &mut Stream, out: &mut [f64]) {
        let norm = |c: usize| factors[c] as f64 / (self.cards[c] - 1) as f64;
        let n = self.cards.len();
        match self.kind {
            EncoderKind::Ideal | EncoderKind::Noisy => {
                for c in 0..n {
                    out[c] = norm(c);
                }
            }
            EncoderKind::Overlap => {
                out[0] = (norm(0) + norm(1)) / 2.0;
                for c in 2..n {
                    out[c - 1] = norm(c);
                }
            }
            EncoderKind::Duplicate => {
                out[0] = norm(0);
                for c in 0..n {
                    out[c + 1] = norm(c);
                }
            }
            EncoderKind::Mixing => {
                let m = self.mixing.as_ref().expect("mixing resolved in build");
                for (h, row) in m.rows().into_iter().enumerate() {
                    let mut z = 0.0;
                    for c in 0..n {
                        z += row[c] * norm(c);
                    }
                    out[h] = z;
                }
            }
        }
        if self.noise_sigma > 0.0 {
            for v in &mut out[..self.code_dims] {
                *v += self.noise_sigma * noise.normal();
            }
        }
        for v in &mut out[self.code_dims..] {
            *v = noise.normal();
        }
    }
}

/// Encode every row of `factors`.
pub fn encode(
    factors: ArrayView2<'_, usize>,
    spec: &FactorSpec,
    encoder: &EncoderSpec,
) -> Result<RepresentationMatrix> {
    check_factors(factors, spec)?;
    let enc = encoder.build(spec)?;
    let mut noise = enc.noise_stream(0);
    encode_with(&enc, factors, &mut noise)
}

fn encode_with(enc: &Encoder, factors: ArrayView2<'_, usize>, noise: &mut Stream) -> Result<RepresentationMatrix> {
    let d = enc.latent_dim();
    let mut out = Array2::zeros((factors.nrows(), d));
    for (i, row) in factors.rows().into_iter().enumerate() {
        let fv: Vec<usize> = row.to_vec();
        enc.encode_row(&fv, noise, out.row_mut(i).as_slice_mut().expect("row-major"));
    }
    RepresentationMatrix::new(out)
}

fn check_factors(factors: ArrayView2<'_, usize>, spec: &FactorSpec) -> Result<()> {
    if factors.ncols() != spec.n() {
        return Err(Error::Shape(format!("{} factor columns for {} factors", factors.ncols(), spec.n())));
    }
    for (j, col) in factors.columns().into_iter().enumerate() {
        if let Some(&v) = col.iter().find(|&&v| v >= spec.cardinality(j)) {
            return Err(Error::Range {
                path: None,
                line: None,
                message: format!("factor {j} value {v} >= cardinality {}", spec.cardinality(j)),
            });
        }
    }
    Ok(())
}

/// `n` i.i.d. factor vectors, each coordinate uniform over its range.
pub fn sample_factors(spec: &FactorSpec, n: usize, seed: u64) -> Array2<usize> {
    let mut stream = Stream::new(seed, "factors");
    let cards = spec.cardinalities();
    Array2::from_shape_fn((n, cards.len()), |(_, j)| stream.below(cards[j]))
}

/// Labeled dataset: sampled factors pushed through the encoder.
pub fn make_labeled(spec: &FactorSpec, encoder: &EncoderSpec, n: usize, seed: u64) -> Result<LabeledRepresentationSet> {
    let enc = encoder.build(spec)?;
    let factors = sample_factors(spec, n, seed);
    let mut noise = enc.noise_stream(seed);
    let reps = encode_with(&enc, factors.view(), &mut noise)?;
    let spec = spec.clone().with_latent_dim(enc.latent_dim())?;
    LabeledRepresentationSet::new(reps, factors, spec)
}

/// Pairs together with the factor vectors that produced them.
#[derive(Debug, Clone)]
pub struct SimulatedPairs {
    pub pairs: PairedRepresentationSet,
    pub factors_a: Array2<usize>,
    pub factors_b: Array2<usize>,
}

/// `n` pairs whose factor vectors differ in exactly one coordinate `k`.
pub fn make_pairs(
    spec: &FactorSpec,
    encoder: &EncoderSpec,
    n: usize,
    seed: u64,
    factor_weights: Option<&[f64]>,
) -> Result<PairedRepresentationSet> {
    Ok(make_pairs_with_factors(spec, encoder, n, seed, factor_weights)?.pairs)
}

pub fn make_pairs_with_factors(
    spec: &FactorSpec,
    encoder: &EncoderSpec,
    n: usize,
    seed: u64,
    factor_weights: Option<&[f64]>,
) -> Result<SimulatedPairs> {
    let nf = spec.n();
    if let Some(w) = factor_weights {
        if w.len() != nf || w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Shape("factor weights must be n non-negative reals with positive sum".into()));
        }
    }
    let enc = encoder.build(spec)?;
    let cards = spec.cardinalities();
    let mut base_stream = Stream::new(seed, "pair-base");
    let mut k_stream = Stream::new(seed, "pair-factor");
    let mut redraw = Stream::new(seed, "pair-redraw");
    let mut noise = enc.noise_stream(seed);

    let d = enc.latent_dim();
    let mut fa = Array2::zeros((n, nf));
    let mut fb = Array2::zeros((n, nf));
    let mut r1 = Array2::zeros((n, d));
    let mut r2 = Array2::zeros((n, d));
    let mut ks = Vec::with_capacity(n);
    let mut a = vec![0usize; nf];
    for i in 0..n {
        for (j, v) in a.iter_mut().enumerate() {
            *v = base_stream.below(cards[j]);
        }
        let k = match factor_weights {
            Some(w) => k_stream.weighted(w),
            None => k_stream.below(nf),
        };
        let mut b = a.clone();
        b[k] = (a[k] + 1 + redraw.below(cards[k] - 1)) % cards[k];
        enc.encode_row(&a, &mut noise, r1.row_mut(i).as_slice_mut().expect("row-major"));
        enc.encode_row(&b, &mut noise, r2.row_mut(i).as_slice_mut().expect("row-major"));
        fa.row_mut(i).iter_mut().zip(&a).for_each(|(d, s)| *d = *s);
        fb.row_mut(i).iter_mut().zip(&b).for_each(|(d, s)| *d = *s);
        ks.push(k);
    }
    let spec = spec.clone().with_latent_dim(d)?;
    let pairs = PairedRepresentationSet::new(RepresentationMatrix::new(r1)?, RepresentationMatrix::new(r2)?, ks, spec)?;
    Ok(SimulatedPairs { pairs, factors_a: fa, factors_b: fb })
}

/// Pairs and a labeled set for one simulated model. Pairs are drawn with
/// `seed` itself, labeled rows with a seed derived from it.
pub fn simulate(
    spec: &FactorSpec,
    encoder: &EncoderSpec,
    n_pairs: usize,
    n_labeled: usize,
    seed: u64,
) -> Result<(PairedRepresentationSet, LabeledRepresentationSet)> {
    let pairs = make_pairs(spec, encoder, n_pairs, seed, None)?;
    let labeled = make_labeled(spec, encoder, n_labeled, labeled_seed(seed))?;
    Ok((pairs, labeled))
}

pub fn labeled_seed(seed: u64) -> u64 {
    Stream::new(seed, "labeled").next_u64()
}

/// `rows`×`cols` matrix with orthonormal columns (`rows >= cols`), from
/// Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    assert!(rows >= cols, "need rows >= cols");
    let mut stream = Stream::new(seed, "orthogonal");
    loop {
        let g = Array2::from_shape_fn((rows, cols), |_| stream.normal());
        if let Some(q) = gram_schmidt(g.view()) {
            return q;
        }
    }
}

/// Modified Gram-Schmidt; `None` if the columns are (numerically) dependent.
fn gram_schmidt(a: ArrayView2<'_, f64>) -> Option<Array2<f64>> {
    let mut q = a.to_owned();
    for c in 0..q.ncols() {
        for p in 0..c {
            let dot = q.column(p).dot(&q.column(c));
            let proj = &q.column(p) * dot;
            let mut col = q.column_mut(c);
            col -= &proj;
        }
        let norm = q.column(c).dot(&q.column(c)).sqrt();
        let scale = a.column(c).dot(&a.column(c)).sqrt();
        if norm <= 1e-10 * scale.max(1e-300) {
            return None;
        }
        q.column_mut(c).mapv_inplace(|v| v / norm);
    }
    Some(q)
}

fn column_rank(a: ArrayView2<'_, f64>) -> usize {
    match gram_schmidt(a) {
        Some(_) => a.ncols(),
        None => 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Underfit,
    Partial,
    NearPerfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub strength: f64,
    pub seed: u64,
}

/// Square association matrix derived from the identity.
///
/// * `NearPerfect`: diagonal `1 - U(0, 0.1 s)`, off-diagonal `U(0, 0.1 s)`.
/// * `Partial`: `round(s n)` randomly chosen rows are replaced by a row with
///   `0.5` on the diagonal and `0.5` on one other factor; every remaining
///   off-diagonal cell leaks `U(0, s)`.
/// * `Underfit`: every cell `U(0.3, 0.5 (1 + s))`, clipped to [0, 1].
pub fn perturb_ideal_matrix(n: usize, scenario: ScenarioSpec) -> Result<AssociationMatrix> {
    if n < 2 {
        return Err(Error::Shape("perturbed matrices need n >= 2".into()));
    }
    let s = scenario.strength;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Invalid(vec![crate::types::ValidationIssue::new("strength", "strength must lie in [0,1]")]));
    }
    let mut stream = Stream::new(scenario.seed, "scenario");
    let mut m = Array2::<f64>::eye(n);
    match scenario.kind {
        ScenarioKind::NearPerfect => {
            for ((h, j), v) in m.indexed_iter_mut() {
                let u = stream.uniform(0.0, 0.1 * s);
                *v = if h == j { 1.0 - u } else { u };
            }
        }
        ScenarioKind::Partial => {
            let replaced = (s * n as f64).round() as usize;
            let mut rows: Vec<usize> = (0..n).collect();
            stream.shuffle(&mut rows);
            let mut partner = vec![None; n];
            for &h in &rows[..replaced] {
                let c = (h + 1 + stream.below(n - 1)) % n;
                partner[h] = Some(c);
            }
            for ((h, j), v) in m.indexed_iter_mut() {
                let leak = stream.uniform(0.0, s);
                *v = match partner[h] {
                    Some(c) if j == h || j == c => 0.5,
                    _ if h == j => 1.0,
                    _ => leak,
                };
            }
        }
        ScenarioKind::Underfit => {
            let hi = 0.5 * (1.0 + s);
            m.mapv_inplace(|_| stream.uniform(0.3, hi).clamp(0.0, 1.0));
        }
    }
    let names: Vec<(String, usize)> = (0..n).map(|j| (format!("factor_{j}"), 2)).collect();
    AssociationMatrix::synthetic(m, FactorSpec::from_pairs(&names)?)
}
