//! Softmax classifiers used by DCI importance and the explicitness harness.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::rng::Stream;

/// Per-column affine map to zero mean and unit variance, fitted on one split
/// and reused on others. Constant columns keep scale 1.
#[derive(Debug, Clone)]
pub struct Standardizer {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let n = x.nrows() as f64;
        let mean = x.sum_axis(Axis(0)) / n;
        let mut scale = Array1::ones(x.ncols());
        for (c, col) in x.columns().into_iter().enumerate() {
            let mu = mean[c];
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            if var > 0.0 {
                scale[c] = var.sqrt();
            }
        }
        Self { mean, scale }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.mean) / &self.scale
    }
}

/// Linear softmax model: `logits = x W + b`.
#[derive(Debug, Clone)]
pub struct SoftmaxModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl SoftmaxModel {
    fn zeros(d: usize, classes: usize) -> Self {
        Self { weights: Array2::zeros((d, classes)), bias: Array1::zeros(classes) }
    }

    pub fn logits(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.weights) + &self.bias
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        argmax_rows(self.logits(x).view())
    }

    /// Mean cross-entropy gradient, one pass over the rows.
    fn gradient(&self, x: ArrayView2<'_, f64>, y: &[usize], grad_w: &mut Array2<f64>, grad_b: &mut Array1<f64>) {
        let (d, classes) = self.weights.dim();
        let n = x.nrows() as f64;
        grad_w.fill(0.0);
        grad_b.fill(0.0);
        let w = self.weights.as_slice().expect("standard layout");
        let gw = grad_w.as_slice_mut().expect("standard layout");
        let gb = grad_b.as_slice_mut().expect("standard layout");
        let mut z = vec![0.0; classes];
        let bias = self.bias.as_slice().expect("standard layout");
        let x = x.as_standard_layout();
        let rows = x.as_slice().expect("standard layout");
        for (row, &label) in rows.chunks_exact(d.max(1)).zip(y) {
            z.copy_from_slice(bias);
            for (&v, wf) in row.iter().zip(w.chunks_exact(classes)) {
                for (zc, &wc) in z.iter_mut().zip(wf) {
                    *zc += v * wc;
                }
            }
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for zc in z.iter_mut() {
                *zc = (*zc - max).exp();
                total += *zc;
            }
            let scale = 1.0 / (total * n);
            for zc in z.iter_mut() {
                *zc *= scale;
            }
            z[label] -= 1.0 / n;
            for (g, &zc) in gb.iter_mut().zip(&z) {
                *g += zc;
            }
            for (&v, gf) in row.iter().zip(gw.chunks_exact_mut(classes)) {
                for (g, &zc) in gf.iter_mut().zip(&z) {
                    *g += v * zc;
                }
            }
        }
    }
}

pub(crate) fn argmax_rows(m: ArrayView2<'_, f64>) -> Vec<usize> {
    m.rows()
        .into_iter()
        .map(|r| {
            let mut best = 0;
            for (c, &v) in r.iter().enumerate() {
                if v > r[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Turn logits into `(softmax - onehot) / N` in place; returns mean cross-entropy.
fn softmax_residual(logits: &mut Array2<f64>, y: &[usize]) -> f64 {
    let n = logits.nrows() as f64;
    let mut loss = 0.0;
    for (mut row, &label) in logits.rows_mut().into_iter().zip(y) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            z += *v;
        }
        loss -= (row[label] / z).ln();
        for (c, v) in row.iter_mut().enumerate() {
            let p = *v / z;
            *v = (p - if c == label { 1.0 } else { 0.0 }) / n;
        }
    }
    loss / n
}

#[derive(Debug, Clone, Copy)]
pub struct L1Options {
    pub lambda: f64,
    pub iterations: usize,
    pub step: f64,
}

impl Default for L1Options {
    fn default() -> Self {
        Self { lambda: 0.01, iterations: 500, step: 0.1 }
    }
}

/// L1-penalized multinomial logistic regression by proximal gradient descent
/// (ISTA) with a fixed iteration budget. The intercept is not penalized.
pub fn fit_l1_softmax(x: ArrayView2<'_, f64>, y: &[usize], classes: usize, opts: L1Options) -> SoftmaxModel {
    let mut model = SoftmaxModel::zeros(x.ncols(), classes);
    let shrink = opts.step * opts.lambda;
    let mut grad_w = Array2::zeros(model.weights.raw_dim());
    let mut grad_b = Array1::zeros(classes);
    for _ in 0..opts.iterations {
        model.gradient(x, y, &mut grad_w, &mut grad_b);
        model.weights.zip_mut_with(&grad_w, |w, &gw| {
            let v = *w - opts.step * gw;
            *w = v.signum() * (v.abs() - shrink).max(0.0);
        });
        model.bias.scaled_add(-opts.step, &grad_b);
    }
    model
}

/// Adam moment buffers for one parameter tensor.
struct AdamState<D: ndarray::Dimension> {
    m: ndarray::Array<f64, D>,
    v: ndarray::Array<f64, D>,
}

impl<D: ndarray::Dimension> AdamState<D> {
    fn like(p: &ndarray::Array<f64, D>) -> Self {
        Self { m: ndarray::Array::zeros(p.raw_dim()), v: ndarray::Array::zeros(p.raw_dim()) }
    }

    fn step(&mut self, p: &mut ndarray::Array<f64, D>, g: &ndarray::Array<f64, D>, lr: f64, t: i32) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        let c1 = 1.0 - B1.powi(t);
        let c2 = 1.0 - B2.powi(t);
        ndarray::Zip::from(p).and(&mut self.m).and(&mut self.v).and(g).for_each(|p, m, v, &g| {
            *m = B1 * *m + (1.0 - B1) * g;
            *v = B2 * *v + (1.0 - B2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
        });
    }
}

/// Unpenalized multinomial logistic regression, full-batch gradient descent
/// with Adam step sizes.
pub fn fit_softmax(x: ArrayView2<'_, f64>, y: &[usize], classes: usize, epochs: usize, lr: f64) -> SoftmaxModel {
    let mut model = SoftmaxModel::zeros(x.ncols(), classes);
    let mut sw = AdamState::like(&model.weights);
    let mut sb = AdamState::like(&model.bias);
    let mut grad_w = Array2::zeros(model.weights.raw_dim());
    let mut grad_b = Array1::zeros(classes);
    for t in 1..=epochs {
        model.gradient(x, y, &mut grad_w, &mut grad_b);
        sw.step(&mut model.weights, &grad_w, lr, t as i32);
        sb.step(&mut model.bias, &grad_b, lr, t as i32);
    }
    model
}

/// ReLU multilayer perceptron with a softmax head.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Mlp {
    fn forward(&self, x: ArrayView2<'_, f64>) -> (Vec<Array2<f64>>, Array2<f64>) {
        let mut acts = vec![x.to_owned()];
        let last = self.layers.len() - 1;
        for (l, (w, b)) in self.layers.iter().enumerate() {
            let mut z = acts[l].dot(w) + b;
            if l < last {
                z.mapv_inplace(|v| v.max(0.0));
                acts.push(z);
            } else {
                return (acts, z);
            }
        }
        unreachable!("at least one layer")
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        argmax_rows(self.forward(x).1.view())
    }
}

#[derive(Debug, Clone)]
pub struct MlpOptions {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

/// Mini-batch Adam on cross-entropy; He-initialized weights, zero biases.
pub fn fit_mlp(x: ArrayView2<'_, f64>, y: &[usize], classes: usize, opts: &MlpOptions) -> Mlp {
    let mut init = Stream::new(opts.seed, "mlp-init");
    let mut widths = vec![x.ncols()];
    widths.extend(&opts.hidden);
    widths.push(classes);
    let layers: Vec<(Array2<f64>, Array1<f64>)> = widths
        .windows(2)
        .map(|w| {
            let std = (2.0 / w[0] as f64).sqrt();
            (Array2::from_shape_fn((w[0], w[1]), |_| std * init.normal()), Array1::zeros(w[1]))
        })
        .collect();
    let mut net = Mlp { layers };
    let mut states: Vec<(AdamState<ndarray::Ix2>, AdamState<ndarray::Ix1>)> =
        net.layers.iter().map(|(w, b)| (AdamState::like(w), AdamState::like(b))).collect();

    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut shuffle = Stream::new(opts.seed, "mlp-batches");
    let batch = opts.batch_size.max(1);
    let mut t = 0;
    for _ in 0..opts.epochs {
        shuffle.shuffle(&mut order);
        for chunk in order.chunks(batch) {
            t += 1;
            let xb = x.select(Axis(0), chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let (acts, mut delta) = net.forward(xb.view());
            softmax_residual(&mut delta, &yb);
            for l in (0..net.layers.len()).rev() {
                let grad_w = acts[l].t().dot(&delta);
                let grad_b = delta.sum_axis(Axis(0));
                if l > 0 {
                    let mut back = delta.dot(&net.layers[l].0.t());
                    back.zip_mut_with(&acts[l], |g, &a| {
                        if a <= 0.0 {
                            *g = 0.0;
                        }
                    });
                    delta = back;
                }
                let (w, b) = &mut net.layers[l];
                states[l].0.step(w, &grad_w, opts.learning_rate, t);
                states[l].1.step(b, &grad_b, opts.learning_rate, t);
            }
        }
    }
    net
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}
