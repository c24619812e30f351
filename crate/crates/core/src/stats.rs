//! Small numeric kernels shared across modules.
//!
//! All reductions run a fixed left-to-right order so results are bitwise
//! reproducible regardless of how callers schedule work.

pub fn mean<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}

/// Sample standard deviation (N - 1 denominator), two-pass.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values.iter().copied());
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Two-pass Pearson correlation; `None` when either input is constant.
///
/// Constancy is tested exactly (all values equal), not through the computed
/// variance, because the mean of identical values need not equal the value
/// itself in floating point.
pub fn pearson<A, B>(xs: A, ys: B) -> Option<f64>
where
    A: Iterator<Item = f64> + Clone,
    B: Iterator<Item = f64> + Clone,
{
    if is_constant(xs.clone()) || is_constant(ys.clone()) {
        return None;
    }
    let mx = mean(xs.clone());
    let my = mean(ys.clone());
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn is_constant<I: Iterator<Item = f64>>(mut xs: I) -> bool {
    match xs.next() {
        None => true,
        Some(first) => xs.all(|x| x == first),
    }
}

/// Mid-ranks (1-based); tied values share the average of their positions.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}
