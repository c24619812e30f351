//! Deliberately naive reference for the association matrix and scores: plain
//! nested loops over `Vec`s, two-pass statistics, no shared code with the
//! library.

#![allow(dead_code)]

pub fn two_pass_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mut sum = 0.0;
    for x in xs {
        sum += x;
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for x in xs {
        ss += (x - mean) * (x - mean);
    }
    (ss / (n - 1.0)).sqrt()
}

/// Two-pass Pearson; 1 when either side is constant.
pub fn two_pass_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.iter().all(|&x| x == xs[0]) || ys.iter().all(|&y| y == ys[0]) {
        return 1.0;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..xs.len() {
        num += (xs[i] - mx) * (ys[i] - my);
        vx += (xs[i] - mx) * (xs[i] - mx);
        vy += (ys[i] - my) * (ys[i] - my);
    }
    num / (vx.sqrt() * vy.sqrt())
}

/// Active dims and the association matrix rows for them.
pub fn association(
    r1: &[Vec<f64>],
    r2: &[Vec<f64>],
    k: &[usize],
    n: usize,
    threshold: f64,
) -> (Vec<usize>, Vec<Vec<f64>>) {
    let d = r1[0].len();
    let mut active = Vec::new();
    for h in 0..d {
        let mut col = Vec::new();
        for row in r1 {
            col.push(row[h]);
        }
        for row in r2 {
            col.push(row[h]);
        }
        if two_pass_std(&col) >= threshold {
            active.push(h);
        }
    }
    let mut s = Vec::new();
    for &h in &active {
        let mut row = Vec::new();
        for j in 0..n {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for i in 0..k.len() {
                if k[i] == j {
                    a.push(r1[i][h]);
                    b.push(r2[i][h]);
                }
            }
            row.push(1.0 - two_pass_pearson(&a, &b).abs());
        }
        s.push(row);
    }
    (active, s)
}

fn pool(scores: &[f64], max: bool) -> f64 {
    if max {
        let mut best = scores[0];
        for &s in scores {
            if s > best {
                best = s;
            }
        }
        best
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

pub fn overlap(s: &[Vec<f64>], j: usize, max: bool) -> f64 {
    let n = s[0].len();
    let mut scores = Vec::new();
    for row in s {
        let mut err = 0.0;
        for c in 0..n {
            let ideal = if c == j { 1.0 } else { 0.0 };
            err += (ideal - row[c]).abs();
        }
        scores.push(1.0 - err / n as f64);
    }
    pool(&scores, max)
}

pub fn multiple_encoding(s: &[Vec<f64>], j: usize, max: bool) -> f64 {
    let m = s.len();
    let mut scores = Vec::new();
    for h in 0..m {
        let mut err = 0.0;
        for r in 0..m {
            let ideal = if r == h { 1.0 } else { 0.0 };
            err += (ideal - s[r][j]).abs();
        }
        scores.push(1.0 - err / m as f64);
    }
    pool(&scores, max)
}

pub fn omes(s: &[Vec<f64>], alpha: f64, max: bool) -> f64 {
    let n = s[0].len();
    let mut total = 0.0;
    for j in 0..n {
        total += alpha * overlap(s, j, max) + (1.0 - alpha) * multiple_encoding(s, j, max);
    }
    total / n as f64
}

pub fn rows_of(a: ndarray::ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}
