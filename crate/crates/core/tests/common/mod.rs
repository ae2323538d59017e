//! Test-only oracles, independent of the incremental code paths.
#![allow(dead_code)]

use permwalk::{direct_corr, RandomStream};

pub fn gaussian(rng: &mut RandomStream, len: usize, shift: f64) -> Vec<f64> {
    (0..len).map(|_| rng.normal() + shift).collect()
}

pub fn uniform(rng: &mut RandomStream, len: usize, shift: f64) -> Vec<f64> {
    (0..len).map(|_| rng.uniform() + shift).collect()
}

/// Textbook pooled two-sample t, written out independently of the library.
pub fn textbook_t(x: &[f64], y: &[f64]) -> f64 {
    let (m, n) = (x.len() as f64, y.len() as f64);
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / n;
    let vx = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / (m - 1.0);
    let vy = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / (n - 1.0);
    let sp2 = ((m - 1.0) * vx + (n - 1.0) * vy) / (m + n - 2.0);
    (mx - my) / (sp2 * (1.0 / m + 1.0 / n)).sqrt()
}

pub fn textbook_corr(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Exact mean correlation over all `2^n` orderings of the twin pairs.
pub fn brute_force_twin_average(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    let mut count = 0u64;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for mask in 0u64..(1 << n) {
        for k in 0..n {
            if mask >> k & 1 == 1 {
                a[k] = y[k];
                b[k] = x[k];
            } else {
                a[k] = x[k];
                b[k] = y[k];
            }
        }
        total += direct_corr(&a, &b).expect("nondegenerate twins");
        count += 1;
    }
    total / count as f64
}

/// Exact p-value by listing every subset of size m (bitmask enumeration),
/// `>=` convention, side greater on `stat`.
pub fn brute_force_pvalue(x: &[f64], y: &[f64], stat: impl Fn(&[f64], &[f64]) -> f64) -> (f64, f64) {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let l = pooled.len();
    let m = x.len();
    let observed = stat(x, y);
    let (mut geq, mut gt, mut total) = (0u64, 0u64, 0u64);
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(l - m);
    for mask in 0u32..(1 << l) {
        if mask.count_ones() as usize != m {
            continue;
        }
        xs.clear();
        ys.clear();
        for (k, &v) in pooled.iter().enumerate() {
            if mask >> k & 1 == 1 {
                xs.push(v)
            } else {
                ys.push(v)
            }
        }
        let s = stat(&xs, &ys);
        total += 1;
        if s >= observed {
            geq += 1;
        }
        if s > observed {
            gt += 1;
        }
    }
    (gt as f64 / total as f64, geq as f64 / total as f64)
}

/// One-sample Kolmogorov–Smirnov test against Uniform(0, 1); returns the
/// asymptotic p-value (Stephens' small-sample correction).
pub fn ks_uniform_pvalue(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let lo = u - i as f64 / n;
            let hi = (i + 1) as f64 / n - u;
            lo.max(hi)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Pearson chi-square statistic for observed counts against equal expected
/// frequencies.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}
