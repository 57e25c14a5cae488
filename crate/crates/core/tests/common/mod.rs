#![allow(dead_code)]

use ctmc_sens::estimators::RunningStats;

/// Kolmogorov–Smirnov critical coefficient at α = 0.001.
pub const KS_C_001: f64 = 1.9495;

pub fn stats<I: IntoIterator<Item = f64>>(xs: I) -> RunningStats {
    xs.into_iter().collect()
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Two-sample KS critical value at α = 0.001.
pub fn ks_two_sample_critical(n: usize, m: usize) -> f64 {
    KS_C_001 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Standard error of the sample variance, estimated from the fourth
/// central moment.
pub fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2) / n).max(0.0).sqrt()
}

pub const GENE: &str = "network gene
species: M P
params: theta = 0.25
reaction: -> M ; rate = 2
reaction: M -> M + P ; rate = 10*M
reaction: M -> ; rate = theta*M
reaction: P -> ; rate = P
";

pub const MMQ: &str = "network mmq
species: M
params: theta = 2
reaction: -> M ; rate = theta
reaction: M -> ; rate = 0.1*M
";
