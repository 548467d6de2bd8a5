#![allow(dead_code)]

use iarx::data::{synthesize, zero_mean_normalize, SyntheticSpec};
use iarx::{IarxParams, Interval};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_interval(rng: &mut ChaCha8Rng, scale: f64) -> Interval {
    let c = rng.random_range(-scale..scale);
    let r = rng.random_range(0.0..scale);
    Interval::from_center_radius(c, r).unwrap()
}

pub fn random_params(rng: &mut ChaCha8Rng, n: usize, m: usize) -> IarxParams {
    let d = 1 + n + m;
    let a = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let c = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
    IarxParams::new(n, m, a, c).unwrap()
}

/// Random interval series with crisp inputs.
pub fn random_series(rng: &mut ChaCha8Rng, len: usize) -> (Vec<Interval>, Vec<f64>) {
    let series = (0..len).map(|_| random_interval(rng, 1.0)).collect();
    let u = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
    (series, u)
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// The default synthetic dataset, normalized the way the CLI prepares it.
pub fn default_series() -> (Vec<f64>, Vec<f64>) {
    let s = synthesize(&SyntheticSpec::default()).unwrap();
    let (x, _) = zero_mean_normalize(&s.data).unwrap();
    let (u, _) = zero_mean_normalize(&s.u).unwrap();
    (x, u)
}

pub fn bits(i: &Interval) -> (u64, u64) {
    (i.lower().to_bits(), i.upper().to_bits())
}
