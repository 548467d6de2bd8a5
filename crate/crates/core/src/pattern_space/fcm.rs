//! Fuzzy c-means on one-dimensional data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcmConfig {
    /// Target cluster count.
    pub k: usize,
    pub fuzziness: f64,
    /// Stop once the largest center movement falls below this value.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for FcmConfig {
    fn default() -> Self {
        Self {
            k: 26,
            fuzziness: 2.0,
            tolerance: 1e-6,
            max_iterations: 300,
            seed: 0,
        }
    }
}

impl FcmConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        if !(self.fuzziness > 1.0) {
            return Err(Error::Config(format!(
                "fuzziness must exceed 1, got {}",
                self.fuzziness
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if self.k == 0 || self.k > len {
            return Err(Error::Config(format!(
                "cluster count {} must lie in 1..={len}",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FcmResult {
    pub centers: Vec<f64>,
    /// Hard assignment per point: index of the maximum-membership cluster.
    pub assignments: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs FCM and hardens memberships by arg-max (ties to the lowest index).
///
/// Fails when `k` exceeds the number of distinct values or when a cluster
/// ends with no hard-assigned members.
pub fn fcm_cluster(data: &[f64], config: &FcmConfig) -> Result<FcmResult> {
    config.validate(data.len())?;
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Clustering("data contains non-finite values".into()));
    }
    let distinct = count_distinct(data);
    if config.k > distinct {
        return Err(Error::Clustering(format!(
            "{} clusters requested but data has only {distinct} distinct values",
            config.k
        )));
    }

    let exponent = 2.0 / (config.fuzziness - 1.0);
    let mut centers = farthest_point_init(data, config.k, config.seed);
    let mut memberships = vec![0.0; data.len() * config.k];
    let mut iterations = 0;
    let mut converged = false;
    let mut last_objective = f64::INFINITY;

    while iterations < config.max_iterations {
        iterations += 1;
        update_memberships(data, &centers, exponent, &mut memberships);
        let next = weighted_centers(data, &memberships, config.k, config.fuzziness, &centers);
        let movement = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        centers = next;

        if cfg!(debug_assertions) {
            update_memberships(data, &centers, exponent, &mut memberships);
            let j = objective(data, &centers, &memberships, config.fuzziness);
            debug_assert!(
                j <= last_objective * (1.0 + 1e-9) + 1e-12,
                "FCM objective increased: {last_objective} -> {j}"
            );
            last_objective = j;
        }

        if movement < config.tolerance {
            converged = true;
            break;
        }
    }

    update_memberships(data, &centers, exponent, &mut memberships);
    let k = config.k;
    let assignments: Vec<usize> = memberships
        .chunks(k)
        .map(|row| {
            let mut best = 0;
            for (j, &u) in row.iter().enumerate().skip(1) {
                if u > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();

    let mut counts = vec![0usize; k];
    for &a in &assignments {
        counts[a] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Clustering(format!(
            "cluster {empty} (center {}) has no members",
            centers[empty]
        )));
    }

    Ok(FcmResult {
        centers,
        assignments,
        iterations,
        converged,
    })
}

/// FCM objective `Σ_i Σ_j u_ij^m (x_i − v_j)²`.
pub fn objective(data: &[f64], centers: &[f64], memberships: &[f64], fuzziness: f64) -> f64 {
    let k = centers.len();
    data.iter()
        .enumerate()
        .map(|(i, &x)| {
            centers
                .iter()
                .enumerate()
                .map(|(j, &v)| memberships[i * k + j].powf(fuzziness) * (x - v).powi(2))
                .sum::<f64>()
        })
        .sum()
}

fn count_distinct(data: &[f64]) -> usize {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

/// First center drawn from the data by seed, the rest by repeatedly taking the
/// point farthest from every chosen center (ties to the lowest index).
fn farthest_point_init(data: &[f64], k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = data[rng.random_range(0..data.len())];
    let mut centers = Vec::with_capacity(k);
    centers.push(first);
    let mut nearest: Vec<f64> = data.iter().map(|x| (x - first).abs()).collect();
    while centers.len() < k {
        let mut best = 0;
        for (i, &d) in nearest.iter().enumerate() {
            if d > nearest[best] {
                best = i;
            }
        }
        let c = data[best];
        centers.push(c);
        for (d, x) in nearest.iter_mut().zip(data) {
            *d = d.min((x - c).abs());
        }
    }
    centers
}

/// `u_ij = 1 / Σ_l (d_ij / d_il)^exponent`, written relative to the nearest
/// center so no power overflows. Points sitting on centers split their
/// membership evenly among those centers.
fn update_memberships(data: &[f64], centers: &[f64], exponent: f64, out: &mut [f64]) {
    let k = centers.len();
    for (i, &x) in data.iter().enumerate() {
        let row = &mut out[i * k..(i + 1) * k];
        let dmin = centers.iter().map(|v| (x - v).abs()).fold(f64::INFINITY, f64::min);
        if dmin == 0.0 {
            let zeros = centers.iter().filter(|&&v| x == v).count() as f64;
            for (u, &v) in row.iter_mut().zip(centers) {
                *u = if x == v { 1.0 / zeros } else { 0.0 };
            }
            continue;
        }
        let mut total = 0.0;
        for (u, &v) in row.iter_mut().zip(centers) {
            *u = (dmin / (x - v).abs()).powf(exponent);
            total += *u;
        }
        for u in row.iter_mut() {
            *u /= total;
        }
    }
}

fn weighted_centers(
    data: &[f64],
    memberships: &[f64],
    k: usize,
    fuzziness: f64,
    previous: &[f64],
) -> Vec<f64> {
    let mut num = vec![0.0; k];
    let mut den = vec![0.0; k];
    for (i, &x) in data.iter().enumerate() {
        for j in 0..k {
            let w = memberships[i * k + j].powf(fuzziness);
            num[j] += w * x;
            den[j] += w;
        }
    }
    (0..k)
        .map(|j| if den[j] > 0.0 { num[j] / den[j] } else { previous[j] })
        .collect()
}
