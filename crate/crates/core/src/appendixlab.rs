//! Slab measure and sign-pattern cell occupancy on the unit sphere.
//!
//! The slab is the set of points with some coordinate of magnitude at most
//! `1 / (100 d^{3/2})`. Outside it, each point is assigned the cell given by
//! its coordinate signs.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::isodist::ComponentKind;
use crate::seed;

/// Smallest sample count accepted by [`slab_measure_estimate`].
pub const MIN_SLAB_SAMPLES: usize = 100_000;
pub const SLAB_MEASURE_BOUND: f64 = 0.1;

/// `1 / (100 d^{3/2})`.
pub fn slab_width(d: usize) -> f64 {
    1.0 / (100.0 * (d as f64).powf(1.5))
}

pub fn in_slab(x: &[f64], width: f64) -> bool {
    x.iter().any(|v| v.abs() <= width)
}

/// Coordinate signs packed into 64-bit words, bit set for a nonnegative
/// coordinate. Invariant under positive rescaling of `x`.
pub fn sign_pattern(x: &[f64]) -> Vec<u64> {
    let mut words = vec![0u64; x.len().div_ceil(64)];
    for (i, v) in x.iter().enumerate() {
        if *v >= 0.0 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlabReport {
    pub d: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    pub width: f64,
    pub empirical_slab_measure: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Fraction of `samples` uniform sphere points lying in the slab.
pub fn slab_measure_estimate(d: usize, samples: usize, seed: u64) -> Result<SlabReport> {
    if d == 0 {
        return Err(LabError::Domain("slab measure needs d >= 1".into()));
    }
    if samples < MIN_SLAB_SAMPLES {
        return Err(LabError::Domain(format!(
            "slab measure needs at least {MIN_SLAB_SAMPLES} samples, got {samples}"
        )));
    }
    let width = slab_width(d);
    let hits: usize = seed::shard_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(shard, count)| {
            let mut rng = seed::shard_rng(seed, shard);
            (0..count)
                .filter(|_| in_slab(&ComponentKind::Sphere.sample(d, &mut rng), width))
                .count()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let measure = hits as f64 / samples as f64;
    Ok(SlabReport {
        d,
        samples,
        width,
        empirical_slab_measure: measure,
        bound: SLAB_MEASURE_BOUND,
        pass: measure <= SLAB_MEASURE_BOUND,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellReport {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    /// `ceil(3n/4)`.
    pub required: usize,
    /// Per trial, the fraction of the `n` points that lie outside the slab
    /// and alone in their cell.
    pub fractions: Vec<f64>,
    /// Fraction of trials reaching `required` unique points.
    pub success_rate: f64,
}

/// Largest `n` with `n <= 2^d / 100`.
pub fn max_cell_sample(d: usize) -> f64 {
    2f64.powi(d as i32) / 100.0
}

/// Number of the points that are outside the slab and alone in their
/// sign-pattern cell.
pub fn unique_cell_count(points: &[Vec<f64>], width: f64) -> usize {
    let mut cells: HashMap<Vec<u64>, usize> = HashMap::new();
    let patterns: Vec<Option<Vec<u64>>> = points
        .iter()
        .map(|x| (!in_slab(x, width)).then(|| sign_pattern(x)))
        .collect();
    for pat in patterns.iter().flatten() {
        *cells.entry(pat.clone()).or_default() += 1;
    }
    patterns.iter().flatten().filter(|pat| cells[*pat] == 1).count()
}

/// Repeats the unique-cell experiment `trials` times with `n` sphere points.
/// Refuses when `n > 2^d / 100`.
pub fn unique_cell_fraction(d: usize, n: usize, trials: usize, seed: u64) -> Result<CellReport> {
    if n as f64 > max_cell_sample(d) {
        return Err(LabError::Refusal(format!(
            "cell experiment requires n <= 2^d / 100 = {}, got n = {n}",
            max_cell_sample(d)
        )));
    }
    unique_cell_trials(d, n, trials, seed)
}

/// [`unique_cell_fraction`] without the sample-size hypothesis.
pub fn unique_cell_trials(d: usize, n: usize, trials: usize, seed: u64) -> Result<CellReport> {
    if d == 0 || n == 0 || trials == 0 {
        return Err(LabError::Domain("cell experiment needs d, n and trials >= 1".into()));
    }
    let width = slab_width(d);
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::shard_rng(seed, t);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| ComponentKind::Sphere.sample(d, &mut rng)).collect();
            unique_cell_count(&pts, width)
        })
        .collect();
    let required = (3 * n).div_ceil(4);
    let successes = counts.iter().filter(|&&c| c >= required).count();
    Ok(CellReport {
        d,
        n,
        trials,
        required,
        fractions: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        success_rate: successes as f64 / trials as f64,
    })
}
