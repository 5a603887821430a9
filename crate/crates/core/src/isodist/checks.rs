use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::distribution::Component;
use crate::error::{LabError, Result};
use crate::seed;

/// Minimum sample count accepted by [`isoperimetry_tail_check`].
pub const MIN_TAIL_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailReport {
    pub d: usize,
    pub c: f64,
    pub lipschitz: f64,
    pub samples: usize,
    /// Sample mean used in place of `E[f]`; carries O(N^-1/2) error.
    pub mean_estimate: f64,
    pub rows: Vec<TailRow>,
    pub pass: bool,
}

impl TailReport {
    /// The `[{t, empirical, bound, pass}, ...]` wire form.
    pub fn rows_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.rows).unwrap_or_default()
    }
}

/// `2 exp(-d t^2 / (2 c L^2))`.
pub fn isoperimetric_bound(d: usize, c: f64, lip: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 2.0;
    }
    if lip == 0.0 {
        return 0.0;
    }
    2.0 * (-(d as f64) * t * t / (2.0 * c * lip * lip)).exp()
}

/// Draws `samples` points from one component in deterministic shards.
pub fn sample_component(component: &Component, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    seed::shard_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(shard, count)| {
            let mut rng = seed::shard_rng(seed, shard);
            (0..count)
                .map(|_| component.kind.sample(component.dim, &mut rng))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Compares the empirical deviation tail of `f` under one component with the
/// isoperimetric envelope at every `t` in the grid.
pub fn isoperimetry_tail_check<F>(
    component: &Component,
    f: &F,
    lipschitz: f64,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<TailReport>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    if t_grid.is_empty() {
        return Err(LabError::Domain("tail check needs a nonempty t grid".into()));
    }
    if samples < MIN_TAIL_SAMPLES {
        return Err(LabError::Domain(format!(
            "tail check needs at least {MIN_TAIL_SAMPLES} samples, got {samples}"
        )));
    }
    if !(lipschitz >= 0.0) {
        return Err(LabError::Domain(format!("invalid Lipschitz constant {lipschitz}")));
    }
    let values: Vec<f64> = seed::shard_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(shard, count)| {
            let mut rng = seed::shard_rng(seed, shard);
            (0..count)
                .map(|_| f(&component.kind.sample(component.dim, &mut rng)))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let rows: Vec<TailRow> = t_grid
        .iter()
        .map(|&t| {
            let hits = values.iter().filter(|v| (*v - mean).abs() >= t).count();
            let empirical = hits as f64 / samples as f64;
            let bound = isoperimetric_bound(component.dim, component.c, lipschitz, t);
            TailRow {
                t,
                empirical,
                bound,
                pass: empirical <= bound,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(TailReport {
        d: component.dim,
        c: component.c,
        lipschitz,
        samples,
        mean_estimate: mean,
        rows,
        pass,
    })
}

/// [`isoperimetry_tail_check`] for several functionals sharing one sample of
/// `samples` points. Each report is valid on its own; reports for different
/// functionals are not independent.
pub fn isoperimetry_tail_check_batch<F>(
    component: &Component,
    functionals: &[F],
    lipschitz: f64,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<TailReport>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if t_grid.is_empty() {
        return Err(LabError::Domain("tail check needs a nonempty t grid".into()));
    }
    if samples < MIN_TAIL_SAMPLES {
        return Err(LabError::Domain(format!(
            "tail check needs at least {MIN_TAIL_SAMPLES} samples, got {samples}"
        )));
    }
    let m = functionals.len();
    // values[point * m + functional]
    let values: Vec<f64> = seed::shard_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(shard, count)| {
            let mut rng = seed::shard_rng(seed, shard);
            let mut out = Vec::with_capacity(count * m);
            for _ in 0..count {
                let x = component.kind.sample(component.dim, &mut rng);
                out.extend(functionals.iter().map(|f| f(&x)));
            }
            out
        })
        .collect::<Vec<_>>()
        .concat();
    Ok((0..m)
        .map(|j| {
            let column: Vec<f64> = values.iter().skip(j).step_by(m).copied().collect();
            let mean = column.iter().sum::<f64>() / samples as f64;
            let rows: Vec<TailRow> = t_grid
                .iter()
                .map(|&t| {
                    let hits = column.iter().filter(|v| (*v - mean).abs() >= t).count();
                    let empirical = hits as f64 / samples as f64;
                    let bound = isoperimetric_bound(component.dim, component.c, lipschitz, t);
                    TailRow {
                        t,
                        empirical,
                        bound,
                        pass: empirical <= bound,
                    }
                })
                .collect();
            TailReport {
                d: component.dim,
                c: component.c,
                lipschitz,
                samples,
                mean_estimate: mean,
                pass: rows.iter().all(|r| r.pass),
                rows,
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseReport {
    pub n: usize,
    pub sigma_sq: f64,
    /// `(1/n) sum z_i^2`.
    pub mean_z_sq: f64,
    /// `(1/n) sum z_i g(x_i)`.
    pub mean_z_g: f64,
    pub deviation_z_sq: f64,
    pub deviation_z_g: f64,
    /// `epsilon / 6` when an epsilon was supplied.
    pub threshold: Option<f64>,
    pub flagged: bool,
}

/// Empirical second moment of the noise and its correlation with the
/// conditional mean, flagged against `epsilon / 6` if given.
pub fn noise_moment_checks(ds: &Dataset, epsilon: Option<f64>) -> NoiseReport {
    let n = ds.n();
    let mut sum_sq = 0.0;
    let mut sum_zg = 0.0;
    for (x, y) in ds.x.iter().zip(&ds.y) {
        let g = ds.label_model.conditional_mean(x);
        let z = y - g;
        sum_sq += z * z;
        sum_zg += z * g;
    }
    let mean_z_sq = sum_sq / n as f64;
    let mean_z_g = sum_zg / n as f64;
    let sigma_sq = ds.label_model.sigma_sq;
    let deviation_z_sq = (mean_z_sq - sigma_sq).abs();
    let deviation_z_g = mean_z_g.abs();
    let threshold = epsilon.map(|e| e / 6.0);
    let flagged = threshold.is_some_and(|t| deviation_z_sq > t || deviation_z_g > t);
    NoiseReport {
        n,
        sigma_sq,
        mean_z_sq,
        mean_z_g,
        deviation_z_sq,
        deviation_z_g,
        threshold,
        flagged,
    }
}
