use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::isodist::{DistributionSpec, TailRow};
use crate::seed;

/// Built-in mean-zero subgaussian generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Standard normal.
    Gaussian,
    /// Constant zero.
    Zero,
}

impl Generator {
    /// Subgaussian constant of the generator in the `2 exp(-t^2/C)` sense.
    pub fn constant(self) -> f64 {
        2.0
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rademacher" => Ok(Self::Rademacher),
            "gaussian" => Ok(Self::Gaussian),
            "zero" => Ok(Self::Zero),
            other => Err(LabError::Config(format!("unknown generator `{other}`"))),
        }
    }

    /// Draws `(1/sqrt(n)) sum_{i<n} X_i`.
    fn average<R: Rng>(self, n: usize, rng: &mut R) -> f64 {
        let sum = match self {
            Self::Zero => 0.0,
            Self::Gaussian => (0..n).map(|_| -> f64 { StandardNormal.sample(rng) }).sum(),
            Self::Rademacher => {
                let mut left = n;
                let mut total: i64 = 0;
                while left > 0 {
                    let take = left.min(64);
                    let bits: u64 = rng.random();
                    let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
                    total += 2 * i64::from((bits & mask).count_ones()) - take as i64;
                    left -= take;
                }
                total as f64
            }
        };
        sum / (n as f64).sqrt()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgaussianReport {
    pub generator: Generator,
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    /// Tail of `X_av` against `2 exp(-t^2 / (18 C))`.
    pub rows: Vec<TailRow>,
    /// Sample mean of `exp(X_av^2 / (3 * 18 C))`.
    pub mgf_mean: f64,
    pub mgf_std_error: f64,
    /// `mgf_mean - 3 * mgf_std_error <= 2`.
    pub mgf_pass: bool,
    pub pass: bool,
}

/// Averaging check: for independent mean-zero `C`-subgaussian `X_i`,
/// `X_av = n^{-1/2} sum X_i` should be `18C`-subgaussian.
pub fn subgaussian_avg_check(
    generator: Generator,
    c: f64,
    n: usize,
    trials: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<SubgaussianReport> {
    if n == 0 || trials == 0 {
        return Err(LabError::Domain("averaging check needs n >= 1 and trials >= 1".into()));
    }
    if !(c > 0.0) {
        return Err(LabError::Domain(format!(
            "subgaussian constant must be positive, got {c}"
        )));
    }
    let values: Vec<f64> = seed::shard_sizes(trials)
        .into_par_iter()
        .enumerate()
        .map(|(shard, count)| {
            let mut rng = seed::shard_rng(seed, shard);
            (0..count).map(|_| generator.average(n, &mut rng)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();
    let proxy = 18.0 * c;
    let rows: Vec<TailRow> = t_grid
        .iter()
        .map(|&t| {
            let empirical = values.iter().filter(|v| v.abs() >= t).count() as f64 / trials as f64;
            let bound = 2.0 * (-t * t / proxy).exp();
            TailRow {
                t,
                empirical,
                bound,
                pass: empirical <= bound,
            }
        })
        .collect();
    let mgf: Vec<f64> = values.iter().map(|v| (v * v / (3.0 * proxy)).exp()).collect();
    let mgf_mean = mgf.iter().sum::<f64>() / trials as f64;
    let var = mgf.iter().map(|m| (m - mgf_mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
    let mgf_std_error = (var / trials as f64).sqrt();
    let mgf_pass = mgf_mean - 3.0 * mgf_std_error <= 2.0;
    let pass = mgf_pass && rows.iter().all(|r| r.pass);
    Ok(SubgaussianReport {
        generator,
        c,
        n,
        trials,
        rows,
        mgf_mean,
        mgf_std_error,
        mgf_pass,
        pass,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RademacherReport {
    pub n: usize,
    pub n_outer: usize,
    pub family_size: usize,
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo Rademacher complexity of a finite class: average over
/// `n_outer` draws of `(x_i, sigma_i)` of `(1/n) max_f |sum sigma_i f(x_i)|`,
/// the inner maximum taken by enumeration.
pub fn rademacher_estimate<F>(
    family: &[F],
    spec: &DistributionSpec,
    n: usize,
    n_outer: usize,
    seed: u64,
) -> Result<RademacherReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if family.is_empty() {
        return Err(LabError::Domain("Rademacher estimate needs a nonempty class".into()));
    }
    if n == 0 || n_outer == 0 {
        return Err(LabError::Domain(
            "Rademacher estimate needs n >= 1 and n_outer >= 1".into(),
        ));
    }
    spec.validate()?;
    let draws: Vec<f64> = seed::shard_sizes(n_outer)
        .into_par_iter()
        .enumerate()
        .map(|(shard, count)| {
            let mut rng = seed::shard_rng(seed, shard);
            let mut out = Vec::with_capacity(count);
            let mut sums = vec![0.0; family.len()];
            for _ in 0..count {
                sums.iter_mut().for_each(|s| *s = 0.0);
                for _ in 0..n {
                    let (_, x) = spec.sample_point(&mut rng);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    for (s, f) in sums.iter_mut().zip(family) {
                        *s += sign * f(&x);
                    }
                }
                out.push(sums.iter().fold(0.0f64, |m, s| m.max(s.abs())) / n as f64);
            }
            out
        })
        .collect::<Vec<_>>()
        .concat();
    let estimate = draws.iter().sum::<f64>() / n_outer as f64;
    let var = draws.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (n_outer.max(2) - 1) as f64;
    Ok(RademacherReport {
        n,
        n_outer,
        family_size: family.len(),
        estimate,
        std_error: (var / n_outer as f64).sqrt(),
    })
}

/// `x -> clamp(L <u, x>, -1, 1)` for a unit direction `u`: bounded and
/// `L`-Lipschitz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClippedLinear {
    pub direction: Vec<f64>,
    pub lip: f64,
}

impl ClippedLinear {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let dot: f64 = self.direction.iter().zip(x).map(|(u, v)| u * v).sum();
        (self.lip * dot).clamp(-1.0, 1.0)
    }
}

/// `count` clipped linear functionals with uniformly random directions.
pub fn clipped_linear_family(count: usize, dim: usize, lip: f64, seed: u64) -> Vec<ClippedLinear> {
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|_| {
            let mut u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            u.iter_mut().for_each(|v| *v /= norm);
            ClippedLinear { direction: u, lip }
        })
        .collect()
}

/// Default leading constant of [`rademacher_envelope`].
pub const RADEMACHER_ENVELOPE_CONSTANT: f64 = 3.0;

/// `C max(sqrt(k/n), L sqrt(c ln N / (n d)))` for a class of `N` bounded
/// `L`-Lipschitz functions under a `k`-mixture of `c`-isoperimetric laws.
pub fn rademacher_envelope(constant: f64, k: usize, n: usize, d: usize, c: f64, lip: f64, family_size: usize) -> f64 {
    let first = (k as f64 / n as f64).sqrt();
    let second = lip * (c * (family_size as f64).ln() / (n as f64 * d as f64)).sqrt();
    constant * first.max(second)
}
