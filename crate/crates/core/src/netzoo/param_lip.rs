use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::arch::Architecture;
use super::net::materialize;
use crate::error::{LabError, Result};
use crate::lipcert::spectral_product_bound;
use crate::seed;

/// Lipschitz constant of the parametrization `w -> f_w` in sup norm over the
/// ball of radius `R`: `J = R (W Q p)^D`.
pub fn param_lip_j(arch: &Architecture) -> Result<f64> {
    if arch.w_bound < 1.0 {
        return Err(LabError::Domain(format!(
            "J = R(WQp)^D needs W >= 1, got W = {}",
            arch.w_bound
        )));
    }
    let base = arch.w_bound * arch.q() as f64 * arch.p() as f64;
    Ok(arch.radius * base.powi(arch.depth() as i32))
}

/// `(W sqrt(p Q))^D`.
pub fn spectral_budget(arch: &Architecture) -> f64 {
    (arch.w_bound * ((arch.p() * arch.q()) as f64).sqrt()).powi(arch.depth() as i32)
}

/// Uniform point in the centered ball of radius `r`.
pub fn sample_ball<R: Rng + ?Sized>(dim: usize, r: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let radius = r * rng.random::<f64>().powf(1.0 / dim as f64);
    v.iter_mut().for_each(|a| *a *= radius / norm);
    v
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamLipReport {
    pub probes: usize,
    pub b_w1: f64,
    pub b_w2: f64,
    pub b_bar: f64,
    pub param_distance: f64,
    /// `B_bar^2 Q R sqrt(p) |w1 - w2|`.
    pub rhs: f64,
    /// `max_x |f_w1(x) - f_w2(x)|` over the probes.
    pub max_lhs: f64,
    pub violations: usize,
    /// `(W sqrt(pQ))^D`, checked only for parameters inside the box with `W >= 1`.
    pub spectral_budget: f64,
    pub budget_applies: bool,
    pub budget_ok: bool,
    pub pass: bool,
}

/// Checks `|f_w1(x) - f_w2(x)| <= B_bar^2 Q R sqrt(p) |w1 - w2|` at random
/// probes `|x| <= R`, and `B(w) <= (W sqrt(pQ))^D` for both parameter vectors.
pub fn check_param_lipschitz(
    arch: &Architecture,
    w1: &[f64],
    w2: &[f64],
    probes: usize,
    seed: u64,
) -> Result<ParamLipReport> {
    let net1 = materialize(arch, w1)?;
    let net2 = materialize(arch, w2)?;
    let b_w1 = spectral_product_bound(&net1);
    let b_w2 = spectral_product_bound(&net2);
    let b_bar = b_w1.max(b_w2);
    let param_distance = w1.iter().zip(w2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let rhs = b_bar * b_bar * arch.q() as f64 * arch.radius * (arch.p() as f64).sqrt() * param_distance;
    let mut rng = seed::rng(seed);
    let mut max_lhs = 0.0f64;
    let mut violations = 0;
    // floating-point slack for the w1 == w2 and near-equality cases
    let slack = 1e-12 * (1.0 + rhs);
    for _ in 0..probes {
        let x = sample_ball(arch.input_dim, arch.radius, &mut rng);
        let lhs = (net1.forward(&x)? - net2.forward(&x)?).abs();
        max_lhs = max_lhs.max(lhs);
        if lhs > rhs + slack {
            violations += 1;
        }
    }
    let budget = spectral_budget(arch);
    let in_box = |w: &[f64]| w.iter().all(|v| v.abs() <= arch.w_bound);
    let budget_applies = arch.w_bound >= 1.0 && in_box(w1) && in_box(w2);
    let budget_ok = !budget_applies || (b_w1 <= budget * (1.0 + 1e-12) && b_w2 <= budget * (1.0 + 1e-12));
    Ok(ParamLipReport {
        probes,
        b_w1,
        b_w2,
        b_bar,
        param_distance,
        rhs,
        max_lhs,
        violations,
        spectral_budget: budget,
        budget_applies,
        budget_ok,
        pass: violations == 0 && budget_ok,
    })
}
