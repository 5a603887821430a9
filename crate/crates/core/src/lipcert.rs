//! Lipschitz certification.
//!
//! Lower bounds come from sampled secant slopes: random pairs, a bisection
//! refinement of the steepest pair, and secants along finite-difference
//! gradient directions. Every value returned by [`empirical_lip_lower`] is a
//! true difference quotient of `f`, so it never exceeds `Lip(f)` beyond
//! rounding. Upper bounds for networks use the spectral product
//! `B(w) = prod_j max(|W_j|_op, 1)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::isodist::distance;
use crate::netzoo::NetFunction;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLipConfig {
    pub n_pairs: usize,
    pub refine_steps: usize,
    /// Points at which a finite-difference gradient is taken.
    pub grad_probes: usize,
    /// Central-difference step.
    pub fd_step: f64,
}

impl Default for EmpiricalLipConfig {
    fn default() -> Self {
        Self {
            n_pairs: 200,
            refine_steps: 30,
            grad_probes: 16,
            fd_step: 1e-5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalLip {
    pub value: f64,
    pub evaluations: usize,
}

fn ratio(fa: f64, fb: f64, a: &[f64], b: &[f64]) -> f64 {
    let dist = distance(a, b);
    if dist > 0.0 {
        (fa - fb).abs() / dist
    } else {
        0.0
    }
}

/// Central-difference gradient.
pub fn fd_gradient<F>(f: &F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Sampled lower bound on `Lip(f)` over the support of `sampler`.
pub fn empirical_lip_lower<F, S>(
    f: &F,
    dim: usize,
    sampler: S,
    cfg: &EmpiricalLipConfig,
    seed: u64,
) -> Result<EmpiricalLip>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
    S: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    let mut sampler = sampler;
    if cfg.n_pairs == 0 {
        return Err(LabError::Domain(
            "empirical Lipschitz estimate needs n_pairs >= 1".into(),
        ));
    }
    let mut rng = seed::rng(seed);
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut best = 0.0f64;
    let mut best_pair: Option<(Vec<f64>, f64, Vec<f64>, f64)> = None;
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for _ in 0..cfg.n_pairs {
        let a = sampler(&mut rng);
        let b = sampler(&mut rng);
        if a.len() != dim || b.len() != dim {
            return Err(LabError::Domain(format!(
                "sampler produced dimension {}, expected {dim}",
                a.len().max(b.len())
            )));
        }
        let fa = eval(&a, &mut evals);
        let fb = eval(&b, &mut evals);
        let r = ratio(fa, fb, &a, &b);
        if probes.len() < cfg.grad_probes {
            probes.push(a.clone());
        }
        if r > best || best_pair.is_none() {
            best = best.max(r);
            best_pair = Some((a, fa, b, fb));
        }
    }

    // bisection toward the steeper half of the best segment
    if let Some((mut a, mut fa, mut b, mut fb)) = best_pair {
        for _ in 0..cfg.refine_steps {
            let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
            if distance(&a, &mid) == 0.0 {
                break;
            }
            let fm = eval(&mid, &mut evals);
            let left = ratio(fa, fm, &a, &mid);
            let right = ratio(fm, fb, &mid, &b);
            if left >= right {
                b = mid;
                fb = fm;
                best = best.max(left);
            } else {
                a = mid;
                fa = fm;
                best = best.max(right);
            }
        }
        if probes.len() >= cfg.grad_probes && cfg.grad_probes > 0 {
            probes.pop();
        }
        if cfg.grad_probes > 0 {
            probes.insert(0, a);
        }
    }

    // secant along the finite-difference gradient direction
    let h = cfg.fd_step;
    for x in probes.iter().take(cfg.grad_probes) {
        let g = fd_gradient(f, x, h);
        evals += 2 * dim;
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            continue;
        }
        let up: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + h * gi / norm).collect();
        let down: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - h * gi / norm).collect();
        let fu = eval(&up, &mut evals);
        let fd = eval(&down, &mut evals);
        best = best.max(ratio(fu, fd, &up, &down));
    }
    Ok(EmpiricalLip {
        value: best,
        evaluations: evals,
    })
}

/// Largest singular value by power iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITERS: usize = 10_000;

fn power_run(gram: &DMatrix<f64>, start: DVector<f64>) -> (f64, usize, bool) {
    let mut v = start;
    let norm = v.norm();
    if norm == 0.0 {
        return (0.0, 0, true);
    }
    v /= norm;
    let mut lambda = 0.0;
    for it in 1..=POWER_MAX_ITERS {
        let w = gram * &v;
        let next = w.norm();
        if next == 0.0 {
            return (0.0, it, true);
        }
        v = w / next;
        if (next - lambda).abs() <= POWER_TOL * next {
            // Rayleigh quotient at the converged vector
            let rq = v.dot(&(gram * &v));
            return (rq.max(0.0), it, true);
        }
        lambda = next;
    }
    (lambda, POWER_MAX_ITERS, false)
}

/// `|M|_op` via power iteration on `M^T M` from a seeded start vector, with
/// one restart from a second seeded start. A run that hits the iteration cap
/// returns its best value with `converged = false`.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<OperatorNorm> {
    if m.is_empty() {
        return Err(LabError::Domain("operator norm of an empty matrix".into()));
    }
    if m.iter().all(|v| *v == 0.0) {
        return Ok(OperatorNorm {
            value: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let gram = m.tr_mul(m);
    let n = gram.nrows();
    let mut best = (0.0f64, 0usize, false);
    let mut total_iters = 0;
    let mut all_converged = true;
    for start_seed in [0x5EED_u64, 0xC0FFEE] {
        let mut rng = seed::rng(start_seed);
        let start = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let (lambda, iters, converged) = power_run(&gram, start);
        total_iters += iters;
        all_converged &= converged;
        if lambda >= best.0 {
            best = (lambda, iters, converged);
        }
    }
    Ok(OperatorNorm {
        value: best.0.sqrt(),
        iterations: total_iters,
        converged: all_converged,
    })
}

/// Operator norm of each assembled layer matrix.
pub fn layer_operator_norms(net: &NetFunction) -> Vec<OperatorNorm> {
    net.layers
        .iter()
        .map(|l| {
            operator_norm(&l.weights).unwrap_or(OperatorNorm {
                value: 0.0,
                iterations: 0,
                converged: true,
            })
        })
        .collect()
}

/// `B(w) = prod_j max(|W_j|_op, 1)`.
///
/// For chain networks (each layer reads only the layer below) this bounds
/// `Lip(x -> f_w(x))` because every nonlinearity is 1-Lipschitz. With skip
/// connections the concatenated state grows by `sqrt(1 + |W_j|^2)` per layer
/// and `B(w)` alone is no longer an upper bound; see [`skip_aware_bound`].
pub fn spectral_product_bound(net: &NetFunction) -> f64 {
    layer_operator_norms(net).iter().map(|n| n.value.max(1.0)).product()
}

/// `|W_D|_op * prod_{j<D} sqrt(1 + |W_j|_op^2)`: an upper bound on
/// `Lip(x -> f_w(x))` for any layered network, skip connections included.
pub fn skip_aware_bound(net: &NetFunction) -> f64 {
    let norms = layer_operator_norms(net);
    match norms.split_last() {
        None => 0.0,
        Some((last, rest)) => last.value * rest.iter().map(|n| (1.0 + n.value * n.value).sqrt()).product::<f64>(),
    }
}

/// Lower and upper Lipschitz estimates for one function.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub empirical_lower: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_upper: Option<f64>,
    pub probes_used: usize,
    pub warnings: Vec<String>,
}

/// Tolerance used for the lower <= upper sandwich.
pub const SANDWICH_TOL: f64 = 1e-6;

impl LipschitzEstimate {
    pub fn new(lower: EmpiricalLip) -> Self {
        Self {
            empirical_lower: lower.value,
            probes_used: lower.evaluations,
            ..Default::default()
        }
    }

    pub fn with_analytic(mut self, upper: f64) -> Self {
        self.analytic_upper = Some(upper);
        self.audit()
    }

    pub fn with_spectral(mut self, upper: f64) -> Self {
        self.spectral_upper = Some(upper);
        self.audit()
    }

    /// Tightest upper bound present.
    pub fn certified_upper(&self) -> Option<f64> {
        match (self.analytic_upper, self.spectral_upper) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn sandwich_holds(&self) -> bool {
        [self.analytic_upper, self.spectral_upper]
            .into_iter()
            .flatten()
            .all(|u| self.empirical_lower <= u + SANDWICH_TOL)
    }

    fn audit(mut self) -> Self {
        for (name, bound) in [("analytic", self.analytic_upper), ("spectral", self.spectral_upper)] {
            if let Some(u) = bound {
                let msg = format!(
                    "certification failure: empirical lower {} exceeds {name} upper {u}",
                    self.empirical_lower
                );
                if self.empirical_lower > u + SANDWICH_TOL && !self.warnings.contains(&msg) {
                    self.warnings.push(msg);
                }
            }
        }
        self
    }
}

/// Certifies a network: spectral product upper bound and sampled lower
/// bound over the ball of radius `radius`.
pub fn certify_network(
    net: &NetFunction,
    radius: f64,
    cfg: &EmpiricalLipConfig,
    seed: u64,
) -> Result<LipschitzEstimate> {
    let dim = net.input_dim;
    let f = |x: &[f64]| net.forward(x).unwrap_or(f64::NAN);
    let lower = empirical_lip_lower(
        &f,
        dim,
        |rng: &mut ChaCha8Rng| crate::netzoo::sample_ball(dim, radius, rng),
        cfg,
        seed,
    )?;
    let mut est = LipschitzEstimate::new(lower);
    let norms = layer_operator_norms(net);
    if norms.iter().any(|n| !n.converged) {
        est.warnings
            .push("power iteration hit its cap; operator norm is a flagged estimate".into());
    }
    Ok(est.with_spectral(spectral_product_bound(net)))
}

/// Certifies a sum-of-bumps interpolator: analytic upper bound and a lower
/// bound sampled near the centers in the projected space. The projection has
/// orthonormal rows, so the Lipschitz constant there equals that of `x -> f(Px)`.
pub fn certify_interpolator(
    f: &crate::interp::SmoothInterpolator,
    cfg: &EmpiricalLipConfig,
    seed: u64,
) -> Result<LipschitzEstimate> {
    let dim = f.inner_dim();
    if f.centers.is_empty() {
        return Ok(LipschitzEstimate::default().with_analytic(0.0));
    }
    let lower = empirical_lip_lower(
        &|z: &[f64]| f.evaluate_inner(z),
        dim,
        |rng: &mut ChaCha8Rng| f.sample_near_centers(rng),
        cfg,
        seed,
    )?;
    Ok(LipschitzEstimate::new(lower).with_analytic(f.analytic_lip()))
}

/// Uniform sampler on `[-half, half]^dim`, handy for generic functions.
pub fn box_sampler(dim: usize, half: f64) -> impl FnMut(&mut ChaCha8Rng) -> Vec<f64> {
    move |rng: &mut ChaCha8Rng| (0..dim).map(|_| rng.random_range(-half..=half)).collect()
}
