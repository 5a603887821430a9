use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::arch::Architecture;
use super::net::{materialize, mse_and_gradient};
use crate::error::{LabError, Result};
use crate::isodist::Dataset;
use crate::seed;

/// Loss above which a run is declared divergent.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub lr: f64,
    pub max_steps: usize,
    pub seed: u64,
    /// Measure the fit with outputs clamped to `[-1, 1]`.
    pub clip_outputs: bool,
    /// Project onto `[-W, W]^p` after every step.
    pub box_constraint: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            lr: 0.1,
            max_steps: 5000,
            seed: 0,
            clip_outputs: false,
            box_constraint: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub w: Vec<f64>,
    /// Loss before each update; `trace[0]` is the loss at initialization and
    /// the last entry is the loss of the returned `w`.
    pub trace: Vec<f64>,
    pub steps: usize,
    pub reached_target: bool,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// `step,loss` CSV for a loss trace.
pub fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("step,loss\n");
    for (i, loss) in trace.iter().enumerate() {
        let _ = writeln!(out, "{i},{loss}");
    }
    out
}

/// Full-batch gradient descent on the squared loss, starting from a seeded
/// initialization.
pub fn train_to_threshold(
    arch: &Architecture,
    ds: &Dataset,
    target_mse: f64,
    opts: TrainOptions,
) -> Result<TrainOutcome> {
    let mut rng = seed::rng(opts.seed);
    let w0 = arch.init_params(&mut rng);
    train_from(arch, ds, w0, target_mse, opts)
}

/// Same as [`train_to_threshold`] from a caller-supplied starting point.
pub fn train_from(
    arch: &Architecture,
    ds: &Dataset,
    mut w: Vec<f64>,
    target_mse: f64,
    opts: TrainOptions,
) -> Result<TrainOutcome> {
    if !(target_mse > 0.0 && target_mse <= 1.0) {
        return Err(LabError::Domain(format!("target mse {target_mse} outside (0, 1]")));
    }
    if ds.d() != arch.input_dim {
        return Err(LabError::Domain(format!(
            "dataset dimension {} differs from network input {}",
            ds.d(),
            arch.input_dim
        )));
    }
    if opts.box_constraint {
        project_box(&mut w, arch.w_bound);
    }
    let mut trace = Vec::new();
    for step in 0..=opts.max_steps {
        let net = materialize(arch, &w)?;
        let (loss, grad) = mse_and_gradient(arch, &net, &ds.x, &ds.y, opts.clip_outputs)?;
        trace.push(loss);
        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            return Err(LabError::Training { step, loss, trace });
        }
        if loss <= target_mse {
            return Ok(TrainOutcome {
                w,
                trace,
                steps: step,
                reached_target: true,
            });
        }
        if step == opts.max_steps {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= opts.lr * gi;
        }
        if opts.box_constraint {
            project_box(&mut w, arch.w_bound);
        }
    }
    Ok(TrainOutcome {
        w,
        trace,
        steps: opts.max_steps,
        reached_target: false,
    })
}

fn project_box(w: &mut [f64], bound: f64) {
    w.iter_mut().for_each(|v| *v = v.clamp(-bound, bound));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isodist::{sample_dataset, ComponentKind, DistributionSpec, LabelModel};
    use crate::netzoo::arch::Activation;

    fn data() -> Dataset {
        let spec = DistributionSpec::single(ComponentKind::Sphere, 4);
        sample_dataset(&spec, &LabelModel::flip(0, 0.2).unwrap(), 16, 3).unwrap()
    }

    #[test]
    fn exact_fit_returns_immediately() {
        let arch = Architecture::feedforward(4, &[3], Activation::Relu, true, 1.0, 1.0).unwrap();
        let mut ds = data();
        let net = materialize(&arch, &vec![0.0; arch.p()]).unwrap();
        ds.y = ds.x.iter().map(|x| net.forward(x).unwrap()).collect();
        let out = train_from(&arch, &ds, vec![0.0; arch.p()], 0.01, TrainOptions::default()).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.trace.len(), 1);
        assert!(out.reached_target);
    }

    #[test]
    fn zero_learning_rate_keeps_loss_flat() {
        let arch = Architecture::feedforward(4, &[8], Activation::Tanh, true, 1.0, 1.0).unwrap();
        let opts = TrainOptions {
            lr: 0.0,
            max_steps: 20,
            ..Default::default()
        };
        let out = train_to_threshold(&arch, &data(), 1e-9, opts).unwrap();
        assert_eq!(out.trace.len(), 21);
        assert!(out.trace.iter().all(|l| *l == out.trace[0]));
        assert!(!out.reached_target);
    }

    #[test]
    fn huge_learning_rate_diverges_with_trace() {
        let arch = Architecture::feedforward(4, &[8], Activation::Relu, true, 1.0, 1.0).unwrap();
        let opts = TrainOptions {
            lr: 1e3,
            max_steps: 200,
            ..Default::default()
        };
        match train_to_threshold(&arch, &data(), 1e-9, opts) {
            Err(LabError::Training { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn loss_decreases_and_box_is_respected() {
        let arch = Architecture::feedforward(4, &[16], Activation::Relu, true, 0.5, 1.0).unwrap();
        let opts = TrainOptions {
            lr: 0.1,
            max_steps: 300,
            box_constraint: true,
            ..Default::default()
        };
        let out = train_to_threshold(&arch, &data(), 1e-6, opts).unwrap();
        assert!(out.final_loss() < out.trace[0]);
        assert!(out.w.iter().all(|v| v.abs() <= 0.5));
    }

    #[test]
    fn rejects_bad_target() {
        let arch = Architecture::feedforward(4, &[2], Activation::Relu, true, 1.0, 1.0).unwrap();
        assert!(train_to_threshold(&arch, &data(), 0.0, TrainOptions::default()).is_err());
        assert!(train_to_threshold(&arch, &data(), 1.5, TrainOptions::default()).is_err());
    }

    #[test]
    fn trace_csv_header() {
        assert_eq!(trace_csv(&[1.0, 0.5]), "step,loss\n0,1\n1,0.5\n");
    }
}
