use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Deterministic part of a label model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Zero,
    /// `sign(x[coord])`, with `sign(0) = 1`.
    Sign {
        coord: usize,
    },
    /// `amplitude * sin(freq * x[coord])`.
    Sine {
        coord: usize,
        freq: f64,
        amplitude: f64,
    },
}

impl Target {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Target::Zero => 0.0,
            Target::Sign { coord } => {
                if x[coord] >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Target::Sine { coord, freq, amplitude } => amplitude * (freq * x[coord]).sin(),
        }
    }

    /// Supremum of `|target|` over all of `R^d`.
    pub fn sup_abs(&self) -> f64 {
        match *self {
            Target::Zero => 0.0,
            Target::Sign { .. } => 1.0,
            Target::Sine { amplitude, .. } => amplitude.abs(),
        }
    }

    fn coord(&self) -> Option<usize> {
        match *self {
            Target::Zero => None,
            Target::Sign { coord } | Target::Sine { coord, .. } => Some(coord),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelKind {
    /// Labels uniform on `{-1, 1}` independent of `x`.
    PureNoise,
    /// `y = target(x)` with probability `1 - flip_prob`, else `-target(x)`.
    /// The target must be `{-1, 1}`-valued.
    FlipNoise { target: Target, flip_prob: f64 },
    /// `y = target(x) + u` with `u` uniform on `[-noise_scale, noise_scale]`.
    AdditiveNoise { target: Target, noise_scale: f64 },
}

/// A label model together with its exact noise level `E[Var[y|x]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelModel {
    #[serde(flatten)]
    pub kind: LabelKind,
    pub sigma_sq: f64,
}

impl LabelModel {
    pub fn new(kind: LabelKind) -> Result<Self> {
        let sigma_sq = match &kind {
            LabelKind::PureNoise => 1.0,
            LabelKind::FlipNoise { target, flip_prob } => {
                if !matches!(target, Target::Sign { .. }) {
                    return Err(LabError::Config(
                        "flip noise needs a {-1,1}-valued target (sign)".into(),
                    ));
                }
                if !(0.0..=1.0).contains(flip_prob) {
                    return Err(LabError::Config(format!("flip probability {flip_prob} outside [0,1]")));
                }
                4.0 * flip_prob * (1.0 - flip_prob)
            }
            LabelKind::AdditiveNoise { target, noise_scale } => {
                if !(*noise_scale >= 0.0) {
                    return Err(LabError::Config(format!("noise scale {noise_scale} is negative")));
                }
                // no clipping: the label range must already sit inside [-1, 1]
                if target.sup_abs() + noise_scale > 1.0 + 1e-12 {
                    return Err(LabError::Config(format!(
                        "sup|target| + noise_scale = {} exceeds 1",
                        target.sup_abs() + noise_scale
                    )));
                }
                noise_scale * noise_scale / 3.0
            }
        };
        Ok(Self { kind, sigma_sq })
    }

    pub fn pure_noise() -> Self {
        Self {
            kind: LabelKind::PureNoise,
            sigma_sq: 1.0,
        }
    }

    pub fn flip(coord: usize, flip_prob: f64) -> Result<Self> {
        Self::new(LabelKind::FlipNoise {
            target: Target::Sign { coord },
            flip_prob,
        })
    }

    pub fn additive(target: Target, noise_scale: f64) -> Result<Self> {
        Self::new(LabelKind::AdditiveNoise { target, noise_scale })
    }

    /// Re-derives `sigma_sq` from the kind, e.g. after deserialization.
    pub fn checked(self) -> Result<Self> {
        let fresh = Self::new(self.kind.clone())?;
        if (fresh.sigma_sq - self.sigma_sq).abs() > 1e-12 {
            return Err(LabError::Config(format!(
                "sigma_sq {} inconsistent with label kind (expected {})",
                self.sigma_sq, fresh.sigma_sq
            )));
        }
        Ok(fresh)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let coord = match &self.kind {
            LabelKind::PureNoise => None,
            LabelKind::FlipNoise { target, .. } | LabelKind::AdditiveNoise { target, .. } => target.coord(),
        };
        match coord {
            Some(c) if c >= dim => Err(LabError::Config(format!(
                "label target reads coordinate {c} but dimension is {dim}"
            ))),
            _ => Ok(()),
        }
    }

    /// `g(x) = E[y | x]`.
    pub fn conditional_mean(&self, x: &[f64]) -> f64 {
        match &self.kind {
            LabelKind::PureNoise => 0.0,
            LabelKind::FlipNoise { target, flip_prob } => (1.0 - 2.0 * flip_prob) * target.eval(x),
            LabelKind::AdditiveNoise { target, .. } => target.eval(x),
        }
    }

    pub fn sample_label<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        match &self.kind {
            LabelKind::PureNoise => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            LabelKind::FlipNoise { target, flip_prob } => {
                let t = target.eval(x);
                if rng.random::<f64>() < *flip_prob {
                    -t
                } else {
                    t
                }
            }
            LabelKind::AdditiveNoise { target, noise_scale } => {
                let u = if *noise_scale > 0.0 {
                    rng.random_range(-noise_scale..=*noise_scale)
                } else {
                    0.0
                };
                (target.eval(x) + u).clamp(-1.0, 1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn flip_noise_level() {
        let m = LabelModel::flip(0, 0.2).unwrap();
        assert!((m.sigma_sq - 0.64).abs() < 1e-15);
        assert!((LabelModel::flip(0, 0.5).unwrap().sigma_sq - 1.0).abs() < 1e-15);
        assert_eq!(LabelModel::flip(0, 0.0).unwrap().sigma_sq, 0.0);
    }

    #[test]
    fn flip_noise_needs_sign_target() {
        let kind = LabelKind::FlipNoise {
            target: Target::Zero,
            flip_prob: 0.1,
        };
        assert!(LabelModel::new(kind).is_err());
        assert!(LabelModel::flip(0, 1.2).is_err());
    }

    #[test]
    fn additive_noise_refuses_clipping() {
        let target = Target::Sine {
            coord: 0,
            freq: 3.0,
            amplitude: 0.6,
        };
        assert!(LabelModel::additive(target.clone(), 0.5).is_err());
        let ok = LabelModel::additive(target, 0.3).unwrap();
        assert!((ok.sigma_sq - 0.03).abs() < 1e-15);
    }

    #[test]
    fn labels_stay_in_range() {
        let models = [
            LabelModel::pure_noise(),
            LabelModel::flip(1, 0.3).unwrap(),
            LabelModel::additive(
                Target::Sine {
                    coord: 2,
                    freq: 5.0,
                    amplitude: 0.5,
                },
                0.5,
            )
            .unwrap(),
        ];
        let mut rng = seed::rng(5);
        for m in &models {
            for _ in 0..2000 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
                let y = m.sample_label(&x, &mut rng);
                assert!((-1.0..=1.0).contains(&y));
            }
        }
    }

    #[test]
    fn noise_is_conditionally_centered() {
        // fixed x, many draws: the empirical mean of z = y - g(x) is near 0
        let x = [0.3, -0.4];
        let models = [
            LabelModel::pure_noise(),
            LabelModel::flip(1, 0.2).unwrap(),
            LabelModel::additive(
                Target::Sine {
                    coord: 0,
                    freq: 2.0,
                    amplitude: 0.4,
                },
                0.5,
            )
            .unwrap(),
        ];
        let mut rng = seed::rng(21);
        let draws = 100_000;
        for m in &models {
            let g = m.conditional_mean(&x);
            let mean_z = (0..draws).map(|_| m.sample_label(&x, &mut rng) - g).sum::<f64>() / draws as f64;
            // |z| <= 2, Hoeffding at 1e-6 confidence: 2*sqrt(2 ln(2e6)/n) ~ 0.034
            assert!(mean_z.abs() < 0.034, "{mean_z}");
        }
    }

    #[test]
    fn serde_carries_sigma() {
        let m = LabelModel::flip(0, 0.2).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"sigma_sq\""));
        let back: LabelModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back.checked().unwrap(), m);
    }
}
