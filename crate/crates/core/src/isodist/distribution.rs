use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    /// Uniform on the unit sphere `S^{d-1}`.
    Sphere,
    /// Centered Gaussian with covariance `I_d / d`.
    Gaussian,
    /// Uniform on the centered hypercube of side `1/sqrt(d)` (diameter 1).
    Cube,
}

impl ComponentKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sphere" => Ok(Self::Sphere),
            "gaussian" => Ok(Self::Gaussian),
            "cube" => Ok(Self::Cube),
            other => Err(LabError::Config(format!("unknown distribution kind `{other}`"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Sphere => loop {
                let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter_mut().for_each(|a| *a /= norm);
                    break v;
                }
            },
            Self::Gaussian => {
                let scale = 1.0 / (dim as f64).sqrt();
                (0..dim)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        scale * z
                    })
                    .collect()
            }
            Self::Cube => {
                let half = 0.5 / (dim as f64).sqrt();
                (0..dim).map(|_| rng.random_range(-half..=half)).collect()
            }
        }
    }

    /// Support membership with absolute tolerance `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let dim = x.len() as f64;
        match self {
            Self::Sphere => (x.iter().map(|a| a * a).sum::<f64>().sqrt() - 1.0).abs() <= tol,
            Self::Gaussian => x.iter().all(|a| a.is_finite()),
            Self::Cube => {
                let half = 0.5 / dim.sqrt();
                x.iter().all(|a| a.abs() <= half + tol)
            }
        }
    }

    /// Radius of the smallest centered ball holding the support, if bounded.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Self::Sphere => Some(1.0),
            Self::Cube => Some(0.5),
            Self::Gaussian => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub dim: usize,
    /// Isoperimetry constant.
    pub c: f64,
    pub weight: f64,
}

impl Component {
    pub fn new(kind: ComponentKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            c: 1.0,
            weight: 1.0,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// A finite mixture of isoperimetric components sharing one ambient dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub components: Vec<Component>,
}

impl DistributionSpec {
    pub fn single(kind: ComponentKind, dim: usize) -> Self {
        Self {
            components: vec![Component::new(kind, dim)],
        }
    }

    pub fn mixture(components: Vec<Component>) -> Result<Self> {
        let spec = Self { components };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .components
            .first()
            .ok_or_else(|| LabError::Config("mixture has no components".into()))?;
        if first.dim == 0 {
            return Err(LabError::Config("dimension must be positive".into()));
        }
        let mut total = 0.0;
        for comp in &self.components {
            if comp.dim != first.dim {
                return Err(LabError::Config(format!(
                    "mixture components disagree on dimension ({} vs {})",
                    comp.dim, first.dim
                )));
            }
            if !(comp.weight >= 0.0) || !comp.weight.is_finite() {
                return Err(LabError::Config(format!("invalid mixture weight {}", comp.weight)));
            }
            if !(comp.c > 0.0) || !comp.c.is_finite() {
                return Err(LabError::Config(format!("invalid isoperimetry constant {}", comp.c)));
            }
            total += comp.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(LabError::Config(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.dim)
    }

    /// Number of mixture components `k`.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Largest isoperimetry constant over the components.
    pub fn c_max(&self) -> f64 {
        self.components.iter().map(|c| c.c).fold(0.0, f64::max)
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.components
            .iter()
            .map(|c| c.kind.support_radius())
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
    }

    /// Draws a component index by weight, then a point from that component.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Vec<f64>) {
        let index = if self.components.len() == 1 {
            0
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.components.len() - 1;
            for (i, comp) in self.components.iter().enumerate() {
                acc += comp.weight;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        };
        let comp = &self.components[index];
        (index, comp.kind.sample(comp.dim, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn rejects_bad_weights() {
        let bad = vec![
            Component::new(ComponentKind::Sphere, 3).with_weight(0.7),
            Component::new(ComponentKind::Cube, 3).with_weight(0.7),
        ];
        assert!(DistributionSpec::mixture(bad).unwrap_err().is_config());
        let negative = vec![
            Component::new(ComponentKind::Sphere, 3).with_weight(1.5),
            Component::new(ComponentKind::Cube, 3).with_weight(-0.5),
        ];
        assert!(DistributionSpec::mixture(negative).is_err());
        assert!(DistributionSpec::mixture(vec![]).is_err());
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let comps = vec![
            Component::new(ComponentKind::Sphere, 3).with_weight(0.5),
            Component::new(ComponentKind::Cube, 4).with_weight(0.5),
        ];
        assert!(DistributionSpec::mixture(comps).is_err());
    }

    #[test]
    fn samples_land_in_support() {
        let mut rng = seed::rng(3);
        for kind in [ComponentKind::Sphere, ComponentKind::Gaussian, ComponentKind::Cube] {
            for _ in 0..200 {
                let x = kind.sample(17, &mut rng);
                assert_eq!(x.len(), 17);
                assert!(kind.contains(&x, 1e-12));
            }
        }
    }

    #[test]
    fn cube_has_unit_diameter() {
        let d = 9usize;
        let half = 0.5 / (d as f64).sqrt();
        let diag = (d as f64 * (2.0 * half).powi(2)).sqrt();
        assert!((diag - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_frequencies_follow_weights() {
        let spec = DistributionSpec::mixture(vec![
            Component::new(ComponentKind::Sphere, 2).with_weight(0.25),
            Component::new(ComponentKind::Cube, 2).with_weight(0.75),
        ])
        .unwrap();
        let mut rng = seed::rng(11);
        let n = 40_000;
        let hits = (0..n).filter(|_| spec.sample_point(&mut rng).0 == 0).count();
        let frac = hits as f64 / n as f64;
        // 5 sd of a Bernoulli(0.25) mean at n = 40k is about 0.011
        assert!((frac - 0.25).abs() < 0.011, "{frac}");
    }
}
