use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bump::BumpFunction;
use crate::error::{LabError, Result};
use crate::isodist::{distance, min_pairwise_distance, Dataset};
use crate::seed;

/// How the bump radius is chosen at construction time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum RadiusPolicy {
    /// `r = min_sep / 2`: disjoint supports, exact Lipschitz constant.
    #[default]
    HalfMinSep,
    Fixed {
        r: f64,
    },
    /// `r = min(kappa * sqrt(d_tilde / d), min_sep / 2)`: the radius follows
    /// the typical projected separation rather than the sample minimum.
    SeparationScaled {
        kappa: f64,
    },
}

/// Smallest projected dimension accepted for `n` points: `ceil(4 ln n)`, at least 1.
pub fn min_projected_dim(n: usize) -> usize {
    ((4.0 * (n as f64).ln()).ceil() as usize).max(1)
}

/// Sum of radial bumps `f(x) = sum_i y_i g(|P x - c_i| / r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothInterpolator {
    /// Ambient input dimension `d`.
    pub input_dim: usize,
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub radius: f64,
    pub bump: BumpFunction,
    /// `d_tilde x d` with orthonormal rows; `None` means the identity.
    pub projection: Option<DMatrix<f64>>,
}

impl SmoothInterpolator {
    pub fn new(
        input_dim: usize,
        centers: Vec<Vec<f64>>,
        labels: Vec<f64>,
        radius: f64,
        projection: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        if centers.len() != labels.len() {
            return Err(LabError::Construction(format!(
                "{} centers but {} labels",
                centers.len(),
                labels.len()
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(LabError::Construction(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if labels.iter().any(|y| !(-1.0..=1.0).contains(y)) {
            return Err(LabError::Construction("labels must lie in [-1, 1]".into()));
        }
        let inner = match &projection {
            Some(p) => {
                if p.ncols() != input_dim {
                    return Err(LabError::Construction(format!(
                        "projection has {} columns, input dimension is {input_dim}",
                        p.ncols()
                    )));
                }
                p.nrows()
            }
            None => input_dim,
        };
        if centers.iter().any(|c| c.len() != inner) {
            return Err(LabError::Construction(format!("centers must have dimension {inner}")));
        }
        Ok(Self {
            input_dim,
            centers,
            labels,
            radius,
            bump: BumpFunction::cubic(),
            projection,
        })
    }

    /// Dimension `d_tilde` of the space the bumps live in.
    pub fn inner_dim(&self) -> usize {
        self.projection.as_ref().map_or(self.input_dim, |p| p.nrows())
    }

    /// `m (d_tilde + 1)`.
    pub fn param_count(&self) -> usize {
        self.centers.len() * (self.inner_dim() + 1)
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(LabError::Domain(format!(
                "input has dimension {}, interpolator expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(match &self.projection {
            Some(p) => (p * DVector::from_column_slice(x)).as_slice().to_vec(),
            None => x.to_vec(),
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let z = self.project(x)?;
        Ok(self.evaluate_inner(&z))
    }

    /// Output clipped to `[-1, 1]`; clipping does not raise the Lipschitz constant.
    pub fn evaluate_clipped(&self, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x)?.clamp(-1.0, 1.0))
    }

    /// Evaluates the bump sum at an already projected point.
    pub fn evaluate_inner(&self, z: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.labels)
            .map(|(c, y)| {
                let a = distance(z, c) / self.radius;
                if a >= 1.0 {
                    0.0
                } else {
                    y * self.bump.value(a)
                }
            })
            .sum()
    }

    /// Largest number of supports that can overlap at one point, bounded by
    /// one plus the maximum number of centers within `2r` of a center.
    pub fn overlap_multiplicity(&self) -> usize {
        let reach = 2.0 * self.radius;
        (0..self.centers.len())
            .map(|i| {
                1 + (0..self.centers.len())
                    .filter(|&j| j != i && distance(&self.centers[i], &self.centers[j]) < reach)
                    .count()
            })
            .max()
            .unwrap_or(0)
    }

    /// Certified upper bound on `Lip(x -> f(x))`; exact when supports are disjoint.
    pub fn analytic_lip(&self) -> f64 {
        let per_bump = self.bump.lip_g / self.radius;
        if self.centers.is_empty() {
            return 0.0;
        }
        per_bump * self.overlap_multiplicity().max(1) as f64
    }

    /// Point at distance `U * r` (U uniform) from a random center, in the
    /// projected space. Lipschitz probes sampled here see the bump slopes.
    pub fn sample_near_centers<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let dim = self.inner_dim();
        let i = rng.random_range(0..self.centers.len());
        let mut dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let rad = rng.random::<f64>() * self.radius;
        dir.iter_mut().for_each(|v| *v *= rad / norm);
        self.centers[i].iter().zip(&dir).map(|(c, v)| c + v).collect()
    }

    /// Maximum deviation from orthonormality of the projection rows.
    pub fn projection_orthonormality_error(&self) -> f64 {
        match &self.projection {
            None => 0.0,
            Some(p) => {
                let gram = p * p.transpose();
                let eye = DMatrix::<f64>::identity(p.nrows(), p.nrows());
                (gram - eye).abs().max()
            }
        }
    }

    pub fn to_wire(&self) -> InterpolatorWire {
        InterpolatorWire {
            d: self.input_dim,
            d_tilde: self.inner_dim(),
            r: self.radius,
            lip_g: self.bump.lip_g,
            param_count: self.param_count(),
            projection: self.projection.as_ref().map(|p| {
                let mut out = Vec::with_capacity(p.len());
                for i in 0..p.nrows() {
                    out.extend(p.row(i).iter());
                }
                out
            }),
            centers: self.centers.iter().flatten().copied().collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_wire(w: &InterpolatorWire) -> Result<Self> {
        let projection = match &w.projection {
            Some(flat) => {
                if flat.len() != w.d_tilde * w.d {
                    return Err(LabError::Config("projection length does not match d_tilde * d".into()));
                }
                Some(DMatrix::from_row_slice(w.d_tilde, w.d, flat))
            }
            None => {
                if w.d_tilde != w.d {
                    return Err(LabError::Config("d_tilde differs from d without a projection".into()));
                }
                None
            }
        };
        if w.d_tilde == 0 || w.centers.len() != w.labels.len() * w.d_tilde {
            return Err(LabError::Config(
                "centers length does not match labels * d_tilde".into(),
            ));
        }
        let centers = w.centers.chunks(w.d_tilde).map(<[f64]>::to_vec).collect();
        let mut out = Self::new(w.d, centers, w.labels.clone(), w.r, projection)?;
        out.bump.lip_g = w.lip_g;
        Ok(out)
    }
}

/// JSON form: `{d, d_tilde, r, lip_g, param_count, projection?, centers, labels}`,
/// matrices row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolatorWire {
    pub d: usize,
    pub d_tilde: usize,
    pub r: f64,
    pub lip_g: f64,
    pub param_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Vec<f64>>,
    pub centers: Vec<f64>,
    pub labels: Vec<f64>,
}

fn choose_radius(policy: RadiusPolicy, min_sep: f64, d_tilde: usize, d: usize) -> Result<f64> {
    let r = match policy {
        RadiusPolicy::Fixed { r } => r,
        RadiusPolicy::HalfMinSep => min_sep / 2.0,
        RadiusPolicy::SeparationScaled { kappa } => {
            if !(kappa > 0.0) {
                return Err(LabError::Config(format!("kappa must be positive, got {kappa}")));
            }
            (kappa * (d_tilde as f64 / d as f64).sqrt()).min(min_sep / 2.0)
        }
    };
    if !r.is_finite() {
        return Err(LabError::Construction(
            "a single point has no separation; use a fixed radius".into(),
        ));
    }
    if !(r > 0.0) {
        return Err(LabError::Construction(format!("radius must be positive, got {r}")));
    }
    Ok(r)
}

fn separation<V: AsRef<[f64]>>(points: &[V]) -> Result<f64> {
    if points.len() < 2 {
        return Ok(f64::INFINITY);
    }
    let sep = min_pairwise_distance(points)?;
    if sep == 0.0 {
        return Err(LabError::Construction(
            "duplicate covariates cannot be interpolated".into(),
        ));
    }
    Ok(sep)
}

/// Unprojected sum-of-bumps through every `(x_i, y_i)`.
pub fn build_bump_interpolator(ds: &Dataset, policy: RadiusPolicy) -> Result<SmoothInterpolator> {
    let d = ds.d();
    let sep = separation(&ds.x)?;
    let r = choose_radius(policy, sep, d, d)?;
    SmoothInterpolator::new(d, ds.x.clone(), ds.y.clone(), r, None)
}

/// Random orthonormal `d_tilde x d` matrix: transposed thin-QR factor of a
/// seeded Gaussian `d x d_tilde` matrix.
pub fn random_projection(d_tilde: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seed::rng(seed);
    let g = DMatrix::<f64>::from_fn(d, d_tilde, |_, _| StandardNormal.sample(&mut rng));
    g.qr().q().transpose()
}

/// Projected dimension used for a parameter budget: the largest `d_tilde`
/// with `n (d_tilde + 1) <= p_budget`.
pub fn projected_dim_for_budget(n: usize, p_budget: usize) -> usize {
    (p_budget / n.max(1)).saturating_sub(1)
}

/// Sum-of-bumps on the data projected to `d_tilde` dimensions.
pub fn build_projected_with_dim(
    ds: &Dataset,
    d_tilde: usize,
    seed: u64,
    policy: RadiusPolicy,
) -> Result<SmoothInterpolator> {
    let n = ds.n();
    let d = ds.d();
    let floor = min_projected_dim(n);
    if d_tilde < floor {
        return Err(LabError::Refusal(format!(
            "projected dimension {d_tilde} is below the log-n floor ceil(4 ln {n}) = {floor}"
        )));
    }
    if d_tilde > d {
        return Err(LabError::Refusal(format!(
            "projected dimension {d_tilde} exceeds d = {d}"
        )));
    }
    if d_tilde == d {
        return build_bump_interpolator(ds, policy);
    }
    let p = random_projection(d_tilde, d, seed);
    let centers: Vec<Vec<f64>> =
        ds.x.iter()
            .map(|x| (&p * DVector::from_column_slice(x)).as_slice().to_vec())
            .collect();
    let sep = separation(&centers)?;
    let r = choose_radius(policy, sep, d_tilde, d)?;
    SmoothInterpolator::new(d, centers, ds.y.clone(), r, Some(p))
}

/// Budgeted variant: `d_tilde` is derived from `p_budget` so that the
/// parameter count never exceeds it.
pub fn build_projected_interpolator(
    ds: &Dataset,
    p_budget: usize,
    seed: u64,
    policy: RadiusPolicy,
) -> Result<SmoothInterpolator> {
    build_projected_with_dim(ds, projected_dim_for_budget(ds.n(), p_budget), seed, policy)
}
