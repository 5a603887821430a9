use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::distribution::DistributionSpec;
use super::labels::LabelModel;
use crate::error::{LabError, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Covariates, one row per sample.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Mixture component each row was drawn from.
    pub components: Vec<usize>,
    pub spec: DistributionSpec,
    pub label_model: LabelModel,
    pub seed: u64,
}

/// JSON companion written next to the dataset CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub n: usize,
    pub d: usize,
    pub spec: DistributionSpec,
    pub label_model: LabelModel,
    pub sigma_sq: f64,
    pub seed: u64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn d(&self) -> usize {
        self.spec.dim()
    }

    pub fn sidecar(&self) -> DatasetSidecar {
        DatasetSidecar {
            n: self.n(),
            d: self.d(),
            spec: self.spec.clone(),
            label_model: self.label_model.clone(),
            sigma_sq: self.label_model.sigma_sq,
            seed: self.seed,
        }
    }

    /// CSV with header `x_0,...,x_{d-1},y`. Floats use the shortest
    /// round-trip representation.
    pub fn to_csv(&self) -> String {
        let d = self.d();
        let mut out = String::new();
        let header: Vec<String> = (0..d).map(|j| format!("x_{j}")).chain(["y".to_string()]).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (row, y) in self.x.iter().zip(&self.y) {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{y}");
        }
        out
    }

    /// Writes `<path>` (CSV) and `<path>.json` (sidecar).
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        fs::write(csv_path, self.to_csv())?;
        let sidecar = serde_json::to_string_pretty(&self.sidecar())?;
        fs::write(sidecar_path(csv_path), sidecar)?;
        Ok(())
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let sidecar: DatasetSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
        let (x, y) = parse_csv(&fs::read_to_string(csv_path)?)?;
        if x.len() != sidecar.n || x.first().map_or(0, Vec::len) != sidecar.d {
            return Err(LabError::Config(format!(
                "csv shape {}x{} disagrees with sidecar {}x{}",
                x.len(),
                x.first().map_or(0, Vec::len),
                sidecar.n,
                sidecar.d
            )));
        }
        sidecar.spec.validate()?;
        let label_model = sidecar.label_model.checked()?;
        Ok(Self {
            components: vec![0; x.len()],
            x,
            y,
            spec: sidecar.spec,
            label_model,
            seed: sidecar.seed,
        })
    }

    /// `z_i = y_i - g(x_i)`.
    pub fn noise(&self) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(x, y)| y - self.label_model.conditional_mean(x))
            .collect()
    }
}

pub fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    let mut p = csv_path.as_os_str().to_owned();
    p.push(".json");
    p.into()
}

fn parse_csv(text: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| LabError::Config("empty dataset csv".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.last() != Some(&"y") {
        return Err(LabError::Config("dataset csv header must end with `y`".into()));
    }
    let d = cols.len() - 1;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| LabError::Config(format!("row {}: {e}", lineno + 1)))?;
        if vals.len() != d + 1 {
            return Err(LabError::Config(format!(
                "row {} has {} fields, expected {}",
                lineno + 1,
                vals.len(),
                d + 1
            )));
        }
        y.push(vals[d]);
        x.push(vals[..d].to_vec());
    }
    Ok((x, y))
}

/// Draws `n` i.i.d. labelled points: component by weight, covariate from the
/// component, label from the model.
pub fn sample_dataset(spec: &DistributionSpec, model: &LabelModel, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(LabError::Domain("dataset needs n >= 1".into()));
    }
    spec.validate()?;
    model.check_dim(spec.dim())?;
    let mut rng = seed::rng(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut components = Vec::with_capacity(n);
    for _ in 0..n {
        let (comp, point) = spec.sample_point(&mut rng);
        y.push(model.sample_label(&point, &mut rng));
        x.push(point);
        components.push(comp);
    }
    Ok(Dataset {
        x,
        y,
        components,
        spec: spec.clone(),
        label_model: model.clone(),
        seed,
    })
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Exact minimum pairwise Euclidean distance by dense enumeration.
pub fn min_pairwise_distance<V: AsRef<[f64]>>(rows: &[V]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(LabError::Domain(
            "min pairwise distance needs at least two points".into(),
        ));
    }
    let mut best = f64::INFINITY;
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            best = best.min(distance(rows[i].as_ref(), rows[j].as_ref()));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isodist::{ComponentKind, LabelModel};

    #[test]
    fn sphere_pair_example() {
        let spec = DistributionSpec::single(ComponentKind::Sphere, 3);
        let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 2, 7).unwrap();
        for (row, y) in ds.x.iter().zip(&ds.y) {
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(*y == 1.0 || *y == -1.0);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = DistributionSpec::single(ComponentKind::Gaussian, 5);
        let m = LabelModel::flip(0, 0.2).unwrap();
        let a = sample_dataset(&spec, &m, 50, 99).unwrap();
        let b = sample_dataset(&spec, &m, 50, 99).unwrap();
        let c = sample_dataset(&spec, &m, 50, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn zero_rows_is_an_error() {
        let spec = DistributionSpec::single(ComponentKind::Sphere, 3);
        assert!(sample_dataset(&spec, &LabelModel::pure_noise(), 0, 1).is_err());
    }

    #[test]
    fn label_target_must_fit_dimension() {
        let spec = DistributionSpec::single(ComponentKind::Sphere, 3);
        let m = LabelModel::flip(5, 0.2).unwrap();
        assert!(sample_dataset(&spec, &m, 4, 1).unwrap_err().is_config());
    }

    #[test]
    fn min_distance_examples() {
        let antipodal = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]];
        assert_eq!(min_pairwise_distance(&antipodal).unwrap(), 2.0);
        let same = vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![1.0, 0.0]];
        assert_eq!(min_pairwise_distance(&same).unwrap(), 0.0);
        assert!(min_pairwise_distance(&[vec![1.0]]).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let spec = DistributionSpec::single(ComponentKind::Cube, 4);
        let ds = sample_dataset(&spec, &LabelModel::flip(2, 0.1).unwrap(), 12, 3).unwrap();
        ds.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x_0,x_1,x_2,x_3,y\n"));
        let back = Dataset::load(&path).unwrap();
        assert_eq!(back.x, ds.x);
        assert_eq!(back.y, ds.y);
        let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        for key in ["n", "d", "spec", "label_model", "sigma_sq", "seed"] {
            assert!(side.get(key).is_some(), "missing {key}");
        }
    }
}
