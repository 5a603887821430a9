use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::parse;
use crate::config::KvConfig;
use crate::error::{LabError, Result};
use crate::interp::{build_projected_with_dim, projected_dim_for_budget, RadiusPolicy, SmoothInterpolator};
use crate::isodist::{min_pairwise_distance, sample_dataset, sidecar_path, Dataset, DistributionSpec, LabelModel};
use crate::lipcert::{certify_interpolator, certify_network, spectral_product_bound, EmpiricalLipConfig};
use crate::netzoo::{materialize, mse, param_lip_j, train_to_threshold, Activation, Architecture, TrainOptions};
use crate::seed;
use crate::theory::{informal_lower_bound, lip_lower_bound, BoundInputs, DEFAULT_C1, DEFAULT_C2};

/// First line of every tradeoff CSV.
pub const CSV_VERSION: &str = "# robustness-law-lab v1";
pub const CSV_HEADER: &str =
    "p,d_tilde,min_sep,train_mse,lip_empirical,lip_certified,informal_bound,theorem7_bound,seed,status";

/// Residual tolerance for an exact interpolating fit.
pub const EXACT_FIT_TOL: f64 = 1e-12;

const STREAM_DATA: u64 = 1;
const STREAM_PROJECTION: u64 = 2;
const STREAM_LIP: u64 = 3;
const STREAM_TRAIN: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sweep {
    /// Explicit projected dimensions.
    ProjectedDims { d_tilde: Vec<usize>, radius: RadiusPolicy },
    /// Parameter budgets; `d_tilde = floor(p/n) - 1`.
    Budgets { p: Vec<usize>, radius: RadiusPolicy },
    /// Two-layer networks of the given hidden widths trained below the noise level.
    Network {
        widths: Vec<usize>,
        activation: Activation,
        lr: f64,
        max_steps: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: DistributionSpec,
    pub label_model: LabelModel,
    pub n: usize,
    pub sweep: Sweep,
    /// Replicate indices; each one draws its own dataset.
    pub seeds: Vec<u64>,
    /// Base seed mixed into every replicate stream.
    pub base_seed: u64,
    /// Fit margin: networks train to `sigma^2 - eps`.
    pub eps: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub lip: EmpiricalLipConfig,
}

impl ExperimentConfig {
    pub const KEYS: &'static [&'static str] = &[
        "dist.*",
        "label.*",
        "lip.*",
        "n",
        "seed",
        "seeds",
        "sweep.mode",
        "sweep.d_tilde",
        "sweep.p",
        "sweep.width",
        "sweep.radius",
        "sweep.kappa",
        "sweep.r",
        "net.activation",
        "net.lr",
        "net.max_steps",
        "bounds.eps",
        "bounds.delta",
        "bounds.C1",
        "bounds.C2",
    ];

    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        cfg.ensure_known(Self::KEYS)?;
        let spec = parse::distribution(cfg)?;
        let label_model = parse::label_model(cfg)?;
        label_model
            .check_dim(spec.dim())
            .map_err(|e| LabError::Config(e.to_string()))?;
        let n: usize = cfg.require("n")?;
        let seeds: Vec<u64> = cfg.get_list("seeds")?.unwrap_or_else(|| vec![0]);
        let radius = parse::radius_policy(cfg, "sweep", RadiusPolicy::SeparationScaled { kappa: 0.3 })?;
        let sweep = match cfg.raw("sweep.mode").unwrap_or("interpolator") {
            "interpolator" => match (
                cfg.get_list::<usize>("sweep.d_tilde")?,
                cfg.get_list::<usize>("sweep.p")?,
            ) {
                (Some(d_tilde), None) => Sweep::ProjectedDims { d_tilde, radius },
                (None, Some(p)) => Sweep::Budgets { p, radius },
                _ => return Err(LabError::Config("set exactly one of sweep.d_tilde and sweep.p".into())),
            },
            "network" => Sweep::Network {
                widths: cfg
                    .get_list("sweep.width")?
                    .ok_or_else(|| LabError::Config("missing sweep.width".into()))?,
                activation: parse::activation(cfg, "net.activation")?,
                lr: cfg.get_or("net.lr", 0.1)?,
                max_steps: cfg.get_or("net.max_steps", 5000)?,
            },
            other => return Err(LabError::Config(format!("unknown sweep.mode `{other}`"))),
        };
        let out = Self {
            spec,
            label_model,
            n,
            sweep,
            seeds,
            base_seed: cfg.get_or("seed", 0)?,
            eps: cfg.get_or("bounds.eps", 0.1)?,
            delta: cfg.get_or("bounds.delta", 0.1)?,
            c1: cfg.get_or("bounds.C1", DEFAULT_C1)?,
            c2: cfg.get_or("bounds.C2", DEFAULT_C2)?,
            lip: parse::lip_config(cfg)?,
        };
        out.validate().map_err(|e| LabError::Config(e.to_string()))?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(LabError::Config("seed list is empty".into()));
        }
        let empty = match &self.sweep {
            Sweep::ProjectedDims { d_tilde, .. } => d_tilde.is_empty(),
            Sweep::Budgets { p, .. } => p.is_empty(),
            Sweep::Network { widths, .. } => widths.is_empty(),
        };
        if empty {
            return Err(LabError::Config("sweep is empty".into()));
        }
        if self.n < 2 {
            return Err(LabError::Config("n must be at least 2".into()));
        }
        if !(self.eps > 0.0 && self.eps < self.label_model.sigma_sq) {
            return Err(LabError::Config(format!(
                "bounds.eps must lie in (0, sigma^2 = {})",
                self.label_model.sigma_sq
            )));
        }
        self.spec.validate()
    }

    fn bound_inputs(&self, p: usize, w_diam: f64, j_lip: f64) -> BoundInputs {
        BoundInputs {
            n: self.n,
            d: self.spec.dim(),
            p,
            eps: self.eps,
            delta: self.delta,
            sigma_sq: self.label_model.sigma_sq,
            c: self.spec.c_max(),
            k: self.spec.k(),
            w_diam,
            j_lip,
            c1: self.c1,
            c2: self.c2,
            ..Default::default()
        }
    }

    fn dataset(&self, replicate: u64) -> Result<Dataset> {
        sample_dataset(
            &self.spec,
            &self.label_model,
            self.n,
            seed::mix(self.base_seed ^ replicate, STREAM_DATA),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub p: usize,
    pub d_tilde: usize,
    pub min_sep: f64,
    pub train_mse: f64,
    pub lip_empirical: f64,
    pub lip_certified: f64,
    pub informal_bound: f64,
    pub theorem7_bound: f64,
    pub seed: u64,
    /// `ok`, or the reason the row failed its invariants.
    pub status: String,
}

impl TradeoffRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// A sweep cell that produced no row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub budget: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TradeoffResult {
    pub rows: Vec<TradeoffRow>,
    pub skipped: Vec<SkippedCell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Sidecar JSON written next to the tradeoff CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TradeoffSidecar {
    pub version: String,
    pub config: ExperimentConfig,
    pub rows: usize,
    pub failed_rows: usize,
    pub skipped: Vec<SkippedCell>,
    pub slope_fit: Option<SlopeFit>,
    pub slope_fit_error: Option<String>,
}

fn interp_cell(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    d_tilde: usize,
    radius: RadiusPolicy,
    replicate: u64,
) -> Result<TradeoffRow> {
    let cell_seed = seed::mix(cfg.base_seed ^ replicate, d_tilde as u64);
    let f = build_projected_with_dim(ds, d_tilde, seed::mix(cell_seed, STREAM_PROJECTION), radius)?;
    let train_mse = interp_mse(&f, ds)?;
    let est = certify_interpolator(&f, &cfg.lip, seed::mix(cell_seed, STREAM_LIP))?;
    let lip_certified = f.analytic_lip();
    let p = f.param_count();
    // parameters are (center, label) blocks; centers lie within the support radius
    let rho = f
        .centers
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let w_diam = 2.0 * (cfg.n as f64 * (rho * rho + 1.0)).sqrt();
    let j_lip = (2.0 * cfg.n as f64).sqrt() * (f.bump.lip_g / f.radius).max(1.0);
    let lip_bound = lip_lower_bound(&cfg.bound_inputs(p, w_diam, j_lip))?.value;
    let mut status = Vec::new();
    if train_mse > EXACT_FIT_TOL {
        status.push(format!("residual {train_mse:e} above exact-fit tolerance"));
    }
    if !est.sandwich_holds() {
        status.push("empirical Lipschitz exceeds certified".to_string());
    }
    Ok(TradeoffRow {
        p,
        d_tilde: f.inner_dim(),
        min_sep: min_pairwise_distance(&f.centers)?,
        train_mse,
        lip_empirical: est.empirical_lower,
        lip_certified,
        informal_bound: informal_lower_bound(cfg.n, cfg.spec.dim(), p, cfg.eps, cfg.label_model.sigma_sq.sqrt()),
        theorem7_bound: lip_bound,
        seed: replicate,
        status: if status.is_empty() {
            "ok".into()
        } else {
            status.join("; ")
        },
    })
}

/// Mean squared residual of an interpolator on its own training data.
pub fn interp_mse(f: &SmoothInterpolator, ds: &Dataset) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in ds.x.iter().zip(&ds.y) {
        total += (f.evaluate(x)? - y).powi(2);
    }
    Ok(total / ds.n() as f64)
}

fn network_cell(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    width: usize,
    activation: Activation,
    lr: f64,
    max_steps: usize,
    replicate: u64,
) -> Result<TradeoffRow> {
    let d = cfg.spec.dim();
    let radius = cfg.spec.support_radius().unwrap_or_else(|| {
        ds.x.iter()
            .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    });
    let arch = Architecture::feedforward(d, &[width], activation, true, 1.0, radius)?;
    let target = cfg.label_model.sigma_sq - cfg.eps;
    let cell_seed = seed::mix(cfg.base_seed ^ replicate, width as u64);
    let opts = TrainOptions {
        lr,
        max_steps,
        seed: seed::mix(cell_seed, STREAM_TRAIN),
        ..Default::default()
    };
    let out = train_to_threshold(&arch, ds, target, opts)?;
    let net = materialize(&arch, &out.w)?;
    let train_mse = mse(&net, &ds.x, &ds.y)?;
    let est = certify_network(&net, radius, &cfg.lip, seed::mix(cell_seed, STREAM_LIP))?;
    let w_box = out.w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut boxed = arch.clone();
    boxed.w_bound = w_box;
    let p = arch.p();
    let lip_bound = lip_lower_bound(&cfg.bound_inputs(p, 2.0 * w_box * (p as f64).sqrt(), param_lip_j(&boxed)?))?.value;
    let mut status = Vec::new();
    if !(train_mse <= target) {
        status.push(format!("train mse {train_mse:.6} above sigma^2 - eps = {target:.6}"));
    }
    if !est.sandwich_holds() {
        status.push("empirical Lipschitz exceeds certified".to_string());
    }
    Ok(TradeoffRow {
        p,
        d_tilde: d,
        min_sep: min_pairwise_distance(&ds.x)?,
        train_mse,
        lip_empirical: est.empirical_lower,
        lip_certified: spectral_product_bound(&net),
        informal_bound: informal_lower_bound(cfg.n, d, p, cfg.eps, cfg.label_model.sigma_sq.sqrt()),
        theorem7_bound: lip_bound,
        seed: replicate,
        status: if status.is_empty() {
            "ok".into()
        } else {
            status.join("; ")
        },
    })
}

/// Runs every (budget, seed) cell. Cells are independent; rows come back
/// sorted by `(p, seed)` and refused cells are listed in `skipped`.
pub fn tradeoff_experiment(cfg: &ExperimentConfig) -> Result<TradeoffResult> {
    cfg.validate()?;
    let datasets: Vec<(u64, Dataset)> = cfg
        .seeds
        .iter()
        .map(|&s| cfg.dataset(s).map(|ds| (s, ds)))
        .collect::<Result<_>>()?;
    let budgets: Vec<usize> = match &cfg.sweep {
        Sweep::ProjectedDims { d_tilde, .. } => d_tilde.clone(),
        Sweep::Budgets { p, .. } => p.clone(),
        Sweep::Network { widths, .. } => widths.clone(),
    };
    let cells: Vec<(usize, usize)> = (0..budgets.len())
        .flat_map(|b| (0..datasets.len()).map(move |s| (b, s)))
        .collect();
    let outcomes: Vec<std::result::Result<TradeoffRow, SkippedCell>> = cells
        .par_iter()
        .map(|&(b, s)| {
            let (replicate, ds) = &datasets[s];
            let budget = budgets[b];
            let res = match &cfg.sweep {
                Sweep::ProjectedDims { radius, .. } => interp_cell(cfg, ds, budget, *radius, *replicate),
                Sweep::Budgets { radius, .. } => {
                    interp_cell(cfg, ds, projected_dim_for_budget(cfg.n, budget), *radius, *replicate)
                }
                Sweep::Network {
                    activation,
                    lr,
                    max_steps,
                    ..
                } => network_cell(cfg, ds, budget, *activation, *lr, *max_steps, *replicate),
            };
            res.map_err(|e| SkippedCell {
                budget,
                seed: *replicate,
                reason: e.to_string(),
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(s) => {
                log::warn!("skipping budget {} seed {}: {}", s.budget, s.seed, s.reason);
                skipped.push(s)
            }
        }
    }
    rows.sort_by_key(|a| (a.p, a.seed));
    Ok(TradeoffResult { rows, skipped })
}

/// Versioned CSV with fixed column order.
pub fn rows_to_csv(rows: &[TradeoffRow]) -> String {
    let mut out = format!("{CSV_VERSION}\n{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.p,
            r.d_tilde,
            r.min_sep,
            r.train_mse,
            r.lip_empirical,
            r.lip_certified,
            r.informal_bound,
            r.theorem7_bound,
            r.seed,
            r.status.replace([',', '\n'], ";")
        );
    }
    out
}

/// Parses a CSV produced by [`rows_to_csv`], checking the version line and
/// header.
pub fn rows_from_csv(text: &str) -> Result<Vec<TradeoffRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_VERSION) {
        return Err(LabError::Config(format!(
            "tradeoff csv must start with `{CSV_VERSION}`"
        )));
    }
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(LabError::Config("tradeoff csv header does not match v1".into()));
    }
    let bad = |i: usize, what: &str| LabError::Config(format!("tradeoff csv row {}: {what}", i + 1));
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(bad(i, "expected 10 fields"));
            }
            let num = |j: usize| {
                f[j].trim()
                    .parse::<f64>()
                    .map_err(|_| bad(i, &format!("bad number `{}`", f[j])))
            };
            let int = |j: usize| {
                f[j].trim()
                    .parse::<u64>()
                    .map_err(|_| bad(i, &format!("bad integer `{}`", f[j])))
            };
            Ok(TradeoffRow {
                p: int(0)? as usize,
                d_tilde: int(1)? as usize,
                min_sep: num(2)?,
                train_mse: num(3)?,
                lip_empirical: num(4)?,
                lip_certified: num(5)?,
                informal_bound: num(6)?,
                theorem7_bound: num(7)?,
                seed: int(8)?,
                status: f[9].trim().to_string(),
            })
        })
        .collect()
}

/// Ordinary least squares of `ln lip_certified` on `ln p` over rows with
/// status `ok`. Needs at least three distinct `p`.
pub fn slope_fit(rows: &[TradeoffRow]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ok() && r.p > 0 && r.lip_certified > 0.0 && r.lip_certified.is_finite())
        .map(|r| ((r.p as f64).ln(), r.lip_certified.ln()))
        .collect();
    let mut distinct: Vec<usize> = rows.iter().filter(|r| r.ok()).map(|r| r.p).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(LabError::Domain(format!(
            "slope fit needs at least 3 distinct p values, got {}",
            distinct.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-300) {
        return Err(LabError::Domain("slope fit: ln p has no variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        points: pts.len(),
    })
}

/// Builds the sidecar for a finished experiment.
pub fn sidecar(cfg: &ExperimentConfig, result: &TradeoffResult) -> TradeoffSidecar {
    let fit = slope_fit(&result.rows);
    TradeoffSidecar {
        version: CSV_VERSION.trim_start_matches("# ").to_string(),
        config: cfg.clone(),
        rows: result.rows.len(),
        failed_rows: result.rows.iter().filter(|r| !r.ok()).count(),
        skipped: result.skipped.clone(),
        slope_fit: fit.as_ref().ok().copied(),
        slope_fit_error: fit.err().map(|e| e.to_string()),
    }
}

/// Writes the CSV and its `<csv>.json` sidecar.
pub fn write_tradeoff(path: &Path, cfg: &ExperimentConfig, result: &TradeoffResult) -> Result<TradeoffSidecar> {
    let side = sidecar(cfg, result);
    std::fs::write(path, rows_to_csv(&result.rows))?;
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(side)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: usize, lip: f64, seed: u64) -> TradeoffRow {
        TradeoffRow {
            p,
            d_tilde: p,
            min_sep: 1.0,
            train_mse: 0.0,
            lip_empirical: lip,
            lip_certified: lip,
            informal_bound: 1.0,
            theorem7_bound: 0.1,
            seed,
            status: "ok".into(),
        }
    }

    #[test]
    fn exact_power_law_fit() {
        let rows: Vec<_> = [10usize, 100, 1000, 10000]
            .iter()
            .map(|&p| row(p, (p as f64).powf(-0.5), 0))
            .collect();
        let fit = slope_fit(&rows).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits_error() {
        assert!(slope_fit(&[row(5, 1.0, 0), row(5, 2.0, 1)]).is_err());
        assert!(slope_fit(&[row(5, 1.0, 0), row(6, 2.0, 1), row(6, 2.0, 2)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = vec![row(10, 0.3, 0), row(20, 0.1234567890123, 1)];
        rows[1].status = "bad, really".into();
        let text = rows_to_csv(&rows);
        assert!(text.starts_with(CSV_VERSION));
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].lip_certified, rows[1].lip_certified);
        assert_eq!(back[1].status, "bad; really");
        assert!(rows_from_csv("p,d\n").is_err());
    }

    fn small_cfg(extra: &str) -> ExperimentConfig {
        let text = format!("dist.kind = sphere\ndist.d = 64\nn = 30\nseeds = 0, 1\n{extra}");
        ExperimentConfig::from_config(&KvConfig::parse(&text).unwrap()).unwrap()
    }

    #[test]
    fn full_dimension_row_matches_unprojected_bound() {
        let cfg = small_cfg("sweep.d_tilde = 64\nsweep.radius = half_min_sep\nlip.grad_probes = 2");
        let res = tradeoff_experiment(&cfg).unwrap();
        assert_eq!(res.rows.len(), 2);
        for r in &res.rows {
            assert!((r.lip_certified - 1.5 / (r.min_sep / 2.0)).abs() < 1e-9);
            assert_eq!(r.train_mse, 0.0);
            assert!(r.ok());
        }
    }

    #[test]
    fn low_budgets_are_skipped_with_reason() {
        let cfg = small_cfg("sweep.d_tilde = 4, 16, 32\nlip.grad_probes = 2");
        let res = tradeoff_experiment(&cfg).unwrap();
        assert_eq!(res.skipped.len(), 2);
        assert!(res.skipped[0].reason.contains("floor"));
        assert_eq!(res.rows.len(), 4);
        assert!(res.rows.windows(2).all(|w| (w[0].p, w[0].seed) <= (w[1].p, w[1].seed)));
    }

    #[test]
    fn empty_seed_list_is_config_error() {
        let cfg = KvConfig::parse("dist.d = 8\nn = 5\nseeds = \nsweep.d_tilde = 8").unwrap();
        assert!(ExperimentConfig::from_config(&cfg).unwrap_err().is_config());
    }
}
