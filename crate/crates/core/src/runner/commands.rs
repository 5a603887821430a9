//! Bodies of the command-line subcommands. Each takes the parsed config and
//! returns a JSON report, a human-readable summary and a pass flag; the
//! binary only handles flags, printing and exit codes.

use std::path::{Path, PathBuf};

use serde_json::json;

use super::parse;
use super::suite::{concentration_suite, SuiteConfig};
use super::tradeoff::{rows_to_csv, sidecar, tradeoff_experiment, write_tradeoff, ExperimentConfig, EXACT_FIT_TOL};
use crate::appendixlab::{slab_measure_estimate, unique_cell_fraction};
use crate::config::KvConfig;
use crate::error::{LabError, Result};
use crate::interp::{
    build_bump_interpolator, build_projected_interpolator, build_projected_with_dim, InterpolatorWire, RadiusPolicy,
    SmoothInterpolator,
};
use crate::isodist::{min_pairwise_distance, noise_moment_checks, sample_dataset, Dataset};
use crate::lipcert::{certify_interpolator, certify_network, spectral_product_bound};
use crate::netzoo::{materialize, param_lip_j, trace_csv, train_to_threshold, Architecture, NetworkFile, TrainOptions};
use crate::theory::{
    all_bounds, clipped_linear_family, lip_lower_bound, rademacher_envelope, rademacher_estimate, BoundInputs,
    RADEMACHER_ENVELOPE_CONSTANT,
};

/// What a subcommand produced.
#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub report: serde_json::Value,
    /// Plain-text output for non-JSON mode.
    pub text: String,
    /// Extra lines for stderr.
    pub notes: Vec<String>,
    pub pass: bool,
    pub files: Vec<PathBuf>,
}

impl CommandOutput {
    fn new(report: serde_json::Value, text: String, pass: bool) -> Self {
        Self {
            report,
            text,
            notes: Vec::new(),
            pass,
            files: Vec::new(),
        }
    }
}

fn seed_of(cfg: &KvConfig) -> Result<u64> {
    cfg.get_or("seed", 0u64)
}

/// Dataset from `data = <csv>` or sampled from `dist.*`, `label.*`, `n`.
fn dataset(cfg: &KvConfig) -> Result<Dataset> {
    if let Some(path) = cfg.raw("data") {
        return Dataset::load(Path::new(path)).map_err(|e| LabError::Config(format!("data: {e}")));
    }
    let spec = parse::distribution(cfg)?;
    let model = parse::label_model(cfg)?;
    model
        .check_dim(spec.dim())
        .map_err(|e| LabError::Config(e.to_string()))?;
    sample_dataset(&spec, &model, cfg.require("n")?, seed_of(cfg)?)
}

const DATA_KEYS: [&str; 5] = ["data", "dist.*", "label.*", "n", "seed"];

fn keys(extra: &[&'static str]) -> Vec<&'static str> {
    DATA_KEYS.iter().chain(extra).copied().collect()
}

pub fn sample(cfg: &KvConfig, out: Option<&Path>) -> Result<CommandOutput> {
    cfg.ensure_known(&keys(&["noise.eps"]))?;
    let ds = dataset(cfg)?;
    let noise = noise_moment_checks(&ds, cfg.get("noise.eps")?);
    let report = json!({"dataset": ds.sidecar(), "noise": noise});
    let mut res = CommandOutput::new(report, String::new(), true);
    match out {
        Some(path) => {
            ds.save(path)?;
            res.text = format!("wrote {} points in d = {} to {}", ds.n(), ds.d(), path.display());
            res.files = vec![path.to_path_buf(), crate::isodist::sidecar_path(path)];
        }
        None => res.text = ds.to_csv(),
    }
    Ok(res)
}

fn build_interpolator(cfg: &KvConfig, ds: &Dataset) -> Result<SmoothInterpolator> {
    let policy = parse::radius_policy(cfg, "interp", RadiusPolicy::HalfMinSep)?;
    let proj_seed = cfg.get_or("interp.projection_seed", seed_of(cfg)?)?;
    match (cfg.get::<usize>("interp.d_tilde")?, cfg.get::<usize>("interp.p")?) {
        (Some(_), Some(_)) => Err(LabError::Config(
            "set at most one of interp.d_tilde and interp.p".into(),
        )),
        (Some(dt), None) => build_projected_with_dim(ds, dt, proj_seed, policy),
        (None, Some(p)) => build_projected_interpolator(ds, p, proj_seed, policy),
        (None, None) => build_bump_interpolator(ds, policy),
    }
}

pub fn interpolate(cfg: &KvConfig, out: Option<&Path>) -> Result<CommandOutput> {
    cfg.ensure_known(&keys(&[
        "interp.d_tilde",
        "interp.p",
        "interp.radius",
        "interp.kappa",
        "interp.r",
        "interp.projection_seed",
    ]))?;
    let ds = dataset(cfg)?;
    let f = build_interpolator(cfg, &ds)?;
    let mut max_residual = 0.0f64;
    for (x, y) in ds.x.iter().zip(&ds.y) {
        max_residual = max_residual.max((f.evaluate(x)? - y).abs());
    }
    let min_sep = min_pairwise_distance(&f.centers)?;
    let pass = max_residual <= EXACT_FIT_TOL;
    let report = json!({"n": ds.n(), "d": ds.d(), "d_tilde": f.inner_dim(), "p": f.param_count(),
                        "radius": f.radius, "min_sep": min_sep, "max_residual": max_residual,
                        "analytic_lip": f.analytic_lip(), "overlap_multiplicity": f.overlap_multiplicity()});
    let text = format!(
        "d_tilde = {}  p = {}  r = {:.6}  min_sep = {:.6}  max residual = {:e}  analytic Lip = {:.6}",
        f.inner_dim(),
        f.param_count(),
        f.radius,
        min_sep,
        max_residual,
        f.analytic_lip()
    );
    let mut res = CommandOutput::new(report, text, pass);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&f.to_wire())? + "\n")?;
        res.files.push(path.to_path_buf());
    }
    Ok(res)
}

/// Certifies a saved interpolator or network (`model = <json>`).
pub fn certify(cfg: &KvConfig) -> Result<CommandOutput> {
    cfg.ensure_known(&["model", "seed", "lip.*", "certify.radius"])?;
    let path: String = cfg.require("model")?;
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::Config(format!("model {path}: {e}")))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("model {path}: {e}")))?;
    let lip = parse::lip_config(cfg)?;
    let seed = seed_of(cfg)?;
    let (kind, est) = if value.get("architecture").is_some() {
        let file: NetworkFile = serde_json::from_value(value).map_err(|e| LabError::Config(e.to_string()))?;
        let arch = Architecture::from_wire(&file.architecture)?;
        let net = materialize(&arch, &file.weights)?;
        let radius = cfg.get_or("certify.radius", arch.radius)?;
        ("network", certify_network(&net, radius, &lip, seed)?)
    } else {
        let wire: InterpolatorWire = serde_json::from_value(value).map_err(|e| LabError::Config(e.to_string()))?;
        (
            "interpolator",
            certify_interpolator(&SmoothInterpolator::from_wire(&wire)?, &lip, seed)?,
        )
    };
    let pass = est.sandwich_holds();
    let text = format!(
        "{kind}: empirical lower = {:.6}  certified upper = {}  {}",
        est.empirical_lower,
        est.certified_upper()
            .map(|u| format!("{u:.6}"))
            .unwrap_or_else(|| "none".into()),
        if pass {
            "sandwich holds"
        } else {
            "CERTIFICATION FAILURE"
        }
    );
    let mut res = CommandOutput::new(serde_json::to_value(&est)?, text, pass);
    res.notes = est.warnings.clone();
    Ok(res)
}

pub fn train(cfg: &KvConfig, out: Option<&Path>) -> Result<CommandOutput> {
    cfg.ensure_known(&keys(&[
        "net.hidden",
        "net.activation",
        "net.bias",
        "net.lr",
        "net.max_steps",
        "net.target",
        "net.W",
        "net.R",
        "net.clip_outputs",
        "net.box_constraint",
        "bounds.eps",
        "bounds.delta",
        "bounds.C1",
        "bounds.C2",
    ]))?;
    let ds = dataset(cfg)?;
    let hidden: Vec<usize> = cfg.get_list("net.hidden")?.unwrap_or_else(|| vec![64]);
    let w_bound = cfg.get_or("net.W", 1.0)?;
    let radius = cfg.get_or("net.R", ds.spec.support_radius().unwrap_or(1.0))?;
    let arch = Architecture::feedforward(
        ds.d(),
        &hidden,
        parse::activation(cfg, "net.activation")?,
        cfg.get_or("net.bias", true)?,
        w_bound,
        radius,
    )
    .map_err(|e| LabError::Config(e.to_string()))?;
    let sigma_sq = ds.label_model.sigma_sq;
    let eps = cfg.get_or("bounds.eps", 0.1)?;
    let target = cfg.get_or("net.target", sigma_sq - eps)?;
    let opts = TrainOptions {
        lr: cfg.get_or("net.lr", 0.1)?,
        max_steps: cfg.get_or("net.max_steps", 5000)?,
        seed: seed_of(cfg)?,
        clip_outputs: cfg.get_or("net.clip_outputs", false)?,
        box_constraint: cfg.get_or("net.box_constraint", false)?,
    };
    let outcome = train_to_threshold(&arch, &ds, target, opts)?;
    let net = materialize(&arch, &outcome.w)?;
    let certified = spectral_product_bound(&net);
    let w_box = outcome.w.iter().fold(w_bound.max(1.0), |m, v| m.max(v.abs()));
    let mut boxed = arch.clone();
    boxed.w_bound = w_box;
    let inputs = BoundInputs {
        n: ds.n(),
        d: ds.d(),
        p: arch.p(),
        eps,
        delta: cfg.get_or("bounds.delta", 0.1)?,
        sigma_sq,
        c: ds.spec.c_max(),
        k: ds.spec.k(),
        w_diam: 2.0 * w_box * (arch.p() as f64).sqrt(),
        j_lip: param_lip_j(&boxed)?,
        c1: cfg.get_or("bounds.C1", crate::theory::DEFAULT_C1)?,
        c2: cfg.get_or("bounds.C2", crate::theory::DEFAULT_C2)?,
        ..Default::default()
    };
    let bound = lip_lower_bound(&inputs).map_err(|e| LabError::Config(e.to_string()))?;
    let reached = outcome.reached_target;
    let sound = !reached || certified >= bound.value;
    let report = json!({"p": arch.p(), "steps": outcome.steps, "final_mse": outcome.final_loss(),
                        "target_mse": target, "reached_target": reached, "certified_lip": certified,
                        "lip_lower_bound": bound, "sound": sound});
    let text = format!(
        "p = {}  steps = {}  final mse = {:.6} (target {:.6})  B(w) = {:.4}  lower bound = {:.4e}",
        arch.p(),
        outcome.steps,
        outcome.final_loss(),
        target,
        certified,
        bound.value
    );
    let mut res = CommandOutput::new(report, text, reached && sound);
    if let Some(path) = out {
        let file = NetworkFile {
            architecture: arch.to_wire(),
            weights: outcome.w.clone(),
        };
        std::fs::write(path, serde_json::to_string(&file)? + "\n")?;
        let mut trace = path.as_os_str().to_owned();
        trace.push(".trace.csv");
        std::fs::write(&trace, trace_csv(&outcome.trace))?;
        res.files = vec![path.to_path_buf(), trace.into()];
    }
    Ok(res)
}

pub fn bounds(cfg: &KvConfig) -> Result<CommandOutput> {
    let inputs = BoundInputs::from_config(cfg)?;
    let (reports, refused) = all_bounds(&inputs).map_err(|e| LabError::Config(e.to_string()))?;
    let text = reports
        .iter()
        .map(|r| {
            let cav = if r.caveats.is_empty() {
                String::new()
            } else {
                format!("  [{}]", r.caveats.join("; "))
            };
            format!("{:<32} {:>14.6e}{cav}", r.name, r.value)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let mut res = CommandOutput::new(serde_json::to_value(&reports)?, text, true);
    res.notes = refused;
    Ok(res)
}

pub fn tradeoff(cfg: &KvConfig, out: Option<&Path>) -> Result<CommandOutput> {
    let exp = ExperimentConfig::from_config(cfg)?;
    let result = tradeoff_experiment(&exp)?;
    let side = match out {
        Some(path) => write_tradeoff(path, &exp, &result)?,
        None => sidecar(&exp, &result),
    };
    let pass = side.failed_rows == 0;
    let mut text = match out {
        Some(path) => format!("wrote {} rows to {}", result.rows.len(), path.display()),
        None => rows_to_csv(&result.rows),
    };
    if let Some(fit) = side.slope_fit {
        text.push_str(&format!(
            "\nslope = {:.4}  intercept = {:.4}  r2 = {:.4}",
            fit.slope, fit.intercept, fit.r2
        ));
    }
    let mut res = CommandOutput::new(serde_json::to_value(&side)?, text, pass);
    res.notes = result
        .skipped
        .iter()
        .map(|s| format!("skipped budget {} seed {}: {}", s.budget, s.seed, s.reason))
        .collect();
    if let Some(path) = out {
        res.files = vec![path.to_path_buf(), crate::isodist::sidecar_path(path)];
    }
    Ok(res)
}

pub fn isocheck(cfg: &KvConfig) -> Result<CommandOutput> {
    let suite = SuiteConfig::from_config(cfg)?;
    let report = concentration_suite(&suite)?;
    let text = report
        .checks
        .iter()
        .map(|c| format!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name))
        .collect::<Vec<_>>()
        .join("\n");
    let mut res = CommandOutput::new(serde_json::to_value(&report)?, text, report.pass);
    res.notes = report.warnings.clone();
    Ok(res)
}

/// Monte Carlo Rademacher complexity of a finite class
/// (`rad.family = constant | zero | clipped_linear`) against the envelope
/// `C max(sqrt(k/n), L sqrt(c ln N / (n d)))`.
pub fn rad(cfg: &KvConfig) -> Result<CommandOutput> {
    cfg.ensure_known(&[
        "dist.*",
        "n",
        "seed",
        "rad.family",
        "rad.size",
        "rad.lip",
        "rad.n_outer",
        "rad.constant",
    ])?;
    let spec = parse::distribution(cfg)?;
    let n: usize = cfg.require("n")?;
    let n_outer = cfg.get_or("rad.n_outer", 10_000usize)?;
    let seed = seed_of(cfg)?;
    let constant = cfg.get_or("rad.constant", RADEMACHER_ENVELOPE_CONSTANT)?;
    let family = cfg.raw("rad.family").unwrap_or("clipped_linear");
    let (report, lip, size) = match family {
        "constant" => (
            rademacher_estimate(&[|_: &[f64]| 1.0], &spec, n, n_outer, seed)?,
            0.0,
            1,
        ),
        "zero" => (
            rademacher_estimate(&[|_: &[f64]| 0.0], &spec, n, n_outer, seed)?,
            0.0,
            1,
        ),
        "clipped_linear" => {
            let size = cfg.get_or("rad.size", 16usize)?;
            let lip = cfg.get_or("rad.lip", 1.0)?;
            let fam = clipped_linear_family(size, spec.dim(), lip, crate::seed::mix(seed, 7));
            let fs: Vec<_> = fam.iter().map(|f| move |x: &[f64]| f.eval(x)).collect();
            (rademacher_estimate(&fs, &spec, n, n_outer, seed)?, lip, size)
        }
        other => return Err(LabError::Config(format!("unknown rad.family `{other}`"))),
    };
    let envelope = rademacher_envelope(constant, spec.k(), n, spec.dim(), spec.c_max(), lip, size);
    let pass = report.estimate <= envelope;
    let text = format!(
        "Rad estimate = {:.6} +/- {:.6}  envelope = {:.6}",
        report.estimate, report.std_error, envelope
    );
    Ok(CommandOutput::new(
        json!({"family": family, "estimate": report, "envelope": envelope, "pass": pass}),
        text,
        pass,
    ))
}

/// Slab measure at `appendix.slab_dims` and unique-cell success rate at
/// `appendix.d`, `appendix.n`.
pub fn appendix(cfg: &KvConfig) -> Result<CommandOutput> {
    cfg.ensure_known(&[
        "seed",
        "appendix.check",
        "appendix.slab_dims",
        "appendix.samples",
        "appendix.d",
        "appendix.n",
        "appendix.trials",
        "appendix.min_success",
    ])?;
    let seed = seed_of(cfg)?;
    let checks: Vec<String> = cfg
        .get_list("appendix.check")?
        .unwrap_or_else(|| vec!["slab".into(), "cells".into()]);
    let mut report = serde_json::Map::new();
    let mut lines = Vec::new();
    let mut pass = true;
    for check in &checks {
        match check.as_str() {
            "slab" => {
                let dims: Vec<usize> = cfg.get_list("appendix.slab_dims")?.unwrap_or_else(|| vec![5, 10, 20]);
                let samples = cfg.get_or("appendix.samples", 1_000_000usize)?;
                let mut slabs = Vec::new();
                for (i, &d) in dims.iter().enumerate() {
                    let r = slab_measure_estimate(d, samples, crate::seed::mix(seed, i as u64))
                        .map_err(|e| LabError::Config(e.to_string()))?;
                    lines.push(format!(
                        "slab d = {d}: measure {:.3e} (bound {})",
                        r.empirical_slab_measure, r.bound
                    ));
                    pass &= r.pass;
                    slabs.push(r);
                }
                report.insert("slab".into(), serde_json::to_value(slabs)?);
            }
            "cells" => {
                let d = cfg.get_or("appendix.d", 14usize)?;
                let n = cfg.get_or("appendix.n", 160usize)?;
                let trials = cfg.get_or("appendix.trials", 200usize)?;
                let min_success = cfg.get_or("appendix.min_success", 0.95)?;
                let r = unique_cell_fraction(d, n, trials, crate::seed::mix(seed, 1000))
                    .map_err(|e| LabError::Config(e.to_string()))?;
                lines.push(format!(
                    "cells d = {d}, n = {n}: success rate {:.3} (need {min_success})",
                    r.success_rate
                ));
                pass &= r.success_rate >= min_success;
                report.insert("cells".into(), serde_json::to_value(&r)?);
            }
            other => return Err(LabError::Config(format!("unknown appendix.check `{other}`"))),
        }
    }
    Ok(CommandOutput::new(
        serde_json::Value::Object(report),
        lines.join("\n"),
        pass,
    ))
}
