//! Readers that turn flat config sections into library types.

use crate::config::KvConfig;
use crate::error::{LabError, Result};
use crate::interp::RadiusPolicy;
use crate::isodist::{Component, ComponentKind, DistributionSpec, LabelKind, LabelModel, Target};
use crate::lipcert::EmpiricalLipConfig;
use crate::netzoo::Activation;

pub const DIST_KEYS: &[&str] = &["dist.kind", "dist.d", "dist.c", "dist.weights"];
pub const LABEL_KEYS: &[&str] = &[
    "label.kind",
    "label.flip_prob",
    "label.coord",
    "label.target",
    "label.noise_scale",
    "label.freq",
    "label.amplitude",
];
pub const LIP_KEYS: &[&str] = &["lip.n_pairs", "lip.refine_steps", "lip.grad_probes", "lip.fd_step"];

/// `dist.kind` (one kind, or a comma list for an equal-or-`dist.weights`
/// mixture), `dist.d`, `dist.c` (scalar or per-component list).
pub fn distribution(cfg: &KvConfig) -> Result<DistributionSpec> {
    let kinds: Vec<String> = cfg.get_list("dist.kind")?.unwrap_or_else(|| vec!["sphere".to_string()]);
    if kinds.is_empty() {
        return Err(LabError::Config("dist.kind is empty".into()));
    }
    let d: usize = cfg.require("dist.d")?;
    let cs: Vec<f64> = cfg.get_list("dist.c")?.unwrap_or_else(|| vec![1.0]);
    let cs = match cs.len() {
        1 => vec![cs[0]; kinds.len()],
        len if len == kinds.len() => cs,
        len => {
            return Err(LabError::Config(format!(
                "dist.c has {len} entries for {} components",
                kinds.len()
            )))
        }
    };
    let weights: Vec<f64> = cfg
        .get_list("dist.weights")?
        .unwrap_or_else(|| vec![1.0 / kinds.len() as f64; kinds.len()]);
    if weights.len() != kinds.len() {
        return Err(LabError::Config("dist.weights must match dist.kind in length".into()));
    }
    let components = kinds
        .iter()
        .zip(cs.iter().zip(&weights))
        .map(|(k, (&c, &w))| Ok(Component::new(ComponentKind::parse(k)?, d).with_c(c).with_weight(w)))
        .collect::<Result<Vec<_>>>()?;
    DistributionSpec::mixture(components).map_err(|e| LabError::Config(e.to_string()))
}

fn target(cfg: &KvConfig, default: &str) -> Result<Target> {
    let coord = cfg.get_or("label.coord", 0usize)?;
    match cfg.raw("label.target").unwrap_or(default) {
        "zero" => Ok(Target::Zero),
        "sign" => Ok(Target::Sign { coord }),
        "sine" => Ok(Target::Sine {
            coord,
            freq: cfg.get_or("label.freq", 1.0)?,
            amplitude: cfg.get_or("label.amplitude", 0.5)?,
        }),
        other => Err(LabError::Config(format!("unknown label.target `{other}`"))),
    }
}

/// `label.kind = pure_noise | flip | additive` with its parameters.
pub fn label_model(cfg: &KvConfig) -> Result<LabelModel> {
    let kind = match cfg.raw("label.kind").unwrap_or("pure_noise") {
        "pure_noise" => LabelKind::PureNoise,
        "flip" => LabelKind::FlipNoise {
            target: target(cfg, "sign")?,
            flip_prob: cfg.get_or("label.flip_prob", 0.2)?,
        },
        "additive" => LabelKind::AdditiveNoise {
            target: target(cfg, "zero")?,
            noise_scale: cfg.get_or("label.noise_scale", 0.5)?,
        },
        other => return Err(LabError::Config(format!("unknown label.kind `{other}`"))),
    };
    LabelModel::new(kind).map_err(|e| LabError::Config(e.to_string()))
}

/// `<prefix>.radius = separation_scaled | half_min_sep | fixed` with
/// `<prefix>.kappa` or `<prefix>.r`.
pub fn radius_policy(cfg: &KvConfig, prefix: &str, default: RadiusPolicy) -> Result<RadiusPolicy> {
    let key = format!("{prefix}.radius");
    let policy = match cfg.raw(&key) {
        None => default,
        Some("separation_scaled") => RadiusPolicy::SeparationScaled {
            kappa: cfg.get_or(&format!("{prefix}.kappa"), 0.3)?,
        },
        Some("half_min_sep") => RadiusPolicy::HalfMinSep,
        Some("fixed") => RadiusPolicy::Fixed {
            r: cfg.require(&format!("{prefix}.r"))?,
        },
        Some(other) => return Err(LabError::Config(format!("unknown {key} `{other}`"))),
    };
    match policy {
        RadiusPolicy::SeparationScaled { kappa } if !(kappa > 0.0) => {
            Err(LabError::Config(format!("{prefix}.kappa must be positive")))
        }
        RadiusPolicy::Fixed { r } if !(r > 0.0) => Err(LabError::Config(format!("{prefix}.r must be positive"))),
        p => Ok(p),
    }
}

pub fn lip_config(cfg: &KvConfig) -> Result<EmpiricalLipConfig> {
    let d = EmpiricalLipConfig::default();
    let out = EmpiricalLipConfig {
        n_pairs: cfg.get_or("lip.n_pairs", d.n_pairs)?,
        refine_steps: cfg.get_or("lip.refine_steps", d.refine_steps)?,
        grad_probes: cfg.get_or("lip.grad_probes", d.grad_probes)?,
        fd_step: cfg.get_or("lip.fd_step", d.fd_step)?,
    };
    if out.n_pairs == 0 || !(out.fd_step > 0.0) {
        return Err(LabError::Config("lip.n_pairs and lip.fd_step must be positive".into()));
    }
    Ok(out)
}

pub fn activation(cfg: &KvConfig, key: &str) -> Result<Activation> {
    Activation::parse(cfg.raw(key).unwrap_or("relu")).map_err(|e| LabError::Config(e.to_string()))
}

/// `start, start + step, ..., stop` inclusive, rounded to avoid drift.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}
