use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::parse;
use crate::config::KvConfig;
use crate::error::{LabError, Result};
use crate::isodist::{
    isoperimetry_tail_check_batch, noise_moment_checks, sample_dataset, Component, ComponentKind, DistributionSpec,
    LabelModel,
};
use crate::lipcert::{certify_network, EmpiricalLipConfig};
use crate::netzoo::{check_param_lipschitz, materialize, random_architecture, RandomArchOptions};
use crate::seed;
use crate::theory::{subgaussian_avg_check, Generator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteCheck {
    Isoperimetry,
    Subgaussian,
    Noise,
    ParamLip,
}

impl SuiteCheck {
    pub const ALL: [SuiteCheck; 4] = [Self::Isoperimetry, Self::Subgaussian, Self::Noise, Self::ParamLip];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "isoperimetry" => Ok(Self::Isoperimetry),
            "subgaussian" => Ok(Self::Subgaussian),
            "noise" => Ok(Self::Noise),
            "param_lip" => Ok(Self::ParamLip),
            other => Err(LabError::Config(format!("unknown check `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub checks: Vec<SuiteCheck>,
    pub seed: u64,
    pub iso_kinds: Vec<ComponentKind>,
    pub iso_dims: Vec<usize>,
    pub iso_functionals: usize,
    pub iso_samples: usize,
    pub iso_t: Vec<f64>,
    /// Isoperimetry constant assumed by the envelope.
    pub iso_c: f64,
    pub subg_generators: Vec<Generator>,
    pub subg_n: usize,
    pub subg_trials: usize,
    pub subg_t: Vec<f64>,
    pub subg_c: f64,
    pub noise_d: usize,
    pub noise_n: usize,
    pub noise_eps: f64,
    pub noise_label: LabelModel,
    pub param_lip_instances: usize,
    pub param_lip_probes: usize,
    pub param_lip_probe_cfg: EmpiricalLipConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            checks: SuiteCheck::ALL.to_vec(),
            seed: 0,
            iso_kinds: vec![ComponentKind::Sphere, ComponentKind::Gaussian, ComponentKind::Cube],
            iso_dims: vec![50, 100, 200],
            iso_functionals: 20,
            iso_samples: 100_000,
            iso_t: parse::grid(0.05, 0.5, 0.05),
            iso_c: 1.0,
            subg_generators: vec![Generator::Rademacher, Generator::Gaussian],
            subg_n: 50,
            subg_trials: 1_000_000,
            subg_t: parse::grid(0.5, 3.0, 0.5),
            subg_c: 2.0,
            noise_d: 20,
            noise_n: 20_000,
            noise_eps: 0.3,
            noise_label: LabelModel::flip(0, 0.2).expect("valid flip model"),
            param_lip_instances: 100,
            param_lip_probes: 200,
            param_lip_probe_cfg: EmpiricalLipConfig::default(),
        }
    }
}

impl SuiteConfig {
    pub const KEYS: &'static [&'static str] = &[
        "checks",
        "seed",
        "iso.kinds",
        "iso.dims",
        "iso.functionals",
        "iso.samples",
        "iso.t",
        "iso.c",
        "subg.generators",
        "subg.n",
        "subg.trials",
        "subg.t",
        "subg.c",
        "noise.d",
        "noise.n",
        "noise.eps",
        "label.*",
        "param_lip.instances",
        "param_lip.probes",
        "lip.*",
    ];

    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        cfg.ensure_known(Self::KEYS)?;
        let d = Self::default();
        let checks = match cfg.get_list::<String>("checks")? {
            Some(list) => list.iter().map(|s| SuiteCheck::parse(s)).collect::<Result<_>>()?,
            None => d.checks.clone(),
        };
        let iso_kinds = match cfg.get_list::<String>("iso.kinds")? {
            Some(list) => list.iter().map(|s| ComponentKind::parse(s)).collect::<Result<_>>()?,
            None => d.iso_kinds.clone(),
        };
        let subg_generators = match cfg.get_list::<String>("subg.generators")? {
            Some(list) => list.iter().map(|s| Generator::parse(s)).collect::<Result<_>>()?,
            None => d.subg_generators.clone(),
        };
        let has_label = cfg.keys().any(|k| k.starts_with("label."));
        let out = Self {
            checks,
            seed: cfg.get_or("seed", d.seed)?,
            iso_kinds,
            iso_dims: cfg.get_list("iso.dims")?.unwrap_or(d.iso_dims),
            iso_functionals: cfg.get_or("iso.functionals", d.iso_functionals)?,
            iso_samples: cfg.get_or("iso.samples", d.iso_samples)?,
            iso_t: cfg.get_list("iso.t")?.unwrap_or(d.iso_t),
            iso_c: cfg.get_or("iso.c", d.iso_c)?,
            subg_generators,
            subg_n: cfg.get_or("subg.n", d.subg_n)?,
            subg_trials: cfg.get_or("subg.trials", d.subg_trials)?,
            subg_t: cfg.get_list("subg.t")?.unwrap_or(d.subg_t),
            subg_c: cfg.get_or("subg.c", d.subg_c)?,
            noise_d: cfg.get_or("noise.d", d.noise_d)?,
            noise_n: cfg.get_or("noise.n", d.noise_n)?,
            noise_eps: cfg.get_or("noise.eps", d.noise_eps)?,
            noise_label: if has_label {
                parse::label_model(cfg)?
            } else {
                d.noise_label
            },
            param_lip_instances: cfg.get_or("param_lip.instances", d.param_lip_instances)?,
            param_lip_probes: cfg.get_or("param_lip.probes", d.param_lip_probes)?,
            param_lip_probe_cfg: parse::lip_config(cfg)?,
        };
        if !(out.iso_c > 0.0 && out.subg_c > 0.0 && out.noise_eps > 0.0) {
            return Err(LabError::Config("iso.c, subg.c and noise.eps must be positive".into()));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckOutcome>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

fn unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= norm);
    u
}

fn isoperimetry(cfg: &SuiteConfig, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (ki, kind) in cfg.iso_kinds.iter().enumerate() {
        for (di, &d) in cfg.iso_dims.iter().enumerate() {
            let cell = seed::mix(seed, (ki * 1000 + di) as u64);
            let mut rng = seed::rng(cell);
            let dirs: Vec<Vec<f64>> = (0..cfg.iso_functionals).map(|_| unit_vector(d, &mut rng)).collect();
            let fs: Vec<_> = dirs
                .iter()
                .map(|u| move |x: &[f64]| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let comp = Component::new(*kind, d).with_c(cfg.iso_c);
            let reports =
                isoperimetry_tail_check_batch(&comp, &fs, 1.0, &cfg.iso_t, cfg.iso_samples, seed::mix(cell, 1))?;
            let failures: usize = reports
                .iter()
                .map(|r| r.rows.iter().filter(|row| !row.pass).count())
                .sum();
            let worst = reports
                .iter()
                .flat_map(|r| r.rows.iter())
                .map(|row| row.empirical / row.bound)
                .fold(0.0, f64::max);
            out.push(CheckOutcome {
                name: format!("isoperimetry/{kind:?}/d={d}").to_lowercase(),
                pass: failures == 0,
                details: json!({"kind": kind, "d": d, "c": cfg.iso_c, "functionals": cfg.iso_functionals,
                                "samples": cfg.iso_samples, "grid_failures": failures,
                                "max_empirical_over_bound": worst}),
            });
        }
    }
    Ok(out)
}

fn subgaussian(cfg: &SuiteConfig, seed: u64) -> Result<Vec<CheckOutcome>> {
    cfg.subg_generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let r = subgaussian_avg_check(
                *g,
                cfg.subg_c,
                cfg.subg_n,
                cfg.subg_trials,
                &cfg.subg_t,
                seed::mix(seed, i as u64),
            )?;
            Ok(CheckOutcome {
                name: format!("subgaussian/{:?}", g).to_lowercase(),
                pass: r.pass,
                details: serde_json::to_value(&r)?,
            })
        })
        .collect()
}

fn noise(cfg: &SuiteConfig, seed: u64) -> Result<Vec<CheckOutcome>> {
    let spec = DistributionSpec::single(ComponentKind::Sphere, cfg.noise_d);
    let ds = sample_dataset(&spec, &cfg.noise_label, cfg.noise_n, seed)?;
    let r = noise_moment_checks(&ds, Some(cfg.noise_eps));
    Ok(vec![CheckOutcome {
        name: "noise_moments".into(),
        pass: !r.flagged,
        details: serde_json::to_value(&r)?,
    }])
}

/// Parameter-Lipschitz checks on random chain architectures with `W = R = 1`:
/// parameter-Lipschitz inequality, spectral budget, and empirical input
/// Lipschitz constant below `B(w)`.
pub fn param_lip_instances(
    instances: usize,
    probes: usize,
    lip: &EmpiricalLipConfig,
    seed: u64,
) -> Result<Vec<serde_json::Value>> {
    let mut rng = seed::rng(seed);
    (0..instances)
        .map(|i| {
            let arch = random_architecture(&mut rng, RandomArchOptions::default(), 1.0, 1.0)?;
            let w1: Vec<f64> = (0..arch.p()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let w2: Vec<f64> = (0..arch.p()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let r = check_param_lipschitz(&arch, &w1, &w2, probes, seed::mix(seed, 2 * i as u64))?;
            let net = materialize(&arch, &w1)?;
            let est = certify_network(&net, arch.radius, lip, seed::mix(seed, 2 * i as u64 + 1))?;
            let pass = r.pass && est.sandwich_holds();
            Ok(
                json!({"instance": i, "d": arch.input_dim, "D": arch.depth(), "p": arch.p(), "Q": arch.q(),
                      "max_lhs": r.max_lhs, "rhs": r.rhs, "b_w1": r.b_w1, "spectral_budget": r.spectral_budget,
                      "budget_ok": r.budget_ok, "lip_empirical": est.empirical_lower, "pass": pass}),
            )
        })
        .collect()
}

fn param_lip(cfg: &SuiteConfig, seed: u64) -> Result<Vec<CheckOutcome>> {
    let rows = param_lip_instances(
        cfg.param_lip_instances,
        cfg.param_lip_probes,
        &cfg.param_lip_probe_cfg,
        seed,
    )?;
    let passed = rows.iter().filter(|r| r["pass"] == true).count();
    Ok(vec![CheckOutcome {
        name: "param_lip".into(),
        pass: passed == rows.len(),
        details: json!({"instances": rows.len(), "passed": passed,
                        "failures": rows.iter().filter(|r| r["pass"] != true).collect::<Vec<_>>()}),
    }])
}

/// Runs the selected concentration checks. An empty selection passes
/// vacuously with a warning.
pub fn concentration_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    if cfg.checks.is_empty() {
        warnings.push("no checks selected; suite passes vacuously".to_string());
    }
    for (i, check) in cfg.checks.iter().enumerate() {
        let s = seed::mix(cfg.seed, 100 + i as u64);
        log::info!("running {check:?} checks");
        checks.extend(match check {
            SuiteCheck::Isoperimetry => isoperimetry(cfg, s)?,
            SuiteCheck::Subgaussian => subgaussian(cfg, s)?,
            SuiteCheck::Noise => noise(cfg, s)?,
            SuiteCheck::ParamLip => param_lip(cfg, s)?,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport { checks, warnings, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_selection_is_vacuous() {
        let cfg = SuiteConfig::from_config(&KvConfig::parse("checks =").unwrap()).unwrap();
        let r = concentration_suite(&cfg).unwrap();
        assert!(r.pass);
        assert!(r.checks.is_empty());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn wrong_constant_fails() {
        let text = "checks = isoperimetry\niso.kinds = gaussian\niso.dims = 100\niso.functionals = 2\niso.samples = 10000\niso.c = 0.01";
        let cfg = SuiteConfig::from_config(&KvConfig::parse(text).unwrap()).unwrap();
        let r = concentration_suite(&cfg).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn small_default_like_run_passes() {
        let text = "iso.dims = 20\niso.functionals = 2\niso.samples = 10000\nsubg.trials = 20000\nnoise.n = 5000\nparam_lip.instances = 5";
        let cfg = SuiteConfig::from_config(&KvConfig::parse(text).unwrap()).unwrap();
        let r = concentration_suite(&cfg).unwrap();
        assert!(r.pass, "{}", serde_json::to_string_pretty(&r).unwrap());
        assert!(
            SuiteConfig::from_config(&KvConfig::parse("checks = all_of_them").unwrap())
                .unwrap_err()
                .is_config()
        );
    }
}
