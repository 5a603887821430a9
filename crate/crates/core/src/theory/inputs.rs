use serde::{Deserialize, Serialize};

use crate::config::KvConfig;
use crate::error::{LabError, Result};

/// Inputs shared by the closed-form calculators. Optional fields are only
/// read by the bounds that need them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub eps: f64,
    pub delta: f64,
    pub sigma_sq: f64,
    /// Isoperimetry constant.
    pub c: f64,
    /// Mixture size.
    pub k: usize,
    /// Lipschitz level.
    #[serde(rename = "L")]
    pub lip: f64,
    /// Parameter-space diameter.
    #[serde(rename = "W")]
    pub w_diam: f64,
    /// Parametrization Lipschitz constant.
    #[serde(rename = "J")]
    pub j_lip: f64,
    pub s: Option<usize>,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "logF")]
    pub log_f: Option<f64>,
    #[serde(rename = "D")]
    pub depth: Option<usize>,
    pub b_bar: Option<f64>,
    /// Leading constant of the generalization gap bound.
    pub gap_constant: f64,
}

pub const DEFAULT_C1: f64 = 1e4;
pub const DEFAULT_C2: f64 = 1e4;

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            n: 1000,
            d: 100,
            p: 100,
            eps: 0.1,
            delta: 0.1,
            sigma_sq: 1.0,
            c: 1.0,
            k: 1,
            lip: 1.0,
            w_diam: 1.0,
            j_lip: 1.0,
            s: None,
            c1: DEFAULT_C1,
            c2: DEFAULT_C2,
            log_f: None,
            depth: None,
            b_bar: None,
            gap_constant: 1.0,
        }
    }
}

const KEYS: &[&str] = &[
    "n",
    "d",
    "p",
    "eps",
    "delta",
    "sigma_sq",
    "c",
    "k",
    "L",
    "W",
    "J",
    "s",
    "C1",
    "C2",
    "logF",
    "D",
    "B_bar",
    "gap_constant",
];

impl BoundInputs {
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    /// Checks the positivity and range requirements shared by every bound.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(LabError::Domain(format!("bound inputs: {what}")));
        if self.n == 0 || self.d == 0 || self.k == 0 {
            return bad("n, d and k must be positive");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.sigma_sq > 0.0 && self.sigma_sq <= 1.0) {
            return bad("sigma_sq must lie in (0, 1]");
        }
        for (name, v) in [
            ("c", self.c),
            ("L", self.lip),
            ("W", self.w_diam),
            ("J", self.j_lip),
            ("C1", self.c1),
            ("C2", self.c2),
            ("gap_constant", self.gap_constant),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive and finite"));
            }
        }
        if let Some(s) = self.s {
            if s == 0 || s > self.p {
                return bad("sparsity s must satisfy 1 <= s <= p");
            }
        }
        if let Some(lf) = self.log_f {
            if !(lf >= 0.0 && lf.is_finite()) {
                return bad("logF must be nonnegative");
            }
        }
        Ok(())
    }

    /// Reads the inputs from a flat config. Keys may carry a `bounds.`
    /// prefix; unset keys keep their defaults.
    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        let cfg = if cfg.keys().any(|k| k.starts_with("bounds.")) {
            let stray: Vec<&str> = cfg.keys().filter(|k| !k.starts_with("bounds.")).collect();
            if let Some(k) = stray.first() {
                return Err(LabError::Config(format!("unknown key `{k}`")));
            }
            cfg.section("bounds")
        } else {
            cfg.clone()
        };
        cfg.ensure_known(KEYS)?;
        let d = Self::default();
        let out = Self {
            n: cfg.get_or("n", d.n)?,
            d: cfg.get_or("d", d.d)?,
            p: cfg.get_or("p", d.p)?,
            eps: cfg.get_or("eps", d.eps)?,
            delta: cfg.get_or("delta", d.delta)?,
            sigma_sq: cfg.get_or("sigma_sq", d.sigma_sq)?,
            c: cfg.get_or("c", d.c)?,
            k: cfg.get_or("k", d.k)?,
            lip: cfg.get_or("L", d.lip)?,
            w_diam: cfg.get_or("W", d.w_diam)?,
            j_lip: cfg.get_or("J", d.j_lip)?,
            s: cfg.get("s")?,
            c1: cfg.get_or("C1", d.c1)?,
            c2: cfg.get_or("C2", d.c2)?,
            log_f: cfg.get("logF")?,
            depth: cfg.get("D")?,
            b_bar: cfg.get("B_bar")?,
            gap_constant: cfg.get_or("gap_constant", d.gap_constant)?,
        };
        out.validate().map_err(|e| LabError::Config(e.to_string()))?;
        Ok(out)
    }
}

/// One evaluated bound with its formula, the inputs it read and any caveats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub formula: String,
    pub inputs: serde_json::Value,
    pub caveats: Vec<String>,
}

impl BoundReport {
    pub(crate) fn new(name: &str, value: f64, formula: &str, inputs: serde_json::Value) -> Result<Self> {
        if !value.is_finite() {
            return Err(LabError::Domain(format!("{name}: non-finite value {value}")));
        }
        Ok(Self {
            name: name.into(),
            value,
            formula: formula.into(),
            inputs,
            caveats: Vec::new(),
        })
    }

    pub(crate) fn caveat(mut self, cond: bool, msg: impl Into<String>) -> Self {
        if cond {
            self.caveats.push(msg.into());
        }
        self
    }
}
