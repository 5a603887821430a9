use serde::{Deserialize, Serialize};
use serde_json::json;

use super::inputs::{BoundInputs, BoundReport};
use crate::error::{LabError, Result};

/// Log-size of the parameter-space net: `p ln(1 + 60WJ/eps)`, or
/// `s ln(p (1 + 60WJ/eps))` for `s`-sparse parameters.
pub fn covering_log_size(p: usize, w_diam: f64, j_lip: f64, eps: f64, s: Option<usize>) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(LabError::Domain(format!("covering size needs eps > 0, got {eps}")));
    }
    let per = (1.0 + 60.0 * w_diam * j_lip / eps).ln();
    Ok(match s {
        None => p as f64 * per,
        Some(0) => 0.0,
        Some(s) => {
            if p == 0 {
                return Err(LabError::Domain("sparse covering needs p >= 1".into()));
            }
            s as f64 * ((p as f64).ln() + per)
        }
    })
}

fn log_f(inp: &BoundInputs) -> Result<f64> {
    match inp.log_f {
        Some(v) => Ok(v),
        None => covering_log_size(inp.p, inp.w_diam, inp.j_lip, inp.eps, inp.s),
    }
}

/// `ln(a e^x + b e^y)` without overflow.
fn log_add(ln_a: f64, x: f64, ln_b: f64, y: f64) -> f64 {
    let (u, v) = (ln_a + x, ln_b + y);
    let m = u.max(v);
    m + ((u - m).exp() + (v - m).exp()).ln()
}

/// Value of a probability-style bound from its logarithm, saturating at
/// `f64::MAX` with a caveat that carries the log value.
fn saturate(report_ln: f64) -> (f64, Option<String>) {
    let v = report_ln.exp();
    if v.is_finite() {
        (v, None)
    } else {
        (
            f64::MAX,
            Some(format!("value overflows f64; ln(value) = {report_ln:.6e}")),
        )
    }
}

fn first_term_exponent(inp: &BoundInputs) -> f64 {
    -(inp.n as f64) * inp.eps * inp.eps / (512.0 * inp.k as f64)
}

/// `4k exp(-n eps^2 / (8^3 k)) + 2 exp(logF - eps^2 n d / (10^4 c L^2))`.
///
/// Returned raw; values above 1 carry a caveat.
pub fn finite_class_failure_prob(inp: &BoundInputs) -> Result<BoundReport> {
    inp.validate()?;
    let lf = log_f(inp)?;
    let (n, d, k) = (inp.n as f64, inp.d as f64, inp.k as f64);
    let second = lf - inp.eps * inp.eps * n * d / (1e4 * inp.c * inp.lip * inp.lip);
    let (value, overflow) = saturate(log_add((4.0 * k).ln(), first_term_exponent(inp), 2f64.ln(), second));
    Ok(BoundReport::new(
        "finite_class_failure_prob",
        value,
        "4k exp(-n eps^2/(8^3 k)) + 2 exp(logF - eps^2 n d/(10^4 c L^2))",
        json!({"n": inp.n, "d": inp.d, "k": inp.k, "eps": inp.eps, "c": inp.c, "L": inp.lip, "logF": lf}),
    )?
    .caveat(value > 1.0, "bound exceeds 1")
    .caveat(overflow.is_some(), overflow.unwrap_or_default())
    .caveat(inp.log_f.is_none(), "logF taken from the parameter-space covering size"))
}

/// Dimension required by the sigma-improved bound: `C1 c L^2 sigma^2 / eps^2`.
pub fn improved_required_dim(inp: &BoundInputs) -> f64 {
    inp.c1 * inp.c * inp.lip * inp.lip * inp.sigma_sq / (inp.eps * inp.eps)
}

/// `(4k+1) exp(-n eps^2 / (8^3 k)) + exp(logF - eps^2 n d / (C2 c L^2 sigma^2))`.
///
/// Refuses when `d < C1 c L^2 sigma^2 / eps^2`.
pub fn improved_failure_prob(inp: &BoundInputs) -> Result<BoundReport> {
    inp.validate()?;
    let required = improved_required_dim(inp);
    if (inp.d as f64) < required {
        return Err(LabError::Refusal(format!(
            "improved bound requires d >= C1 c L^2 sigma^2 / eps^2 = {} (C1 = {}), got d = {}",
            required.ceil(),
            inp.c1,
            inp.d
        )));
    }
    let lf = log_f(inp)?;
    let (n, d, k) = (inp.n as f64, inp.d as f64, inp.k as f64);
    let second = lf - inp.eps * inp.eps * n * d / (inp.c2 * inp.c * inp.lip * inp.lip * inp.sigma_sq);
    let (value, overflow) = saturate(log_add((4.0 * k + 1.0).ln(), first_term_exponent(inp), 0.0, second));
    Ok(BoundReport::new(
        "improved_failure_prob",
        value,
        "(4k+1) exp(-n eps^2/(8^3 k)) + exp(logF - eps^2 n d/(C2 c L^2 sigma^2))",
        json!({"n": inp.n, "d": inp.d, "k": inp.k, "eps": inp.eps, "c": inp.c, "L": inp.lip,
               "sigma_sq": inp.sigma_sq, "logF": lf, "C1": inp.c1, "C2": inp.c2}),
    )?
    .caveat(value > 1.0, "bound exceeds 1")
    .caveat(overflow.is_some(), overflow.unwrap_or_default())
    .caveat(inp.eps > inp.sigma_sq, "eps exceeds sigma^2"))
}

/// Lipschitz threshold any function fitting below `sigma^2 - eps` must
/// exceed:
///
/// `eps / (sigma sqrt(C2 c)) * sqrt(n d / (p ln(1 + 60WJ/eps) + ln(4/delta)))`,
/// with `s ln(p (1 + 60WJ/eps))` in place of the first log term when `s` is set.
///
/// The sample-size and dimension hypotheses are checked and reported as
/// caveats; the value is computed regardless. The dimension hypothesis is
/// evaluated at `L` equal to the returned threshold.
pub fn lip_lower_bound(inp: &BoundInputs) -> Result<BoundReport> {
    inp.validate()?;
    let cover = covering_log_size(inp.p, inp.w_diam, inp.j_lip, inp.eps, inp.s)?;
    let (n, d, k) = (inp.n as f64, inp.d as f64, inp.k as f64);
    let denom = cover + (4.0 / inp.delta).ln();
    let value = inp.eps / (inp.sigma() * (inp.c2 * inp.c).sqrt()) * (n * d / denom).sqrt();
    let k_bound = 1e4 * k * (8.0 * k / inp.delta).ln();
    let d_needed = inp.c1 * inp.c * value * value * inp.sigma_sq / (inp.eps * inp.eps);
    let formula = if inp.s.is_some() {
        "eps/(sigma sqrt(C2 c)) sqrt(n d/(s ln(p(1+60WJ/eps)) + ln(4/delta)))"
    } else {
        "eps/(sigma sqrt(C2 c)) sqrt(n d/(p ln(1+60WJ/eps) + ln(4/delta)))"
    };
    Ok(BoundReport::new(
        "lip_lower_bound",
        value,
        formula,
        json!({"n": inp.n, "d": inp.d, "p": inp.p, "s": inp.s, "eps": inp.eps, "delta": inp.delta,
               "sigma_sq": inp.sigma_sq, "c": inp.c, "k": inp.k, "W": inp.w_diam, "J": inp.j_lip,
               "C1": inp.c1, "C2": inp.c2}),
    )?
    .caveat(
        k_bound > n * inp.eps * inp.eps,
        format!("sample-size hypothesis fails: 10^4 k ln(8k/delta) = {k_bound:.4e} > n eps^2"),
    )
    .caveat(
        d < d_needed,
        format!("dimension hypothesis fails: needs d >= {d_needed:.4e}"),
    )
    .caveat(inp.eps > inp.sigma_sq, "eps exceeds sigma^2"))
}

/// `(eps/sigma) sqrt(n d / p)` with unit hidden constant.
pub fn informal_lower_bound(n: usize, d: usize, p: usize, eps: f64, sigma: f64) -> f64 {
    eps / sigma * (n as f64 * d as f64 / p as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthBounds {
    /// `sqrt(n d / (D p))`.
    pub with_depth: Option<f64>,
    /// `sqrt(n d / (p ln B_bar))`.
    pub without_depth: Option<f64>,
}

/// Depth-aware variants of the informal bound, unit hidden constants. Each
/// entry is `None` when its input is missing or out of range (`D >= 1`,
/// `B_bar > 1`).
pub fn depth_lower_bounds(n: usize, d: usize, p: usize, depth: Option<usize>, b_bar: Option<f64>) -> DepthBounds {
    let nd_over_p = n as f64 * d as f64 / p as f64;
    DepthBounds {
        with_depth: depth.filter(|&dd| dd >= 1).map(|dd| (nd_over_p / dd as f64).sqrt()),
        without_depth: b_bar.filter(|&b| b > 1.0).map(|b| (nd_over_p / b.ln()).sqrt()),
    }
}

/// `C max(sqrt(k/n), L sqrt(c logF / (n d)), sqrt(ln(1/delta)/n))`.
pub fn generalization_gap_bound(inp: &BoundInputs) -> Result<BoundReport> {
    inp.validate()?;
    let lf = log_f(inp)?;
    let (n, d, k) = (inp.n as f64, inp.d as f64, inp.k as f64);
    let terms = [
        (k / n).sqrt(),
        inp.lip * (inp.c * lf / (n * d)).sqrt(),
        ((1.0 / inp.delta).ln() / n).sqrt(),
    ];
    let value = inp.gap_constant * terms.iter().cloned().fold(0.0, f64::max);
    BoundReport::new(
        "generalization_gap_bound",
        value,
        "C max(sqrt(k/n), L sqrt(c logF/(n d)), sqrt(ln(1/delta)/n))",
        json!({"n": inp.n, "d": inp.d, "k": inp.k, "L": inp.lip, "c": inp.c, "logF": lf,
               "delta": inp.delta, "C": inp.gap_constant}),
    )
}

/// Every calculator that applies to `inp`. Refused bounds are listed
/// separately with the reason.
pub fn all_bounds(inp: &BoundInputs) -> Result<(Vec<BoundReport>, Vec<String>)> {
    inp.validate()?;
    let mut reports = Vec::new();
    let mut refused = Vec::new();
    let cover = covering_log_size(inp.p, inp.w_diam, inp.j_lip, inp.eps, inp.s)?;
    reports.push(BoundReport::new(
        "covering_log_size",
        cover,
        if inp.s.is_some() {
            "s ln(p(1+60WJ/eps))"
        } else {
            "p ln(1+60WJ/eps)"
        },
        json!({"p": inp.p, "s": inp.s, "W": inp.w_diam, "J": inp.j_lip, "eps": inp.eps}),
    )?);
    reports.push(finite_class_failure_prob(inp)?);
    match improved_failure_prob(inp) {
        Ok(r) => reports.push(r),
        Err(LabError::Refusal(msg)) => refused.push(msg),
        Err(e) => return Err(e),
    }
    reports.push(lip_lower_bound(inp)?);
    if inp.p > 0 {
        reports.push(BoundReport::new(
            "informal_lower_bound",
            informal_lower_bound(inp.n, inp.d, inp.p, inp.eps, inp.sigma()),
            "(eps/sigma) sqrt(n d/p)",
            json!({"n": inp.n, "d": inp.d, "p": inp.p, "eps": inp.eps, "sigma_sq": inp.sigma_sq}),
        )?);
        let depth = depth_lower_bounds(inp.n, inp.d, inp.p, inp.depth, inp.b_bar);
        if let Some(v) = depth.with_depth {
            reports.push(BoundReport::new(
                "depth_lower_bound_with_depth",
                v,
                "sqrt(n d/(D p))",
                json!({"n": inp.n, "d": inp.d, "p": inp.p, "D": inp.depth}),
            )?);
        }
        if let Some(v) = depth.without_depth {
            reports.push(BoundReport::new(
                "depth_lower_bound_without_depth",
                v,
                "sqrt(n d/(p ln B_bar))",
                json!({"n": inp.n, "d": inp.d, "p": inp.p, "B_bar": inp.b_bar}),
            )?);
        }
    }
    reports.push(generalization_gap_bound(inp)?);
    Ok((reports, refused))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thm3_inputs() -> BoundInputs {
        BoundInputs {
            k: 1,
            n: 1000,
            eps: 0.5,
            log_f: Some(0.0),
            d: 100,
            c: 1.0,
            lip: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn covering_examples() {
        assert!((covering_log_size(2, 1.0, 1.0, 0.6, None).unwrap() - 2.0 * 101f64.ln()).abs() < 1e-12);
        assert_eq!(covering_log_size(0, 1.0, 1.0, 0.6, None).unwrap(), 0.0);
        assert!((covering_log_size(10, 1.0, 1.0, 0.6, Some(1)).unwrap() - 1010f64.ln()).abs() < 1e-12);
        assert!(covering_log_size(1, 1.0, 1.0, 0.0, None).is_err());
    }

    #[test]
    fn finite_class_limits() {
        let base = thm3_inputs();
        let huge_l = BoundInputs {
            lip: 1e12,
            log_f: Some(1.5),
            ..base.clone()
        };
        let v = finite_class_failure_prob(&huge_l).unwrap().value;
        let first = 4.0 * (-1000.0 * 0.25 / 512.0f64).exp();
        assert!((v - first - 2.0 * 1.5f64.exp()).abs() < 1e-9);
        let r = finite_class_failure_prob(&base).unwrap();
        assert!(r.caveats.iter().any(|c| c.contains("exceeds 1")));
    }

    #[test]
    fn improved_refuses_below_dimension_threshold() {
        let err = improved_failure_prob(&thm3_inputs()).unwrap_err();
        match err {
            LabError::Refusal(msg) => assert!(msg.contains("40000"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn depth_bounds_examples() {
        let b = depth_lower_bounds(100, 100, 100, Some(4), Some(std::f64::consts::E));
        assert!((b.with_depth.unwrap() - 5.0).abs() < 1e-12);
        assert!((b.without_depth.unwrap() - 10.0).abs() < 1e-12);
        let none = depth_lower_bounds(100, 100, 100, Some(0), Some(1.0));
        assert_eq!(none.with_depth, None);
        assert_eq!(none.without_depth, None);
    }

    #[test]
    fn all_bounds_lists_refusals() {
        let (reports, refused) = all_bounds(&thm3_inputs()).unwrap();
        assert_eq!(refused.len(), 1);
        assert!(reports.iter().all(|r| r.value.is_finite()));
        assert!(reports.iter().any(|r| r.name == "lip_lower_bound"));
    }

    #[test]
    fn huge_log_f_saturates_with_log_value() {
        let inp = BoundInputs {
            log_f: Some(1e5),
            ..thm3_inputs()
        };
        let r = finite_class_failure_prob(&inp).unwrap();
        assert_eq!(r.value, f64::MAX);
        let expected = 2f64.ln() + 1e5 - 0.25 * 1000.0 * 100.0 / 1e4;
        let cav = r.caveats.iter().find(|c| c.contains("ln(value)")).unwrap();
        let logged: f64 = cav.rsplit("= ").next().unwrap().parse().unwrap();
        assert!((logged - expected).abs() / expected < 1e-6);
    }
}
