// Lipschitz sandwich for a small network: sampled lower bound, spectral
// product upper bound, and the skip-aware variant.

use robustness_law_lab::lipcert::{certify_network, skip_aware_bound, EmpiricalLipConfig};
use robustness_law_lab::netzoo::{materialize, Activation, Architecture};
use robustness_law_lab::seed;

pub fn run_example() -> robustness_law_lab::Result<()> {
    let arch = Architecture::feedforward(6, &[16, 8], Activation::Tanh, true, 1.0, 1.0)?;
    let w = arch.init_params(&mut seed::rng(2));
    let net = materialize(&arch, &w)?;
    let est = certify_network(&net, 1.0, &EmpiricalLipConfig::default(), 3)?;
    println!(
        "empirical >= {:.4}, spectral <= {:.4}, skip-aware <= {:.4}, probes {}",
        est.empirical_lower,
        est.spectral_upper.unwrap_or(f64::NAN),
        skip_aware_bound(&net),
        est.probes_used
    );
    for w in &est.warnings {
        println!("warning: {w}");
    }
    assert!(est.sandwich_holds());
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
