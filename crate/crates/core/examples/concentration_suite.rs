// The full concentration suite at reduced sizes, configured from text.

use robustness_law_lab::config::KvConfig;
use robustness_law_lab::runner::{concentration_suite, SuiteConfig};

pub fn run_example() -> robustness_law_lab::Result<()> {
    let cfg = KvConfig::parse(
        "iso.dims = 20, 40
         iso.functionals = 4
         iso.samples = 20000
         subg.trials = 50000
         noise.n = 5000
         param_lip.instances = 10",
    )?;
    let report = concentration_suite(&SuiteConfig::from_config(&cfg)?)?;
    for check in &report.checks {
        println!("{:<24} {}", check.name, if check.pass { "pass" } else { "FAIL" });
    }
    println!("suite pass = {}", report.pass);
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
