// Size/robustness tradeoff for projected interpolators: sweep the
// projected dimension, write the CSV and fit the log-log slope.

use robustness_law_lab::config::KvConfig;
use robustness_law_lab::runner::{slope_fit, tradeoff_experiment, write_tradeoff, ExperimentConfig};

pub fn run_example() -> robustness_law_lab::Result<()> {
    let cfg = KvConfig::parse(
        "dist.kind = sphere
         dist.d = 128
         label.kind = pure_noise
         n = 60
         seeds = 0, 1, 2
         sweep.d_tilde = 32, 64, 128",
    )?;
    let exp = ExperimentConfig::from_config(&cfg)?;
    let result = tradeoff_experiment(&exp)?;
    for row in &result.rows {
        println!(
            "p = {:>5}  d~ = {:>3}  lip_certified = {:.3}  informal = {:.3}  {}",
            row.p, row.d_tilde, row.lip_certified, row.informal_bound, row.status
        );
    }
    let fit = slope_fit(&result.rows)?;
    println!("slope {:.3}, r^2 {:.4}", fit.slope, fit.r2);

    let dir = std::env::temp_dir().join(format!("tradeoff-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let sidecar = write_tradeoff(&dir.join("tradeoff.csv"), &exp, &result)?;
    println!("wrote {} rows to {}", sidecar.rows, dir.display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
