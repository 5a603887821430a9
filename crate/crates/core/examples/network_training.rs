// Two-layer ReLU network trained below the noise level on flip-noise
// labels; the certified Lipschitz constant is compared with the lower bound.

use robustness_law_lab::config::KvConfig;
use robustness_law_lab::runner::commands;

pub fn run_example() -> robustness_law_lab::Result<()> {
    let cfg = KvConfig::parse(
        "dist.kind = sphere
         dist.d = 16
         label.kind = flip
         n = 64
         net.hidden = 128
         seed = 1",
    )?;
    let out = commands::train(&cfg, None)?;
    println!("{}", out.text);
    println!(
        "reached target: {}, certified >= lower bound: {}",
        out.report["reached_target"], out.report["sound"]
    );
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
