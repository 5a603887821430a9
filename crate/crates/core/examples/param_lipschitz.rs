// Parameter-Lipschitz inequality on random architectures with weight
// sharing: `|f_w1 - f_w2| <= B_bar^2 Q R sqrt(p) |w1 - w2|`.

use robustness_law_lab::lipcert::EmpiricalLipConfig;
use robustness_law_lab::runner::param_lip_instances;

pub fn run_example() -> robustness_law_lab::Result<()> {
    let rows = param_lip_instances(20, 100, &EmpiricalLipConfig::default(), 9)?;
    for r in rows.iter().take(5) {
        println!(
            "d = {}, D = {}, p = {}, Q = {}: max lhs {:.3e} <= rhs {:.3e}",
            r["d"],
            r["D"],
            r["p"],
            r["Q"],
            r["max_lhs"].as_f64().unwrap_or(f64::NAN),
            r["rhs"].as_f64().unwrap_or(f64::NAN)
        );
    }
    let passed = rows.iter().filter(|r| r["pass"] == true).count();
    println!("{passed}/{} instances pass", rows.len());
    assert_eq!(passed, rows.len());
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
