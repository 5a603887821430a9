// Normalized sums of independent subgaussian variables stay subgaussian:
// tail of `n^{-1/2} sum X_i` against `2 exp(-t^2 / (18 C))`.

use robustness_law_lab::theory::{subgaussian_avg_check, Generator};

pub fn run_example() -> robustness_law_lab::Result<()> {
    let t_grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    for gen in [Generator::Rademacher, Generator::Gaussian] {
        let r = subgaussian_avg_check(gen, 2.0, 50, 100_000, &t_grid, 4)?;
        for row in &r.rows {
            println!(
                "{gen:?} t = {:.1}: empirical {:.5} <= bound {:.5}",
                row.t, row.empirical, row.bound
            );
        }
        println!("{gen:?} mgf mean {:.4} +- {:.4}", r.mgf_mean, r.mgf_std_error);
        assert!(r.pass);
    }
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
