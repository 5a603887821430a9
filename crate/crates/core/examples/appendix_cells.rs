// Sign-pattern cells of the hypercube: measure of the thin slab around the
// coordinate hyperplanes and how often sampled points land in their own cell.

use robustness_law_lab::appendixlab::{slab_measure_estimate, unique_cell_fraction};

pub fn run_example() -> robustness_law_lab::Result<()> {
    for d in [5, 10, 20] {
        let slab = slab_measure_estimate(d, 200_000, d as u64)?;
        println!(
            "d = {d}: width {:.2e}, slab measure {:.4} (bound {})",
            slab.width, slab.empirical_slab_measure, slab.bound
        );
    }
    let cells = unique_cell_fraction(14, 160, 50, 1)?;
    println!(
        "d = 14, n = 160: {:.0}% of trials put at least 3n/4 points in unique cells",
        100.0 * cells.success_rate
    );
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
