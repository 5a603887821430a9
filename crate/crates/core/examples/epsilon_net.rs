// Grid epsilon-net over a parameter box, verified by a dense oracle.

use robustness_law_lab::theory::net_construct_and_verify;

pub fn run_example() -> robustness_law_lab::Result<()> {
    let r = net_construct_and_verify(2, 1.0, 1.0, 0.3, 0.01)?;
    println!(
        "radius {:.4}, {} points per axis, net size {} (bound {:.0}), oracle max distance {:.4} over {} points",
        r.covering_radius, r.points_per_axis, r.net_size, r.size_bound, r.oracle_max_distance, r.oracle_points
    );
    assert!(r.is_net);
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
