// Draws a labelled dataset from a sphere/Gaussian mixture and checks the
// empirical noise moments against the label model.

use robustness_law_lab::isodist::{
    min_pairwise_distance, noise_moment_checks, sample_dataset, Component, ComponentKind, DistributionSpec, LabelModel,
};

pub fn run_example() -> robustness_law_lab::Result<()> {
    let spec = DistributionSpec::mixture(vec![
        Component::new(ComponentKind::Sphere, 32).with_weight(0.5),
        Component::new(ComponentKind::Gaussian, 32).with_weight(0.5),
    ])?;
    let model = LabelModel::flip(0, 0.2)?;
    let ds = sample_dataset(&spec, &model, 2000, 7)?;

    let noise = noise_moment_checks(&ds, Some(0.3));
    println!(
        "n = {}, d = {}, sigma^2 = {:.3}, mean z^2 = {:.4}, mean z g = {:+.4}",
        ds.n(),
        ds.d(),
        noise.sigma_sq,
        noise.mean_z_sq,
        noise.mean_z_g
    );
    println!("min pairwise distance: {:.4}", min_pairwise_distance(&ds.x)?);
    assert!(!noise.flagged);
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
