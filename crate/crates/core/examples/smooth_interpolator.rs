// Sum-of-bumps interpolator through noisy data: exact fit, analytic
// Lipschitz constant and a JSON round trip.

use robustness_law_lab::interp::{build_bump_interpolator, RadiusPolicy, SmoothInterpolator};
use robustness_law_lab::isodist::{sample_dataset, ComponentKind, DistributionSpec, LabelModel};

pub fn run_example() -> robustness_law_lab::Result<()> {
    let spec = DistributionSpec::single(ComponentKind::Sphere, 64);
    let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 100, 5)?;
    let f = build_bump_interpolator(&ds, RadiusPolicy::HalfMinSep)?;

    let residual =
        ds.x.iter()
            .zip(&ds.y)
            .map(|(x, y)| f.evaluate(x).map(|v| (v - y).abs()))
            .collect::<robustness_law_lab::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0f64, f64::max);
    println!(
        "p = {}, radius = {:.4}, max residual = {residual:.2e}, analytic Lip = {:.3}",
        f.param_count(),
        f.radius,
        f.analytic_lip()
    );
    assert!(residual <= 1e-12);

    let wire = serde_json::to_string(&f.to_wire())?;
    let back = SmoothInterpolator::from_wire(&serde_json::from_str(&wire)?)?;
    assert_eq!(back, f);
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
