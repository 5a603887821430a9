// Monte Carlo Rademacher complexity: the singleton closed form and a
// family of clipped linear functions against the envelope.

use robustness_law_lab::isodist::{ComponentKind, DistributionSpec};
use robustness_law_lab::theory::{
    clipped_linear_family, rademacher_envelope, rademacher_estimate, RADEMACHER_ENVELOPE_CONSTANT,
};

pub fn run_example() -> robustness_law_lab::Result<()> {
    let spec = DistributionSpec::single(ComponentKind::Sphere, 20);
    let one = [|_: &[f64]| 1.0];
    let single = rademacher_estimate(&one, &spec, 2, 20_000, 1)?;
    println!(
        "f = 1, n = 2: {:.4} +- {:.4} (exact 0.5)",
        single.estimate, single.std_error
    );

    let family = clipped_linear_family(64, 20, 2.0, 2);
    let fns: Vec<_> = family.iter().map(|g| move |x: &[f64]| g.eval(x)).collect();
    let n = 200;
    let r = rademacher_estimate(&fns, &spec, n, 500, 3)?;
    let env = rademacher_envelope(RADEMACHER_ENVELOPE_CONSTANT, 1, n, 20, 1.0, 2.0, fns.len());
    println!("64 clipped linear maps: {:.4} <= envelope {env:.4}", r.estimate);
    assert!(r.estimate <= env);
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
