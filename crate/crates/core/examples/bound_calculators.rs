// Closed-form bounds: covering number, failure probabilities, the
// Lipschitz lower bound and its depth variants.

use robustness_law_lab::theory::{all_bounds, depth_lower_bounds, informal_lower_bound, BoundInputs};

pub fn run_example() -> robustness_law_lab::Result<()> {
    let inp = BoundInputs {
        n: 100_000,
        d: 784,
        p: 10_000,
        eps: 0.5,
        delta: 0.01,
        w_diam: 100.0,
        j_lip: 10.0,
        ..Default::default()
    };
    let (reports, refused) = all_bounds(&inp)?;
    for r in &reports {
        println!("{:<28} {:>12.4e}  {}", r.name, r.value, r.caveats.join("; "));
    }
    for why in refused {
        println!("refused: {why}");
    }
    println!(
        "informal (eps/sigma) sqrt(nd/p) = {:.3}",
        informal_lower_bound(inp.n, inp.d, inp.p, inp.eps, inp.sigma())
    );
    let depth = depth_lower_bounds(inp.n, inp.d, inp.p, Some(4), Some(10.0));
    println!("{depth:?}");
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
