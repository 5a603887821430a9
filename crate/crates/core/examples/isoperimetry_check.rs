// Tail of random unit linear functionals under each base distribution,
// compared with the isoperimetric envelope `2 exp(-d t^2 / 2)`.

use rand_distr::{Distribution, StandardNormal};
use robustness_law_lab::isodist::{isoperimetry_tail_check_batch, Component, ComponentKind};
use robustness_law_lab::seed;

pub fn run_example() -> robustness_law_lab::Result<()> {
    let d = 50;
    let t_grid: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
    let mut rng = seed::rng(11);
    let directions: Vec<Vec<f64>> = (0..5)
        .map(|_| {
            let u: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            u.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    let functionals: Vec<_> = directions
        .iter()
        .map(|u| move |x: &[f64]| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .collect();

    for kind in [ComponentKind::Sphere, ComponentKind::Gaussian, ComponentKind::Cube] {
        let comp = Component::new(kind, d);
        let reports = isoperimetry_tail_check_batch(&comp, &functionals, 1.0, &t_grid, 20_000, 3)?;
        let worst = reports
            .iter()
            .flat_map(|r| r.rows.iter())
            .map(|row| row.empirical / row.bound)
            .fold(0.0f64, f64::max);
        let pass = reports.iter().all(|r| r.pass);
        println!("{kind:?}: worst empirical/bound ratio {worst:.3}, pass = {pass}");
        assert!(pass);
    }
    Ok(())
}

fn main() -> robustness_law_lab::Result<()> {
    run_example()
}
