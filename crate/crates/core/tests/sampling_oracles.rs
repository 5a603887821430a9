use approx::assert_relative_eq;
use proptest::prelude::*;
use robustness_law_lab::appendixlab::*;
use robustness_law_lab::isodist::*;
use robustness_law_lab::LabError;
use statrs::distribution::{Beta, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn sphere_rows_are_unit_and_labels_binary() {
    let spec = DistributionSpec::single(ComponentKind::Sphere, 3);
    let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 2, 7).unwrap();
    for (x, y) in ds.x.iter().zip(&ds.y) {
        assert_relative_eq!(norm(x), 1.0, epsilon = 1e-12);
        assert!(*y == 1.0 || *y == -1.0);
    }
}

#[test]
fn high_dimensional_gaussian_norm_concentrates() {
    let spec = DistributionSpec::single(ComponentKind::Gaussian, 10_000);
    for seed in 0..200 {
        let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 1, seed).unwrap();
        let r = norm(&ds.x[0]);
        assert!((0.95..=1.05).contains(&r), "seed {seed}: {r}");
    }
}

#[test]
fn cube_has_unit_diameter() {
    let spec = DistributionSpec::single(ComponentKind::Cube, 16);
    let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 500, 3).unwrap();
    let half = 0.5 / 4.0;
    assert!(ds.x.iter().flatten().all(|v| v.abs() <= half));
}

#[test]
fn sampling_is_bit_identical_per_seed() {
    let spec = DistributionSpec::mixture(vec![
        Component::new(ComponentKind::Sphere, 5).with_weight(0.3),
        Component::new(ComponentKind::Cube, 5).with_weight(0.7),
    ])
    .unwrap();
    let model = LabelModel::additive(
        Target::Sine {
            coord: 1,
            freq: 3.0,
            amplitude: 0.5,
        },
        0.5,
    )
    .unwrap();
    let a = sample_dataset(&spec, &model, 300, 11).unwrap();
    let b = sample_dataset(&spec, &model, 300, 11).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), sample_dataset(&spec, &model, 300, 12).unwrap().to_csv());
}

#[test]
fn labels_stay_in_range_for_every_model() {
    let spec = DistributionSpec::single(ComponentKind::Gaussian, 4);
    let models = [
        LabelModel::pure_noise(),
        LabelModel::flip(2, 0.35).unwrap(),
        LabelModel::additive(Target::Sign { coord: 0 }, 0.0).unwrap(),
        LabelModel::additive(
            Target::Sine {
                coord: 3,
                freq: 1.0,
                amplitude: 0.3,
            },
            0.7,
        )
        .unwrap(),
    ];
    for m in models {
        let ds = sample_dataset(&spec, &m, 2000, 1).unwrap();
        assert!(ds.y.iter().all(|y| (-1.0..=1.0).contains(y)));
    }
    assert!(LabelModel::additive(Target::Sign { coord: 0 }, 0.1).is_err());
}

#[test]
fn noise_level_closed_forms() {
    assert_relative_eq!(LabelModel::flip(0, 0.2).unwrap().sigma_sq, 0.64, epsilon = 1e-15);
    let add = LabelModel::additive(Target::Zero, 0.9).unwrap();
    assert_relative_eq!(add.sigma_sq, 0.27, epsilon = 1e-15);
    let spec = DistributionSpec::single(ComponentKind::Sphere, 6);
    let ds = sample_dataset(&spec, &add, 200_000, 5).unwrap();
    let r = noise_moment_checks(&ds, None);
    // Hoeffding at 0.99 with z^2 in [0, 0.81]
    let dev = 0.81 * ((2.0f64 / 0.01).ln() / (2.0 * 200_000.0)).sqrt();
    assert!(r.deviation_z_sq <= dev, "{} > {dev}", r.deviation_z_sq);
}

#[test]
fn flip_noise_moments_meet_hoeffding_rate() {
    let spec = DistributionSpec::single(ComponentKind::Sphere, 10);
    let model = LabelModel::flip(0, 0.2).unwrap();
    let ok = (0..100)
        .filter(|&s| {
            let ds = sample_dataset(&spec, &model, 10_000, s).unwrap();
            noise_moment_checks(&ds, None).deviation_z_sq <= 0.05
        })
        .count();
    assert!(ok >= 99, "{ok}/100");
}

#[test]
fn pairwise_distance_examples() {
    assert_eq!(
        min_pairwise_distance(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]]).unwrap(),
        2.0
    );
    assert_eq!(min_pairwise_distance(&[vec![0.3, 0.4], vec![0.3, 0.4]]).unwrap(), 0.0);
    assert!(matches!(min_pairwise_distance(&[vec![1.0]]), Err(LabError::Domain(_))));
    let spec = DistributionSpec::single(ComponentKind::Sphere, 128);
    let separated = (0..100)
        .filter(|&s| {
            let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 200, s).unwrap();
            min_pairwise_distance(&ds.x).unwrap() >= 1.0
        })
        .count();
    assert!(separated >= 99, "{separated}/100");
}

fn unit(d: usize) -> Vec<f64> {
    let mut u: Vec<f64> = (0..d).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
    let n = norm(&u);
    u.iter_mut().for_each(|v| *v /= n);
    u
}

#[test]
fn sphere_tail_matches_cap_measure() {
    let d = 100;
    let u = unit(d);
    let f = |x: &[f64]| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let grid: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
    let n = 100_000;
    let r = isoperimetry_tail_check(&Component::new(ComponentKind::Sphere, d), &f, 1.0, &grid, n, 21).unwrap();
    // <u, x>^2 ~ Beta(1/2, (d-1)/2) on the sphere
    let cap = Beta::new(0.5, (d as f64 - 1.0) / 2.0).unwrap();
    for row in &r.rows {
        let exact = cap.sf(row.t * row.t);
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(
            (row.empirical - exact).abs() <= 5.0 * se + 2e-5,
            "t {}: {} vs {exact}",
            row.t,
            row.empirical
        );
        assert!(exact <= row.bound);
        if row.bound * n as f64 >= 10.0 {
            assert!(row.pass, "t {}", row.t);
        }
    }
}

#[test]
fn gaussian_tail_below_envelope_exactly() {
    let d = 100;
    let normal = Normal::new(0.0, 1.0).unwrap();
    for i in 1..=10 {
        let t = 0.05 * i as f64;
        let exact = 2.0 * normal.sf(t * (d as f64).sqrt());
        assert!(exact <= isoperimetric_bound(d, 1.0, 1.0, t));
    }
    let u = unit(d);
    let f = |x: &[f64]| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let r = isoperimetry_tail_check(
        &Component::new(ComponentKind::Gaussian, d),
        &f,
        1.0,
        &[0.1, 0.2],
        50_000,
        4,
    )
    .unwrap();
    for row in &r.rows {
        let exact = 2.0 * normal.sf(row.t * 10.0);
        assert!((row.empirical - exact).abs() < 5.0 * (exact / 50_000.0).sqrt());
    }
}

/// `P(|x_1| <= w)` for uniform `x` on `S^{d-1}`, by integrating the marginal
/// density `Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)) (1 - s^2)^{(d-3)/2}`.
fn coordinate_slab_mass(d: usize, w: f64) -> f64 {
    let df = d as f64;
    let norm = (ln_gamma(df / 2.0) - ln_gamma((df - 1.0) / 2.0)).exp() / std::f64::consts::PI.sqrt();
    let steps = 10_000;
    let h = w / steps as f64;
    let dens = |s: f64| norm * (1.0 - s * s).powf((df - 3.0) / 2.0);
    let mut acc = 0.5 * (dens(0.0) + dens(w));
    for i in 1..steps {
        acc += dens(i as f64 * h);
    }
    2.0 * acc * h
}

#[test]
fn slab_measure_against_marginal_oracle() {
    let d = 10;
    let p1 = coordinate_slab_mass(d, slab_width(d));
    // coordinates are nearly independent at this width; the pairwise
    // correction is O(p1^2) ~ 5e-7
    let oracle = 1.0 - (1.0 - p1).powi(d as i32);
    let r = slab_measure_estimate(d, 1_000_000, 3).unwrap();
    assert!(
        (r.empirical_slab_measure - oracle).abs() <= 3e-4,
        "{} vs {oracle}",
        r.empirical_slab_measure
    );
    assert!(r.pass);
}

#[test]
fn slab_trivial_cases() {
    assert_eq!(
        slab_measure_estimate(1, 100_000, 0).unwrap().empirical_slab_measure,
        0.0
    );
    assert!(slab_measure_estimate(5, 10, 0).is_err());
    assert!(slab_measure_estimate(20, 1_000_000, 1).unwrap().pass);
}

#[test]
fn three_points_in_eight_dimensions() {
    let d = 8;
    let p1 = coordinate_slab_mass(d, slab_width(d));
    let outside = (1.0 - p1).powi(d as i32);
    // all three outside the slab and in distinct cells among 2^8
    let oracle = outside.powi(3) * (255.0 / 256.0) * (254.0 / 256.0);
    let r = unique_cell_trials(d, 3, 20_000, 9).unwrap();
    let se = (oracle * (1.0 - oracle) / 20_000.0).sqrt();
    assert!(
        (r.success_rate - oracle).abs() <= 4.0 * se,
        "{} vs {oracle}",
        r.success_rate
    );
    assert!(matches!(unique_cell_fraction(d, 3, 10, 0), Err(LabError::Refusal(_))));
}

#[test]
fn single_point_is_unique_outside_slab() {
    let r = unique_cell_fraction(10, 1, 2000, 2).unwrap();
    assert!(r.fractions.iter().all(|f| *f == 0.0 || *f == 1.0));
    assert!(r.success_rate >= 0.9);
}

// The success rate itself is not monotone: ceil(3n/4) allows one miss at
// n = 4 but none at n = 2. The mean unique fraction is.
#[test]
fn unique_fraction_non_increasing_in_n() {
    let means: Vec<f64> = [1, 2, 4, 8, 10]
        .iter()
        .map(|&n| {
            let r = unique_cell_fraction(10, n, 4000, n as u64).unwrap();
            r.fractions.iter().sum::<f64>() / r.trials as f64
        })
        .collect();
    for w in means.windows(2) {
        assert!(w[1] <= w[0] + 0.005, "{means:?}");
    }
}

#[test]
fn dataset_csv_and_sidecar_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let spec = DistributionSpec::single(ComponentKind::Gaussian, 3);
    let ds = sample_dataset(&spec, &LabelModel::flip(1, 0.1).unwrap(), 25, 4).unwrap();
    ds.save(&path).unwrap();
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("x_0,x_1,x_2,y\n"));
    let side: DatasetSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
    assert_eq!((side.n, side.d, side.seed), (25, 3, 4));
    let back = Dataset::load(&path).unwrap();
    assert_eq!(back.x, ds.x);
    assert_eq!(back.y, ds.y);
}

proptest! {
    #[test]
    fn sign_pattern_ignores_positive_scale(
        x in prop::collection::vec(-1.0f64..1.0, 1..150),
        scale in 1e-3f64..1e3,
    ) {
        let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
        prop_assert_eq!(sign_pattern(&x), sign_pattern(&scaled));
    }

    #[test]
    fn unique_count_bounded_by_points(seed in 0u64..1000, n in 1usize..40) {
        let spec = DistributionSpec::single(ComponentKind::Sphere, 6);
        let ds = sample_dataset(&spec, &LabelModel::pure_noise(), n, seed).unwrap();
        prop_assert!(unique_cell_count(&ds.x, slab_width(6)) <= n);
    }
}
