use approx::assert_relative_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use robustness_law_lab::interp::*;
use robustness_law_lab::isodist::*;
use robustness_law_lab::lipcert::*;
use robustness_law_lab::netzoo::*;
use robustness_law_lab::runner::{rows_to_csv, slope_fit, tradeoff_experiment, ExperimentConfig, Sweep};
use robustness_law_lab::{seed, LabError};

fn toy(points: Vec<Vec<f64>>, labels: Vec<f64>) -> Dataset {
    let spec = DistributionSpec::single(ComponentKind::Sphere, points[0].len());
    let mut ds = sample_dataset(&spec, &LabelModel::pure_noise(), points.len(), 0).unwrap();
    ds.x = points;
    ds.y = labels;
    ds
}

#[test]
fn operator_norm_matches_gram_eigen_oracle() {
    for s in 0..10 {
        let mut rng = seed::rng(s);
        let m = DMatrix::<f64>::from_fn(8, 5, |_, _| rng.random_range(-1.0..1.0));
        let gram = m.transpose() * &m;
        let oracle = SymmetricEigen::new(gram).eigenvalues.max().sqrt();
        let r = operator_norm(&m).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value, oracle, max_relative = 1e-6);
    }
    let diag = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
    assert_relative_eq!(operator_norm(&diag).unwrap().value, 3.0, max_relative = 1e-9);
    assert_eq!(operator_norm(&DMatrix::zeros(4, 3)).unwrap().value, 0.0);
}

#[test]
fn empirical_lower_on_linear_and_constant() {
    let u = [1.0, -2.0, 2.0];
    let linear = |x: &[f64]| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let cfg = EmpiricalLipConfig::default();
    let est = empirical_lip_lower(&linear, 3, box_sampler(3, 1.0), &cfg, 1).unwrap();
    assert!(est.value >= 2.99 && est.value <= 3.0 + 1e-6, "{}", est.value);
    let flat = empirical_lip_lower(&|_: &[f64]| 0.7, 3, box_sampler(3, 1.0), &cfg, 1).unwrap();
    assert_eq!(flat.value, 0.0);
}

#[test]
fn empirical_lower_scales_with_function() {
    let f = |x: &[f64]| (3.0 * x[0]).sin() * x[1] + x[2] * x[2];
    let cfg = EmpiricalLipConfig::default();
    let base = empirical_lip_lower(&f, 3, box_sampler(3, 1.0), &cfg, 5).unwrap().value;
    for alpha in [-2.5, 0.5, 7.0] {
        let g = |x: &[f64]| alpha * f(x);
        let scaled = empirical_lip_lower(&g, 3, box_sampler(3, 1.0), &cfg, 5).unwrap().value;
        assert_relative_eq!(scaled, alpha.abs() * base, max_relative = 1e-6);
    }
}

#[test]
fn bump_examples() {
    let one = toy(vec![vec![0.0, 0.0]], vec![1.0]);
    let f = build_bump_interpolator(&one, RadiusPolicy::Fixed { r: 1.0 }).unwrap();
    assert_eq!(f.evaluate(&[0.0, 0.0]).unwrap(), 1.0);
    assert_eq!(f.evaluate(&[1.0, 0.0]).unwrap(), 0.0);
    assert_eq!(f.evaluate(&[3.0, 3.0]).unwrap(), 0.0);
    assert_relative_eq!(f.analytic_lip(), 1.5, max_relative = 1e-12);

    let two = toy(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![1.0, -1.0]);
    let f = build_bump_interpolator(&two, RadiusPolicy::HalfMinSep).unwrap();
    assert_eq!(f.radius, 1.0);
    assert_eq!(f.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
    assert_eq!(f.evaluate(&[-1.0, 0.0]).unwrap(), 1.0);

    let tight = build_bump_interpolator(&two, RadiusPolicy::Fixed { r: 0.5 }).unwrap();
    assert_relative_eq!(tight.analytic_lip(), 3.0, max_relative = 1e-12);
    assert_eq!(tight.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn bump_lipschitz_sandwich() {
    let spec = DistributionSpec::single(ComponentKind::Sphere, 12);
    for s in 0..5 {
        let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 30, s).unwrap();
        let f = build_bump_interpolator(&ds, RadiusPolicy::HalfMinSep).unwrap();
        let est = certify_interpolator(&f, &EmpiricalLipConfig::default(), s).unwrap();
        assert!(est.empirical_lower > 0.0);
        assert!(est.sandwich_holds());
        // gradient probes find most of the exact constant
        assert!(est.empirical_lower >= 0.9 * f.analytic_lip());
    }
}

#[test]
fn projected_separation_and_refusals() {
    let spec = DistributionSpec::single(ComponentKind::Sphere, 256);
    let good = (0..100u64)
        .filter(|&s| {
            let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 100, s).unwrap();
            let f = build_projected_with_dim(&ds, 64, s, RadiusPolicy::HalfMinSep).unwrap();
            min_pairwise_distance(&f.centers).unwrap() >= 0.25
        })
        .count();
    assert!(good >= 95, "{good}/100");

    let ds = sample_dataset(&spec, &LabelModel::pure_noise(), 100, 0).unwrap();
    assert!(matches!(
        build_projected_with_dim(&ds, 2, 0, RadiusPolicy::HalfMinSep),
        Err(LabError::Refusal(_))
    ));
    let f = build_projected_interpolator(&ds, 5000, 3, RadiusPolicy::HalfMinSep).unwrap();
    assert!(f.param_count() <= 5000);
    assert_eq!(f.param_count(), 100 * (f.inner_dim() + 1));
    assert!(f.projection_orthonormality_error() <= 1e-10);
    for (x, y) in ds.x.iter().zip(&ds.y) {
        assert!((f.evaluate(x).unwrap() - y).abs() <= 1e-12);
    }
    let full = build_projected_with_dim(&ds, 256, 3, RadiusPolicy::HalfMinSep).unwrap();
    assert_eq!(full, build_bump_interpolator(&ds, RadiusPolicy::HalfMinSep).unwrap());
}

#[test]
fn spectral_product_examples() {
    let arch = Architecture::feedforward(1, &[1], Activation::Relu, false, 5.0, 1.0).unwrap();
    let net = materialize(&arch, &[2.0, 0.5]).unwrap();
    assert_relative_eq!(spectral_product_bound(&net), 2.0, max_relative = 1e-9);
    let zero = materialize(&arch, &[0.0, 0.0]).unwrap();
    assert_eq!(spectral_product_bound(&zero), 1.0);
}

#[test]
fn spectral_product_scales_with_a_layer() {
    let arch = Architecture::feedforward(4, &[6, 5], Activation::Tanh, false, 1.0, 1.0).unwrap();
    let mut rng = seed::rng(3);
    // first layer scaled up so its norm stays above 1 both times
    let mut w: Vec<f64> = (0..arch.p()).map(|_| rng.random_range(-1.0..1.0)).collect();
    w[..24].iter_mut().for_each(|v| *v *= 4.0);
    let base = spectral_product_bound(&materialize(&arch, &w).unwrap());
    w[..24].iter_mut().for_each(|v| *v *= 3.0);
    let scaled = spectral_product_bound(&materialize(&arch, &w).unwrap());
    assert_relative_eq!(scaled, 3.0 * base, max_relative = 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn network_sandwich_holds(s in 0u64..10_000) {
        let mut rng = seed::rng(s);
        let arch = random_architecture(&mut rng, RandomArchOptions::default(), 1.0, 1.0).unwrap();
        let w: Vec<f64> = (0..arch.p()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let net = materialize(&arch, &w).unwrap();
        let est = certify_network(&net, 1.0, &EmpiricalLipConfig::default(), s).unwrap();
        prop_assert!(est.sandwich_holds(), "{:?}", est);
    }

    #[test]
    fn backprop_input_gradient_matches_differences(s in 0u64..10_000) {
        let mut rng = seed::rng(s);
        let arch = random_architecture(&mut rng, RandomArchOptions::default(), 1.0, 1.0).unwrap();
        let w: Vec<f64> = (0..arch.p()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let net = materialize(&arch, &w).unwrap();
        let x: Vec<f64> = (0..arch.input_dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let g = net.input_gradient(&x).unwrap();
        let fd = fd_gradient(&|z: &[f64]| net.forward(z).unwrap(), &x, 1e-5);
        let diff: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
        prop_assert!(diff / scale <= 1e-4 || diff <= 1e-9, "{diff} / {scale}");
    }
}

fn sweep_config(d_tilde: Vec<usize>, n: usize, seeds: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        spec: DistributionSpec::single(ComponentKind::Sphere, 256),
        label_model: LabelModel::pure_noise(),
        n,
        sweep: Sweep::ProjectedDims {
            d_tilde,
            radius: RadiusPolicy::SeparationScaled { kappa: 0.3 },
        },
        seeds,
        base_seed: 0,
        eps: 0.1,
        delta: 0.1,
        c1: 1e4,
        c2: 1e4,
        lip: EmpiricalLipConfig::default(),
    }
}

#[test]
fn analytic_lip_slope_over_wide_dimension_range() {
    // n = 7 keeps d_tilde = 8 above the ceil(4 ln n) floor
    let cfg = sweep_config(vec![8, 16, 32, 64, 128, 256], 7, vec![0, 1, 2]);
    let result = tradeoff_experiment(&cfg).unwrap();
    assert!(result.rows.iter().all(|r| r.ok()));
    let fit = slope_fit(&result.rows).unwrap();
    assert!((-0.65..=-0.35).contains(&fit.slope), "{fit:?}");
}

#[test]
fn tradeoff_csv_identical_across_thread_counts() {
    let cfg = sweep_config(vec![32, 64], 40, vec![0, 1, 2, 3]);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| rows_to_csv(&tradeoff_experiment(&cfg).unwrap().rows))
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}

#[test]
fn monte_carlo_reports_identical_across_thread_counts() {
    let comp = Component::new(ComponentKind::Cube, 30);
    let fs = [|x: &[f64]| x[0] + x[1], |x: &[f64]| x[2].abs()];
    let grid = [0.05, 0.1, 0.2];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let tails = isoperimetry_tail_check_batch(&comp, &fs, 2.0, &grid, 20_000, 8).unwrap();
            let slab = robustness_law_lab::appendixlab::slab_measure_estimate(9, 100_000, 8).unwrap();
            serde_json::to_string(&(tails, slab)).unwrap()
        })
    };
    assert_eq!(run(1), run(5));
}
