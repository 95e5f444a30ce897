//! Seeded Monte-Carlo checks of consistency and reproducibility.

use elasso::grid::EtaGrid;
use elasso::path::full_path;
use elasso::penalties::{mp_weights, WeightSpec};
use elasso::selection::{kfold_cv, sphericity_knots, CvConfig, FoldWeights};
use elasso::simulate::{sample_gaussian_stream, SpikedModel};
use elasso::spectra::sample_covariance;

fn frobenius_error(model: &SpikedModel, n: usize, seed: u64, stream: u64) -> f64 {
    let data = sample_gaussian_stream(model, n, seed, stream).unwrap();
    let config = CvConfig {
        folds: 10,
        seed: stream,
        grid: EtaGrid::default_cv(),
        fold_weights: FoldWeights::Refit,
    };
    let cv = kfold_cv(&data, &WeightSpec::MarchenkoPastur, &config).unwrap();
    let s = sample_covariance(&data).unwrap();
    let path = full_path(s.eigenvalues(), &mp_weights(model.q(), n).unwrap()).unwrap();
    let estimate = s.with_eigenvalues(path.solve_at(cv.eta_min).unwrap()).unwrap().reconstruct();
    let truth = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(model.eigenvalues()));
    (estimate - truth).norm()
}

#[test]
fn cross_validated_estimate_improves_with_sample_size() {
    let model = SpikedModel::new(vec![1, 1, 2], vec![4.0, 2.0, 1.0]).unwrap();
    let better = (0..20u64)
        .filter(|&r| frobenius_error(&model, 4000, 41, r) < frobenius_error(&model, 250, 42, r))
        .count();
    assert!(better >= 18, "{better}/20");
}

#[test]
fn path_contains_true_partition_for_large_samples() {
    let model = SpikedModel::new(vec![2, 2, 2], vec![4.0, 2.0, 1.0]).unwrap();
    let a = mp_weights(6, 5000).unwrap();
    assert!(a.strictly_decreasing());
    let hits = (0..50u64)
        .filter(|&r| {
            let data = sample_gaussian_stream(&model, 5000, 43, r).unwrap();
            let s = sample_covariance(&data).unwrap();
            full_path(s.eigenvalues(), &a).unwrap().find_partition(&[2, 2, 2]).is_some()
        })
        .count();
    assert!(hits >= 45, "{hits}/50");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

#[test]
fn largest_knot_shrinks_under_sphericity() {
    let spec = WeightSpec::MarchenkoPastur;
    let small = median(sphericity_knots(5, 100, &spec, 50, 44).unwrap());
    let large = median(sphericity_knots(5, 10_000, &spec, 50, 45).unwrap());
    assert!(large < small, "{large} !< {small}");
}

#[test]
fn cross_validation_independent_of_thread_count() {
    let model = SpikedModel::new(vec![2, 3], vec![3.0, 1.0]).unwrap();
    let data = sample_gaussian_stream(&model, 120, 46, 0).unwrap();
    let config = CvConfig {
        folds: 6,
        seed: 9,
        grid: EtaGrid::linear(0.0, 2.0, 15).unwrap(),
        fold_weights: FoldWeights::Refit,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| kfold_cv(&data, &WeightSpec::MarchenkoPastur, &config).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.fold_scores, four.fold_scores);
    assert_eq!(one.eta_min, four.eta_min);
}

#[test]
fn fixed_and_refit_fold_weights_agree_for_dimension_free_weights() {
    let model = SpikedModel::new(vec![2, 3], vec![3.0, 1.0]).unwrap();
    let data = sample_gaussian_stream(&model, 80, 47, 0).unwrap();
    let mut config = CvConfig {
        folds: 4,
        seed: 1,
        grid: EtaGrid::linear(0.0, 1.0, 5).unwrap(),
        fold_weights: FoldWeights::Fixed,
    };
    let fixed = kfold_cv(&data, &WeightSpec::Pairwise, &config).unwrap();
    config.fold_weights = FoldWeights::Refit;
    let refit = kfold_cv(&data, &WeightSpec::Pairwise, &config).unwrap();
    assert_eq!(fixed.mean, refit.mean);
    let mp_fixed = {
        config.fold_weights = FoldWeights::Fixed;
        kfold_cv(&data, &WeightSpec::MarchenkoPastur, &config).unwrap()
    };
    config.fold_weights = FoldWeights::Refit;
    let mp_refit = kfold_cv(&data, &WeightSpec::MarchenkoPastur, &config).unwrap();
    assert_ne!(mp_fixed.mean, mp_refit.mean);
}
