mod common;

use common::{max_abs_diff, max_rel_diff};
use elasso::dual::{constrained_solve_on, kappa_of_eta};
use elasso::forecast::{conditional_predict, PredictionSplit};
use elasso::path::{candidate_solution, full_path, group_stats, ElassoPath, Partition};
use elasso::penalties::{
    eccentricity_penalty, elasso_penalty, kl_penalty, mp_weights, Penalty, ElassoPenalty, WeightVector,
};
use elasso::simulate::random_orthogonal;
use elasso::spectra::{neg_log_lik, spectral_decompose, Spectrum};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn eigenvalues(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, q).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        let mut d: Vec<f64> = v.iter().map(|x| x.exp()).collect();
        for j in 1..d.len() {
            if d[j] >= d[j - 1] {
                d[j] = d[j - 1] * 0.999;
            }
        }
        d
    })
}

fn weights(q: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(-2.0f64..2.0, q).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        WeightVector::recentered(v.iter().map(|x| x - mean).collect()).unwrap()
    })
}

fn instance() -> impl Strategy<Value = (Vec<f64>, WeightVector)> {
    (2usize..10).prop_flat_map(|q| (eigenvalues(q), weights(q)))
}

fn last(path: &ElassoPath) -> f64 {
    path.largest_knot().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solution_is_ordered_and_positive((d, a) in instance(), t in 0.0f64..2.0) {
        let path = full_path(&d, &a).unwrap();
        let lambda = path.solve_at(t * last(&path)).unwrap();
        prop_assert!(lambda.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(lambda.iter().all(|l| *l > 0.0));
    }

    #[test]
    fn sphere_beyond_last_knot((d, a) in instance(), t in 1.0f64..10.0) {
        let path = full_path(&d, &a).unwrap();
        let lambda = path.solve_at(t * last(&path)).unwrap();
        let dbar = d.iter().sum::<f64>() / d.len() as f64;
        let expected = vec![dbar; d.len()];
        prop_assert!(max_rel_diff(&lambda, &expected) < 1e-12);
    }

    #[test]
    fn scale_equivariance((d, a) in instance(), t in 0.0f64..1.5, gamma in 0.01f64..100.0) {
        let path = full_path(&d, &a).unwrap();
        let scaled: Vec<f64> = d.iter().map(|x| gamma * x).collect();
        let other = full_path(&scaled, &a).unwrap();
        let eta = t * last(&path);
        let expected: Vec<f64> = path.solve_at(eta).unwrap().iter().map(|l| gamma * l).collect();
        prop_assert!(max_rel_diff(&other.solve_at(eta).unwrap(), &expected) < 1e-10);
        for (k1, k2) in path.knots().iter().zip(other.knots()) {
            prop_assert!((k1 - k2).abs() <= 1e-9 * k1.abs().max(1.0));
        }
    }

    #[test]
    fn continuity_at_knots((d, a) in instance()) {
        // both one-sided limits, evaluated exactly at the knot
        let path = full_path(&d, &a).unwrap();
        for (i, &k) in path.knots().iter().enumerate().filter(|(_, k)| k.is_finite()) {
            let side = |p: &Partition| p.expand(&candidate_solution(p, k).unwrap());
            let left = side(&path.partitions()[i]);
            let right = side(&path.partitions()[i + 1]);
            prop_assert!(max_rel_diff(&left, &right) <= 1e-9, "jump at {}: {:?} vs {:?}", k, left, right);
            prop_assert!(max_rel_diff(&path.solve_at(k).unwrap(), &right) <= 1e-12);
        }
    }

    #[test]
    fn kappa_nonincreasing((d, a) in instance()) {
        let path = full_path(&d, &a).unwrap();
        let top = 1.2 * last(&path);
        let kappas: Vec<f64> = (0..=30).map(|i| kappa_of_eta(&path, top * i as f64 / 30.0).unwrap()).collect();
        for w in kappas.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn penalty_nonnegative_and_scale_invariant((d, a) in instance(), gamma in 0.01f64..100.0) {
        let p = elasso_penalty(&d, &a).unwrap();
        prop_assert!(p >= -1e-12);
        let scaled: Vec<f64> = d.iter().map(|x| gamma * x).collect();
        prop_assert!((elasso_penalty(&scaled, &a).unwrap() - p).abs() <= 1e-10 * p.abs().max(1.0));
    }

    #[test]
    fn penalties_are_orthogonally_invariant(d in eigenvalues(5), seed in 0u64..1000) {
        let q = d.len();
        let rot = random_orthogonal(q, seed);
        let s = Spectrum::diagonal(d.clone()).unwrap().reconstruct();
        let rotated = spectral_decompose(&(&rot * &s * rot.transpose())).unwrap();
        let a = mp_weights(q, 50).unwrap();
        let pen = ElassoPenalty::new(a);
        prop_assert!((pen.value(rotated.eigenvalues()).unwrap() - pen.value(&d).unwrap()).abs() < 1e-8);
        prop_assert!((kl_penalty(rotated.eigenvalues()).unwrap() - kl_penalty(&d).unwrap()).abs() < 1e-8);
        prop_assert!(
            (eccentricity_penalty(rotated.eigenvalues()).unwrap() - eccentricity_penalty(&d).unwrap()).abs() < 1e-8
        );
    }

    #[test]
    fn likelihood_minimized_at_sample_covariance(d in eigenvalues(4), e in eigenvalues(4), seed in 0u64..1000) {
        let s = Spectrum::diagonal(d).unwrap();
        let rot = random_orthogonal(4, seed);
        let sigma = spectral_decompose(&(&rot * Spectrum::diagonal(e).unwrap().reconstruct() * rot.transpose())).unwrap();
        prop_assert!(neg_log_lik(&sigma, &s) - neg_log_lik(&s, &s) >= -1e-10);
    }

    #[test]
    fn prediction_is_affine(d in eigenvalues(4), seed in 0u64..1000, alpha in -2.0f64..2.0,
                            u in prop::collection::vec(-5.0f64..5.0, 2), v in prop::collection::vec(-5.0f64..5.0, 2)) {
        let rot = random_orthogonal(4, seed);
        let sigma = spectral_decompose(&(&rot * Spectrum::diagonal(d).unwrap().reconstruct() * rot.transpose())).unwrap();
        let split = PredictionSplit::new(&sigma, vec![0.5, -1.0, 2.0, 0.0], 2).unwrap();
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        let pu = conditional_predict(&split, &u).unwrap();
        let pv = conditional_predict(&split, &v).unwrap();
        let expected: Vec<f64> = pu.iter().zip(&pv).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        prop_assert!(max_abs_diff(&conditional_predict(&split, &mix).unwrap(), &expected) < 1e-10);
    }
}

// feasible candidates: every ordered grouping, scaled to meet the bound
#[test]
fn constrained_estimate_beats_feasible_alternatives() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let q = rng.gen_range(2..=5);
        let d = common::random_eigenvalues(&mut rng, q);
        let a = common::random_weights(&mut rng, q);
        let path = full_path(&d, &a).unwrap();
        let kappa = kappa_of_eta(&path, rng.gen_range(0.0..last(&path))).unwrap();
        let sol = constrained_solve_on(&path, kappa).unwrap();
        let nll = |l: &[f64]| l.iter().zip(&d).map(|(l, d)| d / l + l.ln()).sum::<f64>();
        let best = nll(&sol.estimate);
        let mut checked = 0;
        while checked < 1000 {
            // random positive nonincreasing candidate
            let mut cand: Vec<f64> = (0..q).map(|_| rng.gen_range(-2.0f64..3.0).exp()).collect();
            cand.sort_by(|x, y| y.total_cmp(x));
            if elasso_penalty(&cand, &a).unwrap() > kappa {
                continue;
            }
            checked += 1;
            assert!(best <= nll(&cand) + 1e-10, "candidate {cand:?} beats {:?}", sol.estimate);
        }
    }
}

#[test]
fn group_statistics_of_full_grouping() {
    let a = WeightVector::new(vec![1.0, 0.0, -1.0]).unwrap();
    let p = group_stats(&[6.0, 3.0, 1.0], &a, &[3]).unwrap();
    assert_eq!(p.means(), &[10.0 / 3.0]);
    assert_eq!(p.weight_means(), &[0.0]);
}

#[test]
fn mp_weights_vanish_with_sample_size() {
    let a = mp_weights(5, 1_000_000).unwrap();
    assert!(a.as_slice().iter().all(|x| x.abs() < 0.02), "{:?}", a.as_slice());
}

#[test]
fn reconstruction_error_small() {
    for seed in 0..20 {
        let rot = random_orthogonal(6, seed);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![9.0, 5.0, 4.0, 2.0, 1.0, 0.5]));
        let s = &rot * d * rot.transpose();
        let spec = spectral_decompose(&s).unwrap();
        assert!((spec.reconstruct() - &s).norm() / s.norm() <= 1e-8);
    }
}
