#![allow(dead_code)]

use elasso::penalties::WeightVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Strictly decreasing eigenvalues spread over roughly (0.05, 20).
pub fn random_eigenvalues(rng: &mut ChaCha8Rng, q: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..q).map(|_| (rng.gen_range(-3.0..3.0f64)).exp()).collect();
    d.sort_by(|a, b| b.total_cmp(a));
    for j in 1..q {
        if d[j] >= d[j - 1] {
            d[j] = d[j - 1] * 0.999;
        }
    }
    d
}

/// Strictly decreasing weights summing to zero.
pub fn random_weights(rng: &mut ChaCha8Rng, q: usize) -> WeightVector {
    let mut a: Vec<f64> = (0..q).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let mean = a.iter().sum::<f64>() / q as f64;
    WeightVector::recentered(a.iter().map(|x| x - mean).collect()).expect("valid weights")
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

pub fn max_rel_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
