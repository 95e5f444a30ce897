//! Seeded Gaussian sampling from multi-spiked covariance models and the
//! Monte-Carlo experiments built on it.
//!
//! Every replicate draws from its own ChaCha stream (`seed`, replicate index),
//! so results do not depend on how replicates are scheduled across threads.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ElassoError, Result};
use crate::path::full_path;
use crate::penalties::{MarchenkoPastur, WeightSpec};
use crate::spectra::{sample_covariance, DataMatrix};

/// Independent random stream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Diagonal covariance with groups of equal eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikedModel {
    sizes: Vec<usize>,
    values: Vec<f64>,
}

impl SpikedModel {
    pub fn new(sizes: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() != values.len() {
            return Err(ElassoError::BadGrouping(format!(
                "{} group sizes but {} group values",
                sizes.len(),
                values.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(ElassoError::BadGrouping("group sizes must be positive".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(ElassoError::NonpositiveEigenvalue(*bad));
        }
        if values.windows(2).any(|w| w[0] <= w[1]) {
            return Err(ElassoError::BadGrouping(
                "group values must be strictly decreasing".into(),
            ));
        }
        Ok(Self { sizes, values })
    }

    /// `sigma2 I_q`.
    pub fn sphere(q: usize, sigma2: f64) -> Result<Self> {
        Self::new(vec![q], vec![sigma2])
    }

    /// Distinct spikes above `q - spikes.len()` noise eigenvalues `sigma2`.
    pub fn spiked(q: usize, spikes: &[f64], sigma2: f64) -> Result<Self> {
        if spikes.len() >= q {
            return Err(ElassoError::BadGrouping(format!(
                "{} spikes leave no noise eigenvalues in dimension {q}",
                spikes.len()
            )));
        }
        let mut sizes = vec![1; spikes.len()];
        sizes.push(q - spikes.len());
        let mut values = spikes.to_vec();
        values.push(sigma2);
        Self::new(sizes, values)
    }

    pub fn q(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Noise level: the value of the last group.
    pub fn sigma2(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.sizes
            .iter()
            .zip(&self.values)
            .flat_map(|(&m, &v)| std::iter::repeat_n(v, m))
            .collect()
    }
}

fn standard_normal_matrix(n: usize, q: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // fill row by row so the stream order is fixed
    let mut z = DMatrix::zeros(n, q);
    for i in 0..n {
        for j in 0..q {
            z[(i, j)] = StandardNormal.sample(rng);
        }
    }
    z
}

/// `n` draws from `N_q(0, Sigma_o)` with `Sigma_o` diagonal.
pub fn sample_gaussian(model: &SpikedModel, n: usize, seed: u64) -> Result<DataMatrix> {
    sample_gaussian_stream(model, n, seed, 0)
}

/// As [`sample_gaussian`], drawing from substream `stream`.
pub fn sample_gaussian_stream(model: &SpikedModel, n: usize, seed: u64, stream: u64) -> Result<DataMatrix> {
    let mut rng = substream(seed, stream);
    let scale: Vec<f64> = model.eigenvalues().iter().map(|v| v.sqrt()).collect();
    let mut z = standard_normal_matrix(n, model.q(), &mut rng);
    for mut row in z.row_iter_mut() {
        for (x, s) in row.iter_mut().zip(&scale) {
            *x *= s;
        }
    }
    DataMatrix::new(z)
}

/// Draws from `N_q(0, P Sigma_o P^T)` for an orthogonal `basis`.
pub fn sample_gaussian_rotated(
    model: &SpikedModel,
    basis: &DMatrix<f64>,
    n: usize,
    seed: u64,
) -> Result<DataMatrix> {
    if basis.nrows() != model.q() || basis.ncols() != model.q() {
        return Err(ElassoError::ShapeMismatch(format!(
            "basis is {}x{}, model has q = {}",
            basis.nrows(),
            basis.ncols(),
            model.q()
        )));
    }
    let x = sample_gaussian(model, n, seed)?;
    DataMatrix::new(x.values() * basis.transpose())
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of R's diagonal fixed).
pub fn random_orthogonal(q: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = substream(seed, u64::MAX);
    let z = standard_normal_matrix(q, q, &mut rng);
    let qr = z.qr();
    let mut qm = qr.q();
    let r = qr.r();
    for j in 0..q {
        if r[(j, j)] < 0.0 {
            let mut col = qm.column_mut(j);
            col.neg_mut();
        }
    }
    qm
}

/// Where a population eigenvalue's sample counterpart settles as `q / n -> nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpikeLimit {
    /// Separated spike: `lambda (1 + sigma2 nu / (lambda - sigma2))`.
    Spike(f64),
    /// Absorbed into the bulk: `sigma2 (1 + sqrt(nu))^2`.
    BulkEdge(f64),
}

pub fn spike_limit(lambda: f64, sigma2: f64, nu: f64) -> SpikeLimit {
    if lambda > sigma2 * (1.0 + nu.sqrt()) {
        SpikeLimit::Spike(lambda * (1.0 + sigma2 * nu / (lambda - sigma2)))
    } else {
        SpikeLimit::BulkEdge(sigma2 * (1.0 + nu.sqrt()).powi(2))
    }
}

/// Limiting sample eigenvalue of a separated spike.
pub fn spiked_limit(lambda: f64, sigma2: f64, nu: f64) -> Result<f64> {
    match spike_limit(lambda, sigma2, nu) {
        SpikeLimit::Spike(v) => Ok(v),
        SpikeLimit::BulkEdge(_) => Err(ElassoError::BelowPhaseTransition {
            lambda,
            threshold: sigma2 * (1.0 + nu.sqrt()),
        }),
    }
}

/// Conjectured limit of the knot where spike `lambda` leaves the noise
/// group under Marčenko-Pastur weights.
pub fn knot_limit(lambda: f64, sigma2: f64, nu: f64) -> Result<f64> {
    let star = spiked_limit(lambda, sigma2, nu)?;
    Ok((star / sigma2 - 1.0) / ((1.0 + nu.sqrt()).powi(2) - 1.0))
}

/// Free parameters of a covariance whose eigenvalues fall in the given groups:
/// `q(q+1)/2 - m(m-1)/2 - (q-g)` with `m` the largest group size.
pub fn param_count(q: usize, sizes: &[usize]) -> Result<usize> {
    if sizes.is_empty() || sizes.contains(&0) || sizes.iter().sum::<usize>() != q {
        return Err(ElassoError::BadGrouping(format!(
            "sizes {sizes:?} do not partition q = {q}"
        )));
    }
    let g = sizes.len();
    let m = *sizes.iter().max().expect("non-empty");
    Ok(q * (q + 1) / 2 - m * (m - 1) / 2 - (q - g))
}

#[derive(Debug, Clone, Serialize)]
pub struct KnotSummary {
    pub model: SpikedModel,
    pub n: usize,
    pub weights: String,
    pub replicates: usize,
    pub seed: u64,
    /// Largest finite knots of each replicate, in decreasing order.
    pub top_knots: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

/// Largest `top` knots of the elasso path over seeded replicates.
pub fn knot_experiment(
    model: &SpikedModel,
    n: usize,
    weights: &WeightSpec,
    replicates: usize,
    seed: u64,
    top: usize,
) -> Result<KnotSummary> {
    let q = model.q();
    if n <= q {
        return Err(ElassoError::DimensionExceedsSample { q, n });
    }
    let a = weights.resolve(q, n)?;
    let top_knots = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let data = sample_gaussian_stream(model, n, seed, r as u64)?;
            let spectrum = sample_covariance(&data)?;
            let path = full_path(spectrum.eigenvalues(), &a)?;
            let mut knots: Vec<f64> = path
                .knots()
                .iter()
                .rev()
                .copied()
                .filter(|k| k.is_finite())
                .take(top)
                .collect();
            knots.sort_by(|x, y| y.total_cmp(x));
            Ok(knots)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, sd) = column_stats(&top_knots, top);
    Ok(KnotSummary {
        model: model.clone(),
        n,
        weights: weights.to_string(),
        replicates,
        seed,
        top_knots,
        mean,
        sd,
    })
}

fn column_stats(rows: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<f64>) {
    let mut mean = Vec::with_capacity(width);
    let mut sd = Vec::with_capacity(width);
    for j in 0..width {
        let col: Vec<f64> = rows.iter().filter_map(|r| r.get(j).copied()).collect();
        let n = col.len() as f64;
        let m = col.iter().sum::<f64>() / n;
        let v = if col.len() > 1 {
            col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean.push(m);
        sd.push(v.sqrt());
    }
    (mean, sd)
}

#[derive(Debug, Clone, Serialize)]
pub struct MseSummary {
    pub q: usize,
    pub n: usize,
    pub sigma2: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Monte-Carlo mean of `||S_n - sigma2 I||_F^2`.
    pub mse_sample: f64,
    /// Monte-Carlo mean of `||d_bar I - sigma2 I||_F^2`.
    pub mse_sphere: f64,
    pub ratio: f64,
    /// `q (q + 1) / 2`.
    pub target_ratio: f64,
}

/// Frobenius errors of `S_n` and of the fully pooled `d_bar I` under sphericity.
pub fn mse_experiment(q: usize, n: usize, sigma2: f64, replicates: usize, seed: u64) -> Result<MseSummary> {
    if n <= q {
        return Err(ElassoError::DimensionExceedsSample { q, n });
    }
    if replicates == 0 {
        return Err(ElassoError::Config("need at least one replicate".into()));
    }
    let model = SpikedModel::sphere(q, sigma2)?;
    let errors = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let data = sample_gaussian_stream(&model, n, seed, r as u64)?;
            let s = sample_covariance(&data)?;
            let full: f64 = s.eigenvalues().iter().map(|d| (d - sigma2).powi(2)).sum();
            let dbar = s.trace() / q as f64;
            Ok((full, q as f64 * (dbar - sigma2).powi(2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut sum_full, mut sum_sphere) = (0.0, 0.0);
    for (f, s) in &errors {
        sum_full += f;
        sum_sphere += s;
    }
    let mse_sample = sum_full / replicates as f64;
    let mse_sphere = sum_sphere / replicates as f64;
    Ok(MseSummary {
        q,
        n,
        sigma2,
        replicates,
        seed,
        mse_sample,
        mse_sphere,
        ratio: mse_sample / mse_sphere,
        target_ratio: (q * (q + 1)) as f64 / 2.0,
    })
}

/// Kolmogorov distance between the empirical distribution of `values` and `cdf`.
pub fn kolmogorov_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumLawSummary {
    pub q: usize,
    pub n: usize,
    pub seed: u64,
    pub nu: f64,
    pub kolmogorov_distance: f64,
    pub eigenvalues: Vec<f64>,
}

/// Distance between the sample spectrum of a white sample and the
/// Marčenko-Pastur law with `nu = q / n`.
pub fn spectrum_law_experiment(q: usize, n: usize, seed: u64) -> Result<SpectrumLawSummary> {
    if n <= q {
        return Err(ElassoError::DimensionExceedsSample { q, n });
    }
    let nu = q as f64 / n as f64;
    let law = MarchenkoPastur::new(nu)?;
    let data = sample_gaussian(&SpikedModel::sphere(q, 1.0)?, n, seed)?;
    let s = sample_covariance(&data)?;
    Ok(SpectrumLawSummary {
        q,
        n,
        seed,
        nu,
        kolmogorov_distance: kolmogorov_distance(s.eigenvalues(), |x| law.cdf(x)),
        eigenvalues: s.eigenvalues().to_vec(),
    })
}
