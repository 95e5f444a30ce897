//! Cross-validation over the tuning parameter and over the models of an
//! elasso path, and calibration of the tuning parameter under sphericity.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ElassoError, Result};
use crate::grid::EtaGrid;
use crate::path::{candidate_solution, full_path, group_stats, model_path, ElassoPath};
use crate::penalties::{WeightSpec, WeightVector};
use crate::simulate::{sample_gaussian_stream, substream, SpikedModel};
use crate::spectra::{sample_covariance, DataMatrix};

/// Whether training folds get their own weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldWeights {
    /// Weights from the full data's `(q, n)`.
    Fixed,
    /// Weights from each training fold's `(q, n_train)`.
    #[default]
    Refit,
}

impl std::str::FromStr for FoldWeights {
    type Err = ElassoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(FoldWeights::Fixed),
            "refit" => Ok(FoldWeights::Refit),
            _ => Err(ElassoError::Config(format!(
                "unknown fold weights {s:?}; expected fixed or refit"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub grid: EtaGrid,
    pub fold_weights: FoldWeights,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            grid: EtaGrid::default_cv(),
            fold_weights: FoldWeights::Refit,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CvResult {
    pub grid: Vec<f64>,
    /// `fold_scores[k][i]`: score of fold `k` at `grid[i]`.
    pub fold_scores: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub eta_min: f64,
    pub eta_1se: f64,
}

impl CvResult {
    fn from_scores(grid: &[f64], fold_scores: Vec<Vec<f64>>) -> Self {
        let (mean, se) = mean_and_se(&fold_scores, grid.len());
        let imin = argmin(&mean);
        let mut result = Self {
            grid: grid.to_vec(),
            fold_scores,
            mean,
            se,
            eta_min: grid[imin],
            eta_1se: grid[imin],
        };
        result.eta_1se = one_se_eta(&result);
        result
    }

    pub fn min_index(&self) -> usize {
        argmin(&self.mean)
    }
}

fn mean_and_se(fold_scores: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<f64>) {
    let k = fold_scores.len() as f64;
    let mut mean = vec![0.0; width];
    let mut se = vec![0.0; width];
    for i in 0..width {
        let m = fold_scores.iter().map(|f| f[i]).sum::<f64>() / k;
        let var = if fold_scores.len() > 1 {
            fold_scores.iter().map(|f| (f[i] - m).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        mean[i] = m;
        se[i] = (var / k).sqrt();
    }
    (mean, se)
}

// first index of the smallest value; NaN never wins
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}

/// Largest grid value whose mean is within one standard error of the minimum.
pub fn one_se_eta(result: &CvResult) -> f64 {
    let imin = result.min_index();
    let bound = result.mean[imin] + result.se[imin];
    result
        .grid
        .iter()
        .zip(&result.mean)
        .filter(|(_, m)| **m <= bound)
        .map(|(g, _)| *g)
        .fold(result.grid[imin], f64::max)
}

/// Random balanced fold labels: a seeded shuffle dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(seed, 0));
    let mut labels = vec![0; n];
    for (position, &row) in order.iter().enumerate() {
        labels[row] = position % folds;
    }
    labels
}

// the training-fold quantities every score needs
struct FoldFit {
    eigenvalues: Vec<f64>,
    weights: WeightVector,
    n_test: usize,
    // squared test projections onto the training basis, summed over test rows
    z2: Vec<f64>,
}

impl FoldFit {
    fn new(train: &DataMatrix, test: &DMatrix<f64>, weights: WeightVector) -> Result<Self> {
        let spectrum = sample_covariance(train)?;
        let mean = spectrum.mean().expect("sample covariance records its mean");
        let centred = DMatrix::from_fn(test.nrows(), test.ncols(), |i, j| test[(i, j)] - mean[j]);
        let z = centred * spectrum.basis();
        let z2 = z.column_iter().map(|c| c.norm_squared()).collect();
        Ok(Self {
            eigenvalues: spectrum.eigenvalues().to_vec(),
            weights,
            n_test: test.nrows(),
            z2,
        })
    }

    fn score(&self, lambda: &[f64]) -> f64 {
        let log_det: f64 = lambda.iter().map(|l| l.ln()).sum();
        let quad: f64 = self.z2.iter().zip(lambda).map(|(z, l)| z / l).sum();
        self.n_test as f64 * log_det + quad
    }
}

/// `n_A log det Sigma_hat + sum_x (x - x_bar)^T Sigma_hat^{-1} (x - x_bar)`,
/// with `Sigma_hat` and `x_bar` from the training rows. An empty test set
/// scores zero.
pub fn cv_score(train: &DataMatrix, test: &DMatrix<f64>, eta: f64, weights: &WeightVector) -> Result<f64> {
    if test.ncols() != train.q() {
        return Err(ElassoError::ShapeMismatch(format!(
            "test rows have {} columns, training rows {}",
            test.ncols(),
            train.q()
        )));
    }
    let fit = FoldFit::new(train, test, weights.clone())?;
    let path = full_path(&fit.eigenvalues, &fit.weights)?;
    Ok(fit.score(&path.solve_at(eta)?))
}

fn check_folds(n: usize, q: usize, folds: usize) -> Result<()> {
    if folds < 2 || folds > n {
        return Err(ElassoError::Config(format!(
            "need 2 <= K <= n = {n}, got K = {folds}"
        )));
    }
    let n_train = n - n.div_ceil(folds);
    if n_train <= q {
        return Err(ElassoError::FoldTooSmall { n_train, q });
    }
    Ok(())
}

fn fold_fits(
    data: &DataMatrix,
    weights: &WeightSpec,
    labels: &[usize],
    folds: usize,
    fold_weights: FoldWeights,
) -> Result<Vec<FoldFit>> {
    let (n, q) = (data.n(), data.q());
    if labels.len() != n {
        return Err(ElassoError::LengthMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    if let Some(bad) = labels.iter().find(|&&l| l >= folds) {
        return Err(ElassoError::Config(format!("fold label {bad} out of range for K = {folds}")));
    }
    let fixed = match fold_weights {
        FoldWeights::Fixed => Some(weights.resolve(q, n)?),
        FoldWeights::Refit => None,
    };
    (0..folds)
        .into_par_iter()
        .map(|k| {
            let train_rows: Vec<usize> = (0..n).filter(|&i| labels[i] != k).collect();
            let test_rows: Vec<usize> = (0..n).filter(|&i| labels[i] == k).collect();
            if train_rows.len() <= q {
                return Err(ElassoError::FoldTooSmall {
                    n_train: train_rows.len(),
                    q,
                });
            }
            let train = data.select_rows(&train_rows);
            let test = data.values().select_rows(&test_rows);
            let w = match &fixed {
                Some(w) => w.clone(),
                None => weights.resolve(q, train_rows.len())?,
            };
            FoldFit::new(&train, &test, w)
        })
        .collect()
}

/// K-fold cross-validation of the elasso over `config.grid`.
pub fn kfold_cv(data: &DataMatrix, weights: &WeightSpec, config: &CvConfig) -> Result<CvResult> {
    check_folds(data.n(), data.q(), config.folds)?;
    let labels = fold_assignment(data.n(), config.folds, config.seed);
    kfold_cv_with_folds(data, weights, &config.grid, &labels, config.folds, config.fold_weights)
}

/// As [`kfold_cv`] with explicit fold labels in `0..folds`.
pub fn kfold_cv_with_folds(
    data: &DataMatrix,
    weights: &WeightSpec,
    grid: &EtaGrid,
    labels: &[usize],
    folds: usize,
    fold_weights: FoldWeights,
) -> Result<CvResult> {
    check_folds(data.n(), data.q(), folds)?;
    let fits = fold_fits(data, weights, labels, folds, fold_weights)?;
    let fold_scores = fits
        .par_iter()
        .map(|fit| {
            let path = full_path(&fit.eigenvalues, &fit.weights)?;
            score_path(fit, &path, grid.values())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult::from_scores(grid.values(), fold_scores))
}

fn score_path(fit: &FoldFit, path: &ElassoPath, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&eta| Ok(fit.score(&path.solve_at(eta)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelCvMode {
    /// Every model of the path, each over the whole grid, refitting the
    /// model's own path on every training fold.
    #[default]
    Exhaustive,
    /// Only models that form after the cross-validated minimum, only below
    /// it, using the grouped closed form on every training fold.
    Approximate,
}

impl std::str::FromStr for ModelCvMode {
    type Err = ElassoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(ModelCvMode::Exhaustive),
            "approximate" => Ok(ModelCvMode::Approximate),
            _ => Err(ElassoError::Config(format!(
                "unknown model-cv mode {s:?}; expected exhaustive or approximate"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelRecord {
    pub sizes: Vec<usize>,
    /// Knot at which the model appears on the full-data path.
    pub knot: f64,
    pub best_eta: f64,
    pub cv_mean: f64,
    pub se: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelCvResult {
    pub mode: ModelCvMode,
    /// Minimizer of the ordinary cross-validation curve (approximate mode only).
    pub eta_min: Option<f64>,
    pub models: Vec<ModelRecord>,
    /// Index into `models`.
    pub selected: usize,
}

impl ModelCvResult {
    pub fn selected_model(&self) -> &ModelRecord {
        &self.models[self.selected]
    }
}

/// Cross-validation over the models of the full-data elasso path.
pub fn model_cv(
    data: &DataMatrix,
    weights: &WeightSpec,
    config: &CvConfig,
    mode: ModelCvMode,
) -> Result<ModelCvResult> {
    let (n, q) = (data.n(), data.q());
    check_folds(n, q, config.folds)?;
    let spectrum = sample_covariance(data)?;
    let path = full_path(spectrum.eigenvalues(), &weights.resolve(q, n)?)?;
    let labels = fold_assignment(n, config.folds, config.seed);
    let fits = fold_fits(data, weights, &labels, config.folds, config.fold_weights)?;
    let grid = config.grid.values();

    let (eta_min, candidates, search): (Option<f64>, Vec<usize>, Vec<f64>) = match mode {
        ModelCvMode::Exhaustive => (None, (0..path.partitions().len()).collect(), grid.to_vec()),
        ModelCvMode::Approximate => {
            let scores = fits
                .par_iter()
                .map(|fit| score_path(fit, &full_path(&fit.eigenvalues, &fit.weights)?, grid))
                .collect::<Result<Vec<_>>>()?;
            let eta_min = CvResult::from_scores(grid, scores).eta_min;
            let mut candidates: Vec<usize> = (0..path.partitions().len())
                .filter(|&r| path.onset(r) > eta_min)
                .collect();
            if candidates.is_empty() {
                candidates.push(path.partition_index(eta_min));
            }
            let mut search: Vec<f64> = grid.iter().copied().filter(|&e| e < eta_min).collect();
            if search.is_empty() {
                search.push(grid[0]);
            }
            (Some(eta_min), candidates, search)
        }
    };

    let mut models = candidates
        .par_iter()
        .map(|&r| {
            let sizes = path.partitions()[r].sizes();
            let fold_scores = fits
                .iter()
                .map(|fit| match mode {
                    ModelCvMode::Exhaustive => {
                        score_path(fit, &model_path(&fit.eigenvalues, &fit.weights, sizes)?, &search)
                    }
                    ModelCvMode::Approximate => grouped_scores(fit, sizes, &search),
                })
                .collect::<Result<Vec<_>>>()?;
            let curve = CvResult::from_scores(&search, fold_scores);
            let i = curve.min_index();
            Ok(ModelRecord {
                sizes: sizes.to_vec(),
                knot: path.onset(r),
                best_eta: search[i],
                cv_mean: curve.mean[i],
                se: curve.se[i],
                selected: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let means: Vec<f64> = models.iter().map(|m| m.cv_mean).collect();
    let selected = argmin(&means);
    models[selected].selected = true;
    Ok(ModelCvResult {
        mode,
        eta_min,
        models,
        selected,
    })
}

// closed-form grouped estimate d~_k / (1 + eta a~_k) on the fold's eigenvalues
fn grouped_scores(fit: &FoldFit, sizes: &[usize], search: &[f64]) -> Result<Vec<f64>> {
    let partition = group_stats(&fit.eigenvalues, &fit.weights, sizes)?;
    Ok(search
        .iter()
        .map(|&eta| match candidate_solution(&partition, eta) {
            Ok(grouped) => fit.score(&partition.expand(&grouped)),
            Err(ElassoError::NonpositiveDenominator { .. }) => f64::INFINITY,
            Err(_) => f64::NAN,
        })
        .collect())
}

/// Largest finite knot of the path for `nsim` spherical normal samples.
pub fn sphericity_knots(q: usize, n: usize, weights: &WeightSpec, nsim: usize, seed: u64) -> Result<Vec<f64>> {
    if n <= q {
        return Err(ElassoError::DimensionExceedsSample { q, n });
    }
    if q < 2 {
        return Err(ElassoError::DimensionTooSmall { q, min: 2 });
    }
    let a = weights.resolve(q, n)?;
    let model = SpikedModel::sphere(q, 1.0)?;
    (0..nsim)
        .into_par_iter()
        .map(|r| {
            let data = sample_gaussian_stream(&model, n, seed, r as u64)?;
            let s = sample_covariance(&data)?;
            full_path(s.eigenvalues(), &a)?
                .largest_knot()
                .ok_or_else(|| ElassoError::InvalidWeights("weights never merge eigenvalues".into()))
        })
        .collect()
}

/// Empirical `(1 - epsilon)`-quantile of the largest knot under sphericity:
/// with this tuning value the spherical model is chosen with probability
/// about `1 - epsilon` when it holds.
pub fn calibrate_eta_sphericity(
    q: usize,
    n: usize,
    epsilon: f64,
    nsim: usize,
    seed: u64,
    weights: &WeightSpec,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ElassoError::InvalidProbability(epsilon));
    }
    if nsim < 100 {
        return Err(ElassoError::Config(format!("need at least 100 simulations, got {nsim}")));
    }
    let mut knots = sphericity_knots(q, n, weights, nsim, seed)?;
    knots.sort_by(f64::total_cmp);
    let rank = ((1.0 - epsilon) * nsim as f64).ceil() as usize;
    Ok(knots[rank.clamp(1, nsim) - 1])
}
