//! Penalty weights and penalty values.
//!
//! The elasso penalty is `sum_j a_j log(lambda_j)` with nonincreasing,
//! sum-zero weights `a`. It is scale invariant and vanishes exactly when
//! all eigenvalues are equal.

mod mp;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

pub use mp::MarchenkoPastur;

use crate::error::{ElassoError, Result};
use crate::spectra::Spectrum;

/// Sum-zero tolerance for weight vectors.
pub const SUM_TOL: f64 = 1e-10;
/// User-supplied weights whose sum is within this bound are re-centred.
pub const RECENTER_TOL: f64 = 1e-6;

/// Nonincreasing weights summing to zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    a: Vec<f64>,
    strictly_decreasing: bool,
}

impl WeightVector {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(ElassoError::InvalidWeights("empty weight vector".into()));
        }
        if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
            return Err(ElassoError::InvalidWeights(format!("non-finite weight {bad}")));
        }
        if let Some(j) = a.windows(2).position(|w| w[0] < w[1]) {
            return Err(ElassoError::InvalidWeights(format!(
                "weights must be nonincreasing (a[{}] = {} < a[{}] = {})",
                j + 1,
                a[j],
                j + 2,
                a[j + 1]
            )));
        }
        let sum: f64 = a.iter().sum();
        if sum.abs() > SUM_TOL {
            return Err(ElassoError::InvalidWeights(format!(
                "weights must sum to zero (sum = {sum:e})"
            )));
        }
        let strictly_decreasing = a.windows(2).all(|w| w[0] > w[1]);
        Ok(Self {
            a,
            strictly_decreasing,
        })
    }

    /// Accepts weights whose sum is within [`RECENTER_TOL`] of zero and
    /// subtracts the mean. Unsorted input is rejected, never sorted.
    pub fn recentered(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(ElassoError::InvalidWeights("empty weight vector".into()));
        }
        let sum: f64 = a.iter().sum();
        if sum.abs() > RECENTER_TOL {
            return Err(ElassoError::InvalidWeights(format!(
                "weights sum to {sum:e}; expected zero"
            )));
        }
        let mean = sum / a.len() as f64;
        Self::new(a.into_iter().map(|v| v - mean).collect())
    }

    /// Reads one weight per line; blank lines are skipped.
    pub fn from_file(path: &Path, q: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ElassoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut a = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| {
                ElassoError::Parse(format!("{}:{}: not a number: {line:?}", path.display(), i + 1))
            })?;
            a.push(v);
        }
        if a.len() != q {
            return Err(ElassoError::LengthMismatch {
                expected: q,
                got: a.len(),
            });
        }
        Self::recentered(a)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.strictly_decreasing
    }
}

/// Centred decreasing Marčenko-Pastur quantiles for dimension q and sample size n.
pub fn mp_weights(q: usize, n: usize) -> Result<WeightVector> {
    if q == 0 {
        return Err(ElassoError::DimensionTooSmall { q, min: 1 });
    }
    if q >= n {
        return Err(ElassoError::DimensionExceedsSample { q, n });
    }
    let law = MarchenkoPastur::new(q as f64 / n as f64)?;
    let xi = (1..=q)
        .map(|j| law.quantile((q as f64 - j as f64 + 0.5) / q as f64))
        .collect::<Result<Vec<_>>>()?;
    let mean = xi.iter().sum::<f64>() / q as f64;
    let mut a: Vec<f64> = xi.iter().map(|x| x - mean).collect();
    // re-centre once more so the sum is zero to rounding
    let drift = a.iter().sum::<f64>() / q as f64;
    a.iter_mut().for_each(|v| *v -= drift);
    WeightVector::new(a)
}

/// `log(lambda_1 / lambda_q)`: weights (1, 0, ..., 0, -1).
pub fn condition_number_weights(q: usize) -> Result<WeightVector> {
    require_dim(q)?;
    let mut a = vec![0.0; q];
    a[0] = 1.0;
    a[q - 1] = -1.0;
    WeightVector::new(a)
}

/// `sum_j |log lambda_j - log lambda_q|`: weights (1, ..., 1, -(q-1)).
pub fn smallest_group_weights(q: usize) -> Result<WeightVector> {
    require_dim(q)?;
    let mut a = vec![1.0; q];
    a[q - 1] = -(q as f64 - 1.0);
    WeightVector::new(a)
}

/// `sum_{j<k} |log lambda_j - log lambda_k|`: weights `a_j = q + 1 - 2j`.
pub fn pairwise_weights(q: usize) -> Result<WeightVector> {
    require_dim(q)?;
    WeightVector::new((1..=q).map(|j| q as f64 + 1.0 - 2.0 * j as f64).collect())
}

fn require_dim(q: usize) -> Result<()> {
    if q < 2 {
        return Err(ElassoError::DimensionTooSmall { q, min: 2 });
    }
    Ok(())
}

/// How to obtain weights for a given problem size.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    MarchenkoPastur,
    ConditionNumber,
    SmallestGroup,
    Pairwise,
    Fixed(WeightVector),
}

impl WeightSpec {
    /// Weights for dimension `q` estimated from `n` observations.
    pub fn resolve(&self, q: usize, n: usize) -> Result<WeightVector> {
        match self {
            WeightSpec::MarchenkoPastur => mp_weights(q, n),
            WeightSpec::ConditionNumber => condition_number_weights(q),
            WeightSpec::SmallestGroup => smallest_group_weights(q),
            WeightSpec::Pairwise => pairwise_weights(q),
            WeightSpec::Fixed(w) => {
                if w.len() != q {
                    return Err(ElassoError::LengthMismatch {
                        expected: q,
                        got: w.len(),
                    });
                }
                Ok(w.clone())
            }
        }
    }

    /// Parses `mp | cond | smallest | pairwise | file:PATH`.
    pub fn parse(spec: &str, q: usize) -> Result<Self> {
        match spec {
            "mp" => Ok(WeightSpec::MarchenkoPastur),
            "cond" => Ok(WeightSpec::ConditionNumber),
            "smallest" => Ok(WeightSpec::SmallestGroup),
            "pairwise" => Ok(WeightSpec::Pairwise),
            other => match other.strip_prefix("file:") {
                Some(path) => Ok(WeightSpec::Fixed(WeightVector::from_file(Path::new(path), q)?)),
                None => Err(ElassoError::Config(format!(
                    "unknown weights {other:?}; expected mp, cond, smallest, pairwise or file:PATH"
                ))),
            },
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::MarchenkoPastur => f.write_str("mp"),
            WeightSpec::ConditionNumber => f.write_str("cond"),
            WeightSpec::SmallestGroup => f.write_str("smallest"),
            WeightSpec::Pairwise => f.write_str("pairwise"),
            WeightSpec::Fixed(_) => f.write_str("file"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = ElassoError;

    /// Built-in kinds only; `file:` needs the dimension, see [`WeightSpec::parse`].
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mp" | "cond" | "smallest" | "pairwise" => Self::parse(s, 0),
            _ => Err(ElassoError::Config(format!("unknown weights {s:?}"))),
        }
    }
}

/// A penalty evaluated on (nonincreasing, positive) eigenvalues.
pub trait Penalty: Send + Sync {
    fn value(&self, eigenvalues: &[f64]) -> Result<f64>;
}

#[derive(Debug, Clone)]
pub struct ElassoPenalty {
    weights: WeightVector,
}

impl ElassoPenalty {
    pub fn new(weights: WeightVector) -> Self {
        Self { weights }
    }
}

impl Penalty for ElassoPenalty {
    fn value(&self, eigenvalues: &[f64]) -> Result<f64> {
        elasso_penalty(eigenvalues, &self.weights)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KullbackLeibler;

impl Penalty for KullbackLeibler {
    fn value(&self, eigenvalues: &[f64]) -> Result<f64> {
        kl_penalty(eigenvalues)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Eccentricity;

impl Penalty for Eccentricity {
    fn value(&self, eigenvalues: &[f64]) -> Result<f64> {
        eccentricity_penalty(eigenvalues)
    }
}

fn check_positive(eigenvalues: &[f64]) -> Result<()> {
    match eigenvalues.iter().find(|v| !(**v > 0.0)) {
        Some(bad) => Err(ElassoError::NonpositiveEigenvalue(*bad)),
        None => Ok(()),
    }
}

/// `sum_j a_j log(lambda_j)`; eigenvalues are sorted internally so the
/// penalty stays symmetric in its argument.
pub fn elasso_penalty(eigenvalues: &[f64], weights: &WeightVector) -> Result<f64> {
    if eigenvalues.len() != weights.len() {
        return Err(ElassoError::LengthMismatch {
            expected: weights.len(),
            got: eigenvalues.len(),
        });
    }
    check_positive(eigenvalues)?;
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted
        .iter()
        .zip(weights.as_slice())
        .map(|(l, a)| a * l.ln())
        .sum())
}

/// `tr(Sigma^{-1}) + log det(Sigma)`.
pub fn kl_penalty(eigenvalues: &[f64]) -> Result<f64> {
    check_positive(eigenvalues)?;
    Ok(eigenvalues.iter().map(|l| 1.0 / l + l.ln()).sum())
}

/// Log of the arithmetic over the geometric mean of the eigenvalues.
pub fn eccentricity_penalty(eigenvalues: &[f64]) -> Result<f64> {
    check_positive(eigenvalues)?;
    let q = eigenvalues.len() as f64;
    let arith = eigenvalues.iter().sum::<f64>() / q;
    let log_geo = eigenvalues.iter().map(|l| l.ln()).sum::<f64>() / q;
    Ok((arith.ln() - log_geo).max(0.0))
}

/// `(1 - beta) S + beta I` with `beta = eta / (1 + eta)`, the minimizer of
/// the likelihood penalized by [`KullbackLeibler`].
pub fn ledoit_wolf(s: &Spectrum, eta: f64) -> Result<Spectrum> {
    if !(eta >= 0.0) {
        return Err(ElassoError::NegativeTuning(eta));
    }
    let beta = eta / (1.0 + eta);
    s.with_eigenvalues(
        s.eigenvalues()
            .iter()
            .map(|d| (1.0 - beta) * d + beta)
            .collect(),
    )
}
