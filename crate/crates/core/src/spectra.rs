//! Sample covariance, symmetric spectral decomposition and the (penalized)
//! Gaussian negative log-likelihood.
//!
//! Every orthogonally invariant penalty reduces the covariance problem to a
//! problem on eigenvalues with the eigenbasis of the input held fixed, so the
//! rest of the crate works on [`Spectrum`] values rather than dense matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{ElassoError, Result};
use crate::penalties::Penalty;

/// Asymmetry accepted before a matrix is rejected, relative to its largest entry.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// An n x q sample: rows are observations, columns are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(ElassoError::InvalidData(format!(
                "need at least 2 observations, got {}",
                values.nrows()
            )));
        }
        if values.ncols() < 1 {
            return Err(ElassoError::InvalidData("need at least 1 variable".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(ElassoError::InvalidData(format!("non-finite entry {bad}")));
        }
        Ok(Self { values })
    }

    /// Builds a data matrix from row slices; rows must all have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let q = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = DMatrix::zeros(n, q);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != q {
                return Err(ElassoError::InvalidData(format!(
                    "row {} has {} fields, expected {q}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                values[(i, j)] = *v;
            }
        }
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn q(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Sub-sample with the given row indices, in that order.
    ///
    /// Unlike [`DataMatrix::new`] this accepts fewer than two rows, since test
    /// folds may be tiny; callers that estimate a covariance go through
    /// [`sample_covariance`], which re-checks.
    pub fn select_rows(&self, rows: &[usize]) -> DataMatrix {
        DataMatrix {
            values: self.values.select_rows(rows),
        }
    }

    /// Element-wise `sqrt(N + 0.25)`, the variance-stabilizing transform for counts.
    pub fn sqrt_counts(&self) -> Result<DataMatrix> {
        if let Some(bad) = self.values.iter().find(|v| **v < -0.25) {
            return Err(ElassoError::InvalidData(format!(
                "count {bad} is below -0.25; sqrt transform undefined"
            )));
        }
        Ok(DataMatrix {
            values: self.values.map(|v| (v + 0.25).sqrt()),
        })
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.q())
            .map(|j| self.values.column(j).sum() / n)
            .collect()
    }
}

/// Eigenvalues in nonincreasing order with an orthonormal eigenbasis (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    basis: DMatrix<f64>,
    mean: Option<Vec<f64>>,
}

impl Spectrum {
    /// Pairs new eigenvalues with an existing basis. Eigenvalues must be
    /// nonincreasing and positive; the basis is taken as given.
    pub fn with_eigenvalues(&self, eigenvalues: Vec<f64>) -> Result<Spectrum> {
        if eigenvalues.len() != self.q() {
            return Err(ElassoError::LengthMismatch {
                expected: self.q(),
                got: eigenvalues.len(),
            });
        }
        check_positive_nonincreasing(&eigenvalues)?;
        Ok(Spectrum {
            eigenvalues,
            basis: self.basis.clone(),
            mean: self.mean.clone(),
        })
    }

    /// A spectrum with the identity basis, i.e. a diagonal matrix.
    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Spectrum> {
        check_positive_nonincreasing(&eigenvalues)?;
        let q = eigenvalues.len();
        Ok(Spectrum {
            eigenvalues,
            basis: DMatrix::identity(q, q),
            mean: None,
        })
    }

    pub fn q(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn mean(&self) -> Option<&[f64]> {
        self.mean.as_deref()
    }

    /// `P diag(eigenvalues) P^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        reconstruct_with(&self.basis, &self.eigenvalues)
    }

    pub fn log_det(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.ln()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

pub(crate) fn reconstruct_with(basis: &DMatrix<f64>, eigenvalues: &[f64]) -> DMatrix<f64> {
    let scaled = DMatrix::from_fn(basis.nrows(), basis.ncols(), |i, j| {
        basis[(i, j)] * eigenvalues[j]
    });
    let out = &scaled * basis.transpose();
    (&out + out.transpose()) * 0.5
}

fn check_positive_nonincreasing(eigenvalues: &[f64]) -> Result<()> {
    if let Some(bad) = eigenvalues.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(ElassoError::NonpositiveEigenvalue(*bad));
    }
    if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
        return Err(ElassoError::InvalidData(
            "eigenvalues must be nonincreasing".into(),
        ));
    }
    Ok(())
}

/// Sample covariance with divisor n (not n - 1), decomposed.
pub fn sample_covariance(data: &DataMatrix) -> Result<Spectrum> {
    let n = data.n();
    if n < 2 {
        return Err(ElassoError::InvalidData(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    let mean = data.column_means();
    let centered = DMatrix::from_fn(n, data.q(), |i, j| data.values[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let mut spectrum = decompose_symmetric(cov)?;
    spectrum.mean = Some(mean);
    Ok(spectrum)
}

/// Decomposes a user-supplied symmetric positive-definite matrix.
pub fn spectral_decompose(s: &DMatrix<f64>) -> Result<Spectrum> {
    if !s.is_square() || s.nrows() == 0 {
        return Err(ElassoError::ShapeMismatch(format!(
            "expected a non-empty square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if let Some(bad) = s.iter().find(|v| !v.is_finite()) {
        return Err(ElassoError::InvalidData(format!("non-finite entry {bad}")));
    }
    let scale = s.amax().max(1.0);
    let asym = (s - s.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(ElassoError::NotSymmetric(asym));
    }
    decompose_symmetric((s + s.transpose()) * 0.5)
}

fn decompose_symmetric(s: DMatrix<f64>) -> Result<Spectrum> {
    let q = s.nrows();
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut basis = DMatrix::zeros(q, q);
    for (col, &k) in order.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        // sign convention: first nonzero coordinate positive
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        basis.set_column(col, &v);
    }

    let largest = eigenvalues[0];
    let smallest = eigenvalues[q - 1];
    if !(largest > 0.0) || smallest <= q as f64 * f64::EPSILON * largest {
        return Err(ElassoError::SingularCovariance { smallest, largest });
    }
    Ok(Spectrum {
        eigenvalues,
        basis,
        mean: None,
    })
}

/// `tr(Sigma^{-1} S) + log det Sigma`, with both matrices given by their spectra.
pub fn neg_log_lik(sigma: &Spectrum, s: &Spectrum) -> f64 {
    // tr(Sigma^{-1} S) = sum_{j,k} d_k / lambda_j * (p_j . q_k)^2
    let cross = sigma.basis.transpose() * &s.basis;
    let mut trace = 0.0;
    for j in 0..sigma.q() {
        for k in 0..s.q() {
            let c = cross[(j, k)];
            trace += s.eigenvalues[k] * c * c / sigma.eigenvalues[j];
        }
    }
    trace + sigma.log_det()
}

/// `l(Sigma; S) + eta * Pi(Sigma)`.
pub fn penalized_objective(
    sigma: &Spectrum,
    s: &Spectrum,
    eta: f64,
    penalty: &dyn Penalty,
) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(ElassoError::NegativeTuning(eta));
    }
    let base = neg_log_lik(sigma, s);
    if eta == 0.0 {
        return Ok(base);
    }
    Ok(base + eta * penalty.value(sigma.eigenvalues())?)
}
