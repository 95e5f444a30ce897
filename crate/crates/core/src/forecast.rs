//! Conditional-mean prediction of the trailing block of a vector from its
//! leading block, and average absolute forecast errors.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{ElassoError, Result};
use crate::spectra::Spectrum;

/// Regression of the last `q - p` variables on the first `p`.
#[derive(Debug, Clone)]
pub struct PredictionSplit {
    head: usize,
    mean: Vec<f64>,
    // Sigma_21 Sigma_11^{-1}, (q - p) x p
    coefficients: DMatrix<f64>,
}

impl PredictionSplit {
    pub fn new(estimate: &Spectrum, mean: Vec<f64>, head: usize) -> Result<Self> {
        let q = estimate.q();
        if head < 1 || head >= q {
            return Err(ElassoError::Config(format!(
                "head count must satisfy 1 <= p < q = {q}, got {head}"
            )));
        }
        if mean.len() != q {
            return Err(ElassoError::LengthMismatch {
                expected: q,
                got: mean.len(),
            });
        }
        let sigma = estimate.reconstruct();
        let s11 = sigma.view((0, 0), (head, head)).into_owned();
        let s21 = sigma.view((head, 0), (q - head, head)).into_owned();
        let largest = estimate.eigenvalues()[0];
        let chol = Cholesky::new(s11).ok_or(ElassoError::SingularBlock(head))?;
        let l = chol.l();
        let smallest_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(*v));
        if !(smallest_pivot * smallest_pivot > f64::EPSILON * head as f64 * largest) {
            return Err(ElassoError::SingularBlock(head));
        }
        // Sigma_21 Sigma_11^{-1} = (Sigma_11^{-1} Sigma_12)^T
        let coefficients = chol.solve(&s21.transpose()).transpose();
        Ok(Self {
            head,
            mean,
            coefficients,
        })
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn tail(&self) -> usize {
        self.mean.len() - self.head
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }
}

/// `mu_2 + Sigma_21 Sigma_11^{-1} (x_head - mu_1)`.
pub fn conditional_predict(split: &PredictionSplit, x_head: &[f64]) -> Result<Vec<f64>> {
    let p = split.head;
    if x_head.len() != p {
        return Err(ElassoError::LengthMismatch {
            expected: p,
            got: x_head.len(),
        });
    }
    let centred = DVector::from_iterator(p, x_head.iter().zip(&split.mean).map(|(x, m)| x - m));
    let fitted = &split.coefficients * centred;
    Ok(fitted
        .iter()
        .zip(&split.mean[p..])
        .map(|(f, m)| f + m)
        .collect())
}

/// Predictions for every row of `heads` (m x p), as an m x (q - p) matrix.
pub fn predict_rows(split: &PredictionSplit, heads: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if heads.ncols() != split.head {
        return Err(ElassoError::ShapeMismatch(format!(
            "expected {} head columns, got {}",
            split.head,
            heads.ncols()
        )));
    }
    let p = split.head;
    let centred = DMatrix::from_fn(heads.nrows(), p, |i, j| heads[(i, j)] - split.mean[j]);
    let mut out = centred * split.coefficients.transpose();
    for mut row in out.row_iter_mut() {
        for (v, m) in row.iter_mut().zip(&split.mean[p..]) {
            *v += m;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastError {
    /// Mean absolute error of each predicted component.
    pub per_component: Vec<f64>,
    pub average: f64,
}

/// Average absolute forecast error per component.
pub fn aafe(predictions: &DMatrix<f64>, actuals: &DMatrix<f64>) -> Result<ForecastError> {
    if predictions.shape() != actuals.shape() || predictions.nrows() == 0 || predictions.ncols() == 0 {
        return Err(ElassoError::ShapeMismatch(format!(
            "predictions are {}x{}, actuals {}x{}",
            predictions.nrows(),
            predictions.ncols(),
            actuals.nrows(),
            actuals.ncols()
        )));
    }
    let m = predictions.nrows() as f64;
    let per_component: Vec<f64> = (predictions - actuals)
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>() / m)
        .collect();
    let average = per_component.iter().sum::<f64>() / per_component.len() as f64;
    Ok(ForecastError {
        per_component,
        average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::spectral_decompose;
    use approx::assert_relative_eq;

    fn split_2x2() -> PredictionSplit {
        let s = spectral_decompose(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        PredictionSplit::new(&s, vec![0.0, 0.0], 1).unwrap()
    }

    #[test]
    fn hand_regression() {
        let p = conditional_predict(&split_2x2(), &[1.0]).unwrap();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn identity_predicts_mean() {
        let s = Spectrum::diagonal(vec![1.0; 4]).unwrap();
        let split = PredictionSplit::new(&s, vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
        let p = conditional_predict(&split, &[10.0, -7.0]).unwrap();
        assert_eq!(p, vec![3.0, 4.0]);
    }

    #[test]
    fn head_at_mean_predicts_tail_mean() {
        let s = spectral_decompose(&DMatrix::from_row_slice(
            3,
            3,
            &[3.0, 1.0, 0.5, 1.0, 2.0, 0.3, 0.5, 0.3, 1.0],
        ))
        .unwrap();
        let split = PredictionSplit::new(&s, vec![1.0, -1.0, 2.0], 2).unwrap();
        let p = conditional_predict(&split, &[1.0, -1.0]).unwrap();
        assert_relative_eq!(p[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn batch_matches_single() {
        let s = spectral_decompose(&DMatrix::from_row_slice(
            3,
            3,
            &[3.0, 1.0, 0.5, 1.0, 2.0, 0.3, 0.5, 0.3, 1.0],
        ))
        .unwrap();
        let split = PredictionSplit::new(&s, vec![1.0, -1.0, 2.0], 1).unwrap();
        let heads = DMatrix::from_row_slice(2, 1, &[0.5, 4.0]);
        let batch = predict_rows(&split, &heads).unwrap();
        for i in 0..2 {
            let single = conditional_predict(&split, &[heads[(i, 0)]]).unwrap();
            for j in 0..2 {
                assert_relative_eq!(batch[(i, j)], single[j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn invalid_splits() {
        let s = Spectrum::diagonal(vec![1.0; 3]).unwrap();
        assert!(PredictionSplit::new(&s, vec![0.0; 3], 0).is_err());
        assert!(PredictionSplit::new(&s, vec![0.0; 3], 3).is_err());
        assert!(PredictionSplit::new(&s, vec![0.0; 2], 1).is_err());
        // leading block is the tiny eigenvalue's direction
        let swapped = spectral_decompose(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0])).unwrap();
        let singular = swapped.with_eigenvalues(vec![1.0, 1e-300]).unwrap();
        assert!(matches!(
            PredictionSplit::new(&singular, vec![0.0; 2], 1),
            Err(ElassoError::SingularBlock(1))
        ));
    }

    #[test]
    fn aafe_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let e = aafe(&x, &x).unwrap();
        assert_eq!(e.per_component, vec![0.0, 0.0]);
        let p = DMatrix::from_row_slice(1, 2, &[1.0, 3.0]);
        let a = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let e = aafe(&p, &a).unwrap();
        assert_eq!(e.per_component, vec![1.0, 3.0]);
        assert_eq!(e.average, 2.0);
        let e2 = aafe(&(&p * -2.5), &(&a * -2.5)).unwrap();
        assert_eq!(e2.per_component, vec![2.5, 7.5]);
        assert!(matches!(
            aafe(&p, &DMatrix::zeros(2, 2)),
            Err(ElassoError::ShapeMismatch(_))
        ));
    }
}
