//! Penalized versus constrained estimation.
//!
//! The penalized estimate at `eta` also solves the likelihood problem
//! constrained to `Pi(Sigma) <= kappa(eta)`, where `kappa(eta)` is the penalty
//! of the penalized estimate. `kappa` is continuous and non-increasing in
//! `eta`, and reaches zero at the largest knot, so a constraint level can be
//! mapped back to a tuning value by bisection.

use serde::Serialize;

use crate::error::{ElassoError, Result};
use crate::path::{full_path, ElassoPath};
use crate::penalties::{elasso_penalty, WeightVector};

/// Bisection stops once the bracket is narrower than this.
pub const ETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualitySolution {
    pub kappa: f64,
    pub eta: f64,
    pub estimate: Vec<f64>,
}

/// `kappa(eta) = Pi(solve_at(eta))`.
pub fn kappa_of_eta(path: &ElassoPath, eta: f64) -> Result<f64> {
    let estimate = path.solve_at(eta)?;
    elasso_penalty(&estimate, path.weights())
}

/// Solves `min l(Sigma; S) s.t. Pi(Sigma; a) <= kappa` on the eigenvalues.
pub fn constrained_solve(d: &[f64], weights: &WeightVector, kappa: f64) -> Result<DualitySolution> {
    let path = full_path(d, weights)?;
    constrained_solve_on(&path, kappa)
}

/// As [`constrained_solve`], reusing an existing path.
///
/// Returns the smallest `eta` with `kappa(eta) <= kappa`.
pub fn constrained_solve_on(path: &ElassoPath, kappa: f64) -> Result<DualitySolution> {
    if !(kappa > 0.0) {
        return Err(ElassoError::InfeasibleConstraint(kappa));
    }
    let upper = kappa_of_eta(path, 0.0)?;
    if kappa >= upper {
        return Ok(DualitySolution {
            kappa: upper,
            eta: 0.0,
            estimate: path.solve_at(0.0)?,
        });
    }
    // kappa(eta) = 0 from the last knot on, and kappa > 0, so the root is
    // inside the bracket
    let mut lo = 0.0;
    let mut hi = path.largest_knot().unwrap_or(0.0) + 1.0;
    while hi - lo > ETA_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kappa_of_eta(path, mid)? > kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let estimate = path.solve_at(hi)?;
    Ok(DualitySolution {
        kappa: elasso_penalty(&estimate, path.weights())?,
        eta: hi,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example() -> (Vec<f64>, WeightVector) {
        (
            vec![6.0, 3.0, 1.0],
            WeightVector::new(vec![1.0, 0.0, -1.0]).unwrap(),
        )
    }

    #[test]
    fn kappa_hand_values() {
        let (d, a) = example();
        let path = full_path(&d, &a).unwrap();
        assert_relative_eq!(kappa_of_eta(&path, 0.0).unwrap(), 6f64.ln());
        assert_relative_eq!(kappa_of_eta(&path, 0.5).unwrap(), 2f64.ln(), epsilon = 1e-14);
        assert!(kappa_of_eta(&path, 0.8).unwrap().abs() < 1e-14);
        assert!(kappa_of_eta(&path, 5.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn constrained_solve_roundtrip() {
        let (d, a) = example();
        let sol = constrained_solve(&d, &a, 2f64.ln()).unwrap();
        assert!((sol.eta - 0.5).abs() < 1e-10, "eta = {}", sol.eta);
        for (x, y) in sol.estimate.iter().zip([4.0, 3.0, 2.0]) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn unconstrained_optimum_when_feasible() {
        let (d, a) = example();
        let sol = constrained_solve(&d, &a, 6f64.ln()).unwrap();
        assert_eq!(sol.eta, 0.0);
        assert_eq!(sol.estimate, d);
        let sol = constrained_solve(&d, &a, 10.0).unwrap();
        assert_eq!(sol.eta, 0.0);
    }

    #[test]
    fn tiny_kappa_approaches_sphere() {
        let (d, a) = example();
        let sol = constrained_solve(&d, &a, 1e-9).unwrap();
        for x in &sol.estimate {
            assert!((x - 10.0 / 3.0).abs() < 1e-6);
        }
        assert!(matches!(
            constrained_solve(&d, &a, 0.0),
            Err(ElassoError::InfeasibleConstraint(_))
        ));
    }
}
