//! Independent solvers for the penalized eigenvalue problem, used to check
//! the path engine: exhaustive search over all ordered groupings, and a
//! projected-gradient method on the log-eigenvalues.

use crate::error::{ElassoError, Result};
use crate::penalties::WeightVector;

use super::eigen_objective;

/// Largest dimension accepted by [`brute_force_solve`] (2^(q-1) groupings).
pub const BRUTE_FORCE_MAX_Q: usize = 12;

/// Minimizer found by enumerating every composition of `q` into contiguous
/// groups, keeping candidates that are ordered and positive.
pub fn brute_force_solve(d: &[f64], weights: &WeightVector, eta: f64) -> Result<Vec<f64>> {
    let q = d.len();
    if q > BRUTE_FORCE_MAX_Q {
        return Err(ElassoError::DimensionTooLarge {
            q,
            max: BRUTE_FORCE_MAX_Q,
        });
    }
    if q == 0 || weights.len() != q {
        return Err(ElassoError::LengthMismatch {
            expected: q,
            got: weights.len(),
        });
    }
    if !(eta >= 0.0) {
        return Err(ElassoError::NegativeTuning(eta));
    }
    let a = weights.as_slice();
    let mut best: Option<(f64, Vec<f64>)> = None;
    // bit k of `cuts` set means a group boundary after index k
    for cuts in 0u32..(1u32 << (q - 1)) {
        let mut lambda = Vec::with_capacity(q);
        let mut start = 0;
        let mut feasible = true;
        for end in 1..=q {
            if end < q && cuts & (1 << (end - 1)) == 0 {
                continue;
            }
            let m = (end - start) as f64;
            let dm = d[start..end].iter().sum::<f64>() / m;
            let am = a[start..end].iter().sum::<f64>() / m;
            let denom = 1.0 + eta * am;
            if denom <= 0.0 {
                feasible = false;
                break;
            }
            let value = dm / denom;
            if lambda.last().is_some_and(|prev: &f64| *prev < value) {
                feasible = false;
                break;
            }
            lambda.extend(std::iter::repeat_n(value, end - start));
            start = end;
        }
        if !feasible {
            continue;
        }
        let objective = eigen_objective(d, weights, eta, &lambda);
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, lambda));
        }
    }
    // the one-group candidate is always feasible
    Ok(best.expect("single group is feasible").1)
}

/// Euclidean projection onto `{y : y_1 >= ... >= y_q}` by pooling adjacent
/// violators.
pub fn pava_nonincreasing(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (v2, n2) = blocks[blocks.len() - 1];
            let (v1, n1) = blocks[blocks.len() - 2];
            if v1 >= v2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().unwrap() = ((v1 * n1 as f64 + v2 * n2 as f64) / n as f64, n);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct ConvexOracleOptions {
    pub max_iterations: usize,
    /// Stop when the sup-norm of the gradient mapping falls below this.
    pub tolerance: f64,
}

impl Default for ConvexOracleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            tolerance: 1e-11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub eigenvalues: Vec<f64>,
    pub iterations: usize,
    pub gap: f64,
}

/// Minimizes `sum_j d_j exp(-y_j) + (1 + eta a_j) y_j` over nonincreasing `y`
/// by projected gradient with backtracking, then returns `exp(y)`.
///
/// The objective is smooth and strictly convex on the ordered cone, where the
/// elasso penalty is linear in `y`.
pub fn convex_oracle(
    d: &[f64],
    weights: &WeightVector,
    eta: f64,
    options: ConvexOracleOptions,
) -> Result<OracleSolution> {
    const MAX_Q: usize = 50;
    let q = d.len();
    if q > MAX_Q {
        return Err(ElassoError::DimensionTooLarge { q, max: MAX_Q });
    }
    if q == 0 || weights.len() != q {
        return Err(ElassoError::LengthMismatch {
            expected: q,
            got: weights.len(),
        });
    }
    if !(eta >= 0.0) {
        return Err(ElassoError::NegativeTuning(eta));
    }
    if let Some(bad) = d.iter().find(|v| !(**v > 0.0)) {
        return Err(ElassoError::NonpositiveEigenvalue(*bad));
    }

    // solve for d / scale; the solution is scale equivariant
    let scale = d.iter().cloned().fold(0.0f64, f64::max);
    let dn: Vec<f64> = d.iter().map(|v| v / scale).collect();
    let lin: Vec<f64> = weights.as_slice().iter().map(|a| 1.0 + eta * a).collect();

    let objective = |y: &[f64]| -> f64 {
        y.iter()
            .zip(&dn)
            .zip(&lin)
            .map(|((y, d), c)| d * (-y).exp() + c * y)
            .sum()
    };
    let gradient = |y: &[f64]| -> Vec<f64> {
        y.iter()
            .zip(&dn)
            .zip(&lin)
            .map(|((y, d), c)| c - d * (-y).exp())
            .collect()
    };

    let mut y = pava_nonincreasing(&dn.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let mut fy = objective(&y);
    let mut step = 1.0;
    let mut gap = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        let g = gradient(&y);
        let (next, f_next) = loop {
            let trial: Vec<f64> = y.iter().zip(&g).map(|(y, g)| y - step * g).collect();
            let next = pava_nonincreasing(&trial);
            let f_next = objective(&next);
            let mut linear = 0.0;
            let mut sq = 0.0;
            for ((n, y), g) in next.iter().zip(&y).zip(&g) {
                linear += g * (n - y);
                sq += (n - y) * (n - y);
            }
            if f_next <= fy + linear + sq / (2.0 * step) + 1e-15 * fy.abs() || step < 1e-12 {
                break (next, f_next);
            }
            step *= 0.5;
        };
        gap = next
            .iter()
            .zip(&y)
            .map(|(n, y)| ((n - y) / step).abs())
            .fold(0.0, f64::max);
        y = next;
        fy = f_next;
        if gap <= options.tolerance {
            return Ok(OracleSolution {
                eigenvalues: y.iter().map(|v| v.exp() * scale).collect(),
                iterations: iteration,
                gap,
            });
        }
        step = (step * 1.5).min(1e3);
    }
    Err(ElassoError::NoConvergence {
        iterations: options.max_iterations,
        gap,
        best: y.iter().map(|v| v.exp() * scale).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::full_path;

    fn w(a: &[f64]) -> WeightVector {
        WeightVector::new(a.to_vec()).unwrap()
    }

    #[test]
    fn pava_projects_onto_nonincreasing_cone() {
        assert_eq!(pava_nonincreasing(&[3.0, 2.0, 1.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(pava_nonincreasing(&[1.0, 3.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava_nonincreasing(&[5.0, 1.0, 3.0]), vec![5.0, 2.0, 2.0]);
    }

    #[test]
    fn brute_force_matches_worked_example() {
        let a = w(&[1.0, 0.0, -1.0]);
        let d = [6.0, 3.0, 1.0];
        let path = full_path(&d, &a).unwrap();
        for eta in [0.3, 0.7, 1.5] {
            let bf = brute_force_solve(&d, &a, eta).unwrap();
            let ps = path.solve_at(eta).unwrap();
            for (x, y) in bf.iter().zip(&ps) {
                assert!((x - y).abs() < 1e-12, "eta={eta}: {bf:?} vs {ps:?}");
            }
        }
    }

    #[test]
    fn brute_force_edge_cases() {
        assert_eq!(brute_force_solve(&[2.5], &w(&[0.0]), 3.0).unwrap(), vec![2.5]);
        // q = 2 past the knot 1.2: both equal the mean
        let bf = brute_force_solve(&[4.0, 1.0], &w(&[0.5, -0.5]), 2.0).unwrap();
        assert!((bf[0] - 2.5).abs() < 1e-14 && (bf[1] - 2.5).abs() < 1e-14);
        let d = vec![1.0; 13];
        let a = w(&[0.0; 13]);
        assert!(matches!(
            brute_force_solve(&d, &a, 1.0),
            Err(ElassoError::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn convex_oracle_worked_example() {
        let a = w(&[1.0, 0.0, -1.0]);
        let d = [6.0, 3.0, 1.0];
        let path = full_path(&d, &a).unwrap();
        let sol = convex_oracle(&d, &a, 0.7, ConvexOracleOptions::default()).unwrap();
        let exact = path.solve_at(0.7).unwrap();
        for (x, y) in sol.eigenvalues.iter().zip(&exact) {
            assert!(((x - y) / y).abs() < 1e-5, "{:?} vs {exact:?}", sol.eigenvalues);
        }
        let sol = convex_oracle(&d, &a, 0.0, ConvexOracleOptions::default()).unwrap();
        for (x, y) in sol.eigenvalues.iter().zip(&d) {
            assert!(((x - y) / y).abs() < 1e-8);
        }
    }

    #[test]
    fn convex_oracle_reports_budget_exhaustion() {
        let a = w(&[1.0, 0.0, -1.0]);
        let opts = ConvexOracleOptions {
            max_iterations: 1,
            tolerance: 0.0,
        };
        match convex_oracle(&[6.0, 3.0, 1.0], &a, 0.7, opts) {
            Err(ElassoError::NoConvergence { best, .. }) => assert_eq!(best.len(), 3),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
