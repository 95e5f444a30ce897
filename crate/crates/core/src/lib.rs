//! Eigenvalue lasso for covariance estimation.
//!
//! Penalizing the Gaussian likelihood with `eta * sum_j a_j log(lambda_j)`,
//! for nonincreasing weights summing to zero, groups the eigenvalues of the
//! sample covariance matrix while keeping its eigenvectors. As `eta` grows
//! the groups merge one pair at a time, and the whole hierarchy of
//! groupings with its knots can be computed exactly.
//!
//! ```
//! use elasso::path::full_path;
//! use elasso::penalties::WeightVector;
//!
//! let weights = WeightVector::new(vec![1.0, 0.0, -1.0]).unwrap();
//! let path = full_path(&[6.0, 3.0, 1.0], &weights).unwrap();
//! assert_eq!(path.partitions()[1].sizes(), &[1, 2]);
//! let lambda = path.solve_at(0.5).unwrap();
//! assert!((lambda[0] - 4.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dual;
pub mod error;
pub mod forecast;
pub mod grid;
pub mod io;
pub mod path;
pub mod penalties;
pub mod selection;
pub mod simulate;
pub mod spectra;

pub use error::{ElassoError, Result};
