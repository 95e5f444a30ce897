//! Marčenko-Pastur law for the eigenvalues of a white sample covariance.
//!
//! The CDF has no convenient closed form here, so it is integrated
//! numerically. With `x = c- + (c+ - c-) sin^2(t)` the square-root
//! singularities at both support endpoints disappear and the integrand in
//! `t` is smooth on `[0, pi/2]`, which adaptive Simpson handles well.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{ElassoError, Result};

const CDF_ABS_TOL: f64 = 1e-10;
const QUANTILE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchenkoPastur {
    nu: f64,
    c_minus: f64,
    c_plus: f64,
}

impl MarchenkoPastur {
    /// Ratio `nu = q / n`, strictly between 0 and 1.
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(ElassoError::Config(format!(
                "Marchenko-Pastur ratio must lie in (0, 1), got {nu}"
            )));
        }
        let r = nu.sqrt();
        Ok(Self {
            nu,
            c_minus: (1.0 - r).powi(2),
            c_plus: (1.0 + r).powi(2),
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= self.c_minus || x >= self.c_plus {
            return 0.0;
        }
        ((self.c_plus - x) * (x - self.c_minus)).sqrt() / (2.0 * PI * x * self.nu)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.c_minus {
            return 0.0;
        }
        if x >= self.c_plus {
            return 1.0;
        }
        let width = self.c_plus - self.c_minus;
        let theta = ((x - self.c_minus) / width).sqrt().asin();
        let lo = self.angular_integral(0.0, theta);
        if theta <= FRAC_PI_2 / 2.0 {
            return lo.clamp(0.0, 1.0);
        }
        // integrate the shorter side for the upper half
        let hi = self.angular_integral(theta, FRAC_PI_2);
        (1.0 - hi).clamp(0.0, 1.0)
    }

    /// Smallest x in the support with `cdf(x) >= p`, by bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ElassoError::InvalidProbability(p));
        }
        let (mut lo, mut hi) = (self.c_minus, self.c_plus);
        while hi - lo > QUANTILE_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    // density mass between two angles of the sin^2 substitution
    fn angular_integral(&self, a: f64, b: f64) -> f64 {
        let width = self.c_plus - self.c_minus;
        let f = |t: f64| {
            let (s, c) = t.sin_cos();
            let x = self.c_minus + width * s * s;
            width * width * s * s * c * c / (PI * x * self.nu)
        };
        adaptive_simpson(&f, a, b, CDF_ABS_TOL, 50)
    }
}

pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
