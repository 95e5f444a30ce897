//! C ABI over the elasso path engine.
//!
//! Every function returns an [`ElassoStatus`]; on failure a description is
//! kept per thread and can be read with [`elasso_last_error_message`].
//! Output arrays are caller-allocated and their lengths are checked.
//! Paths are opaque handles released with [`elasso_path_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use elasso::dual::{constrained_solve_on, kappa_of_eta};
use elasso::path::{full_path, model_path, ElassoPath};
use elasso::penalties::{mp_weights, WeightVector};
use elasso::spectra::{sample_covariance, DataMatrix};
use elasso::ElassoError;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElassoStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid input: bad lengths, orderings, weights or tuning values.
    InvalidInput = 2,
    /// Numerical failure such as a singular covariance.
    Numeric = 3,
    /// An output array is shorter than required.
    BufferTooSmall = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Opaque solution path.
pub struct ElassoPathHandle {
    path: ElassoPath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Small { needed: usize, got: usize },
    Lib(ElassoError),
}

impl From<ElassoError> for Failure {
    fn from(e: ElassoError) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ElassoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ElassoStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            ElassoStatus::NullPointer
        }
        Ok(Err(Failure::Small { needed, got })) => {
            set_error(format!("output buffer holds {got} values, {needed} needed"));
            ElassoStatus::BufferTooSmall
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(format!("{}: {e}", e.kind()));
            if e.is_numeric() {
                ElassoStatus::Numeric
            } else {
                ElassoStatus::InvalidInput
            }
        }
        Err(_) => {
            set_error("internal panic".into());
            ElassoStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, needed: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len < needed {
        return Err(Failure::Small { needed, got: len });
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(&mut slice::from_raw_parts_mut(p, len)[..needed])
}

unsafe fn handle<'a>(p: *const ElassoPathHandle) -> Result<&'a ElassoPathHandle, Failure> {
    p.as_ref().ok_or(Failure::Null("path"))
}

unsafe fn store(out: *mut *mut ElassoPathHandle, path: ElassoPath) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(ElassoPathHandle { path }));
    Ok(())
}

/// Builds the full path for nonincreasing eigenvalues `d` and weights `a`,
/// both of length `q`.
///
/// # Safety
/// `d` and `a` must point to `q` readable values and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_new(
    d: *const f64,
    a: *const f64,
    q: usize,
    out: *mut *mut ElassoPathHandle,
) -> ElassoStatus {
    guard(|| {
        let d = input(d, q, "d")?;
        let w = WeightVector::new(input(a, q, "a")?.to_vec())?;
        store(out, full_path(d, &w)?)
    })
}

/// Builds the path restricted to the model with `groups` group sizes.
///
/// # Safety
/// As [`elasso_path_new`]; `sizes` must point to `groups` readable values.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_new_model(
    d: *const f64,
    a: *const f64,
    q: usize,
    sizes: *const usize,
    groups: usize,
    out: *mut *mut ElassoPathHandle,
) -> ElassoStatus {
    guard(|| {
        let d = input(d, q, "d")?;
        let w = WeightVector::new(input(a, q, "a")?.to_vec())?;
        let sizes = input(sizes, groups, "sizes")?;
        store(out, model_path(d, &w, sizes)?)
    })
}

/// Releases a path. Null is ignored.
///
/// # Safety
/// `path` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_free(path: *mut ElassoPathHandle) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Dimension of the path, or 0 for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_dim(path: *const ElassoPathHandle) -> usize {
    path.as_ref().map_or(0, |h| h.path.q())
}

/// Writes the `q - 1` knots, nondecreasing; knots that never occur are `INFINITY`.
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_knots(
    path: *const ElassoPathHandle,
    out: *mut f64,
    len: usize,
) -> ElassoStatus {
    guard(|| {
        let knots = handle(path)?.path.knots();
        output(out, len, knots.len(), "out")?.copy_from_slice(knots);
        Ok(())
    })
}

/// Writes the `q - 1` merge positions (0-based group index within the
/// partition being merged).
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_merge_indices(
    path: *const ElassoPathHandle,
    out: *mut usize,
    len: usize,
) -> ElassoStatus {
    guard(|| {
        let merges = handle(path)?.path.merge_indices();
        output(out, len, merges.len(), "out")?.copy_from_slice(merges);
        Ok(())
    })
}

/// Writes the `q` penalized eigenvalues at `eta`.
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_solve(
    path: *const ElassoPathHandle,
    eta: f64,
    out: *mut f64,
    len: usize,
) -> ElassoStatus {
    guard(|| {
        let h = handle(path)?;
        let lambda = h.path.solve_at(eta)?;
        output(out, len, lambda.len(), "out")?.copy_from_slice(&lambda);
        Ok(())
    })
}

/// Penalty value of the estimate at `eta`.
///
/// # Safety
/// `out` must point to one writable value.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_kappa(
    path: *const ElassoPathHandle,
    eta: f64,
    out: *mut f64,
) -> ElassoStatus {
    guard(|| {
        let kappa = kappa_of_eta(&handle(path)?.path, eta)?;
        output(out, 1, 1, "out")?[0] = kappa;
        Ok(())
    })
}

/// Estimate under the constraint `penalty <= kappa`, with its tuning value.
///
/// # Safety
/// `eta_out` must point to one writable value, `lambda_out` to `len`.
#[no_mangle]
pub unsafe extern "C" fn elasso_path_constrained_solve(
    path: *const ElassoPathHandle,
    kappa: f64,
    eta_out: *mut f64,
    lambda_out: *mut f64,
    len: usize,
) -> ElassoStatus {
    guard(|| {
        let sol = constrained_solve_on(&handle(path)?.path, kappa)?;
        let lambda = output(lambda_out, len, sol.estimate.len(), "lambda_out")?;
        let eta = output(eta_out, 1, 1, "eta_out")?;
        lambda.copy_from_slice(&sol.estimate);
        eta[0] = sol.eta;
        Ok(())
    })
}

/// Marčenko-Pastur weights for dimension `q` and sample size `n > q`.
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn elasso_mp_weights(q: usize, n: usize, out: *mut f64, len: usize) -> ElassoStatus {
    guard(|| {
        let w = mp_weights(q, n)?;
        output(out, len, q, "out")?.copy_from_slice(w.as_slice());
        Ok(())
    })
}

/// Eigenvalues (nonincreasing) of the sample covariance, divisor `n`, of
/// the row-major `n x q` matrix `data`.
///
/// # Safety
/// `data` must point to `n * q` readable values, `out` to `len` writable.
#[no_mangle]
pub unsafe extern "C" fn elasso_sample_eigenvalues(
    data: *const f64,
    n: usize,
    q: usize,
    out: *mut f64,
    len: usize,
) -> ElassoStatus {
    guard(|| {
        let count = n.checked_mul(q).ok_or_else(|| {
            Failure::Lib(ElassoError::InvalidData(format!("{n} x {q} overflows")))
        })?;
        let values = input(data, count, "data")?;
        let rows: Vec<&[f64]> = if q == 0 { Vec::new() } else { values.chunks(q).collect() };
        let spectrum = sample_covariance(&DataMatrix::from_rows(&rows)?)?;
        output(out, len, q, "out")?.copy_from_slice(spectrum.eigenvalues());
        Ok(())
    })
}

/// Copies the last error of this thread into `buf` (nul-terminated,
/// truncated to `len`) and returns the full message length, 0 if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn elasso_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
