//! C ABI for `cohres`.
//!
//! Every entry point returns a [`CohresStatus`]. On failure a message is kept
//! per thread and can be read with [`cohres_last_error`]. Output arrays are
//! caller-allocated; their length is passed alongside and checked. Strings
//! returned by the library must be released with [`cohres_string_free`], and
//! soliton handles with [`cohres_soliton_free`]. Panics never cross the
//! boundary; they are reported as `COHRES_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cohres::config::RunConfig;
use cohres::darboux::{DarbouxGrid, SolitonSpec};
use cohres::resolution::{build_rho_density, eval_functional_rho, solve_omega_xi, TestFunction};
use cohres::symmetry::{poly_from_alphas, s_inverse_block, s_matrix};
use cohres::verify::{run_suite, Suite};
use cohres::Error;

/// Result codes. The first four match the exit codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohresStatus {
    Ok = 0,
    CheckFailed = 1,
    InvalidArgument = 2,
    NumericFailure = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A multisoliton transformation sampled on its default grid.
pub struct CohresSoliton {
    grid: DarbouxGrid,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CohresStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numeric() {
            CohresStatus::NumericFailure
        } else {
            CohresStatus::InvalidArgument
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: CohresStatus, msg: &str) -> Result<T, Failure> {
    Err(Failure(status, msg.to_string()))
}

/// Runs `f`, records any error and converts panics.
fn guard<F: FnOnce() -> Result<CohresStatus, Failure>>(f: F) -> CohresStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CohresStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must point to `len` readable doubles when `len > 0`.
unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return fail(CohresStatus::NullPointer, &format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must point to `len` writable doubles when `len > 0`.
unsafe fn slice_mut<'a>(ptr: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len < need {
        return fail(
            CohresStatus::BufferTooSmall,
            &format!("{what} holds {len} values, {need} needed"),
        );
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return fail(CohresStatus::NullPointer, &format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, need))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`) and returns the full message length in bytes, or 0
/// when there is none.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cohres_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Leading `(n_max+1) x (n_max+1)` block of `S = f(p)`, row-major.
///
/// # Safety
/// `alphas` must hold `n_alphas` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cohres_s_matrix(
    alphas: *const f64,
    n_alphas: usize,
    n_max: usize,
    out: *mut f64,
    out_len: usize,
) -> CohresStatus {
    guard(|| {
        let alphas = slice(alphas, n_alphas, "alphas")?;
        let dim = n_max + 1;
        let out = slice_mut(out, out_len, dim * dim, "out")?;
        let f = poly_from_alphas(alphas)?;
        if n_max < f.degree() {
            return fail(CohresStatus::InvalidArgument, "n_max is below the degree of f");
        }
        let s = s_matrix(&f, n_max)?;
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j] = s.get(i, j);
            }
        }
        Ok(CohresStatus::Ok)
    })
}

/// Leading `block x block` part of `S^-1`, row-major, certified by doubling
/// the truncation until successive blocks differ by at most `tolerance`.
///
/// # Safety
/// `alphas` must hold `n_alphas` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cohres_s_inverse_block(
    alphas: *const f64,
    n_alphas: usize,
    block: usize,
    tolerance: f64,
    out: *mut f64,
    out_len: usize,
) -> CohresStatus {
    guard(|| {
        let alphas = slice(alphas, n_alphas, "alphas")?;
        let out = slice_mut(out, out_len, block * block, "out")?;
        let inv = s_inverse_block(alphas, block, tolerance)?;
        for i in 0..block {
            for j in 0..block {
                out[i * block + j] = inv.block[(i, j)];
            }
        }
        Ok(CohresStatus::Ok)
    })
}

/// Density of the measure for the symmetry-transformed states at `xs`.
///
/// # Safety
/// `alphas`, `xs` and `out` must hold `n_alphas`, `n` and `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cohres_omega_xi(
    alphas: *const f64,
    n_alphas: usize,
    xs: *const f64,
    n: usize,
    out: *mut f64,
) -> CohresStatus {
    guard(|| {
        let alphas = slice(alphas, n_alphas, "alphas")?;
        let xs = slice(xs, n, "xs")?;
        let out = slice_mut(out, n, n, "out")?;
        let omega = solve_omega_xi(&poly_from_alphas(alphas)?)?;
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = omega.eval(x);
        }
        Ok(CohresStatus::Ok)
    })
}

/// Fourier-side density of the functional at `ts`; `damped` selects the
/// form without the `exp(t^2/8)` factor.
///
/// # Safety
/// `alphas`, `ts` and `out` must hold `n_alphas`, `n` and `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cohres_omega_rho(
    alphas: *const f64,
    n_alphas: usize,
    ts: *const f64,
    n: usize,
    damped: bool,
    out: *mut f64,
) -> CohresStatus {
    guard(|| {
        let alphas = slice(alphas, n_alphas, "alphas")?;
        let ts = slice(ts, n, "ts")?;
        let out = slice_mut(out, n, n, "out")?;
        let d = build_rho_density(alphas)?;
        for (o, &t) in out.iter_mut().zip(ts) {
            *o = if damped { d.damped(t) } else { d.eval(t) };
        }
        Ok(CohresStatus::Ok)
    })
}

/// The functional applied to `exp(-|z|^2) conj(z)^n z^k`.
///
/// # Safety
/// `alphas` must hold `n_alphas` doubles; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cohres_functional_rho(
    alphas: *const f64,
    n_alphas: usize,
    n: usize,
    k: usize,
    re: *mut f64,
    im: *mut f64,
) -> CohresStatus {
    guard(|| {
        let alphas = slice(alphas, n_alphas, "alphas")?;
        if re.is_null() || im.is_null() {
            return fail(CohresStatus::NullPointer, "re or im is null");
        }
        let d = build_rho_density(alphas)?;
        let v = eval_functional_rho(&d, &TestFunction::HermiteGaussian { n, k })?;
        *re = v.re;
        *im = v.im;
        Ok(CohresStatus::Ok)
    })
}

/// Builds a soliton handle; `shifts` may be null.
///
/// # Safety
/// `alphas` must hold `n_alphas` doubles, `shifts` null or `n_alphas`
/// doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cohres_soliton_new(
    alphas: *const f64,
    shifts: *const f64,
    n_alphas: usize,
    out: *mut *mut CohresSoliton,
) -> CohresStatus {
    guard(|| {
        if out.is_null() {
            return fail(CohresStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let alphas = slice(alphas, n_alphas, "alphas")?.to_vec();
        let shifts = if shifts.is_null() {
            None
        } else {
            Some(slice(shifts, n_alphas, "shifts")?.to_vec())
        };
        let grid = DarbouxGrid::with_defaults(SolitonSpec::new(alphas, shifts)?)?;
        *out = Box::into_raw(Box::new(CohresSoliton { grid }));
        Ok(CohresStatus::Ok)
    })
}

/// Releases a handle from [`cohres_soliton_new`]; null is ignored.
///
/// # Safety
/// `handle` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cohres_soliton_free(handle: *mut CohresSoliton) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of solitons, i.e. the order of the intertwiner.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cohres_soliton_order(handle: *const CohresSoliton) -> usize {
    handle.as_ref().map_or(0, |h| h.grid.darboux().order())
}

/// Potential at `xs`.
///
/// # Safety
/// `handle` must be live; `xs` and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cohres_soliton_potential(
    handle: *const CohresSoliton,
    xs: *const f64,
    n: usize,
    out: *mut f64,
) -> CohresStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(CohresStatus::NullPointer, "handle is null");
        };
        let xs = slice(xs, n, "xs")?;
        let out = slice_mut(out, n, n, "out")?;
        out.copy_from_slice(&h.grid.darboux().potential(xs, 0.0)?);
        Ok(CohresStatus::Ok)
    })
}

/// Rayleigh quotients of the normalized bound states, one per soliton, in
/// the order of the sorted parameters.
///
/// # Safety
/// `handle` must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cohres_soliton_bound_energies(
    handle: *const CohresSoliton,
    out: *mut f64,
    out_len: usize,
) -> CohresStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(CohresStatus::NullPointer, "handle is null");
        };
        let states = h.grid.bound_states(0.0)?;
        let out = slice_mut(out, out_len, states.len(), "out")?;
        for (o, s) in out.iter_mut().zip(&states) {
            *o = h.grid.rayleigh_quotient(s)?;
        }
        Ok(CohresStatus::Ok)
    })
}

/// Runs a verification suite (`xi`, `rho`, `darboux`, `coherent` or `all`)
/// and returns the JSON report through `report`. The status is
/// `COHRES_STATUS_CHECK_FAILED` when the report is produced but a check fails.
///
/// # Safety
/// `suite` must be a NUL-terminated string, `alphas` must hold `n_alphas`
/// doubles and `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cohres_verify_json(
    suite: *const c_char,
    alphas: *const f64,
    n_alphas: usize,
    n_max: usize,
    report: *mut *mut c_char,
) -> CohresStatus {
    guard(|| {
        if report.is_null() || suite.is_null() {
            return fail(CohresStatus::NullPointer, "suite or report is null");
        }
        *report = ptr::null_mut();
        let Ok(name) = CStr::from_ptr(suite).to_str() else {
            return fail(CohresStatus::InvalidArgument, "suite is not UTF-8");
        };
        let suite: Suite = name.parse()?;
        let config = RunConfig {
            alphas: slice(alphas, n_alphas, "alphas")?.to_vec(),
            n_max,
            ..RunConfig::default()
        };
        let r = run_suite(&config, suite)?;
        let json = CString::new(r.to_json()?).map_err(|e| Failure(CohresStatus::NumericFailure, e.to_string()))?;
        *report = json.into_raw();
        if r.overall_pass {
            Ok(CohresStatus::Ok)
        } else {
            set_error("verification check failed");
            Ok(CohresStatus::CheckFailed)
        }
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cohres_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
