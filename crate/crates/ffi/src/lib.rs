//! C ABI over `qmarg`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `_free` function. Every fallible call returns a `QmargStatus`;
//! on failure the message is available from `qmarg_last_error` on the same
//! thread until the next failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qmarg::fock::{occupations_of, read_state};
use qmarg::gpc::{catalog, evaluate, pinning_report};
use qmarg::harmonium::{quasipinning_point, QuadratureSpec};
use qmarg::{ConstraintCatalog, FermionState, NonVector, OrbitalSpace, QmargError, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmargStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Degenerate = 4,
    NoConvergence = 5,
    BufferTooSmall = 6,
    Io = 7,
    Panic = 8,
}

/// An N-fermion pure state over d orbitals.
pub struct QmargState {
    inner: FermionState,
}

/// Generalized Pauli constraints of one (N, d) setting.
pub struct QmargCatalog {
    inner: ConstraintCatalog,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &QmargError) -> QmargStatus {
    match e {
        QmargError::Parse(_) => QmargStatus::Parse,
        QmargError::Degenerate { .. } => QmargStatus::Degenerate,
        QmargError::NoConvergence { .. } => QmargStatus::NoConvergence,
        QmargError::Io(_) => QmargStatus::Io,
        _ => QmargStatus::InvalidArgument,
    }
}

fn fail(status: QmargStatus, msg: &str) -> QmargStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), QmargStatus>>(f: F) -> QmargStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QmargStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(QmargStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: qmarg::Result<T>) -> Result<T, QmargStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), QmargStatus> {
    if p.is_null() {
        Err(fail(QmargStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], QmargStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, QmargStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p).to_str().map_err(|_| fail(QmargStatus::InvalidArgument, &format!("{what} is not UTF-8")))
}

/// Message of the last failing call on this thread; empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn qmarg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qmarg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON state document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qmarg_state_from_json(json: *const c_char, out: *mut *mut QmargState) -> QmargStatus {
    guard(|| {
        non_null(out, "out")?;
        let state = lib(read_state(text(json, "json")?))?;
        *out = Box::into_raw(Box::new(QmargState { inner: state }));
        Ok(())
    })
}

/// Builds a state from `len` = C(d, n) unit-norm amplitudes in basis order.
///
/// # Safety
/// `re` and `im` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmarg_state_from_amplitudes(
    n: usize,
    d: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut QmargState,
) -> QmargStatus {
    guard(|| {
        non_null(out, "out")?;
        let space = lib(OrbitalSpace::new(n, d))?;
        let (re, im) = (slice(re, len, "re")?, slice(im, len, "im")?);
        let amps = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        let state = lib(FermionState::new(space, amps))?;
        *out = Box::into_raw(Box::new(QmargState { inner: state }));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle from a `qmarg_state_*` constructor,
/// not freed before.
#[no_mangle]
pub unsafe extern "C" fn qmarg_state_free(state: *mut QmargState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `n` and `d` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmarg_state_dims(state: *const QmargState, n: *mut usize, d: *mut usize) -> QmargStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(n, "n")?;
        non_null(d, "d")?;
        let space = (*state).inner.space();
        *n = space.n();
        *d = space.d();
        Ok(())
    })
}

/// Writes the d natural occupation numbers, decreasing, into `out`.
///
/// # Safety
/// `state` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qmarg_state_occupations(state: *const QmargState, out: *mut f64, len: usize) -> QmargStatus {
    guard(|| {
        non_null(state, "state")?;
        let lam = lib(occupations_of(&(*state).inner))?;
        write_out(lam.as_slice(), out, len)
    })
}

unsafe fn write_out(values: &[f64], out: *mut f64, len: usize) -> Result<(), QmargStatus> {
    if len < values.len() {
        return Err(fail(QmargStatus::BufferTooSmall, &format!("need {} values, buffer holds {len}", values.len())));
    }
    non_null(out, "out")?;
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmarg_catalog_new(n: usize, d: usize, out: *mut *mut QmargCatalog) -> QmargStatus {
    guard(|| {
        non_null(out, "out")?;
        let cat = lib(catalog(n, d))?;
        *out = Box::into_raw(Box::new(QmargCatalog { inner: cat }));
        Ok(())
    })
}

/// # Safety
/// `cat` must be null or a live handle from `qmarg_catalog_new`.
#[no_mangle]
pub unsafe extern "C" fn qmarg_catalog_free(cat: *mut QmargCatalog) {
    if !cat.is_null() {
        drop(Box::from_raw(cat));
    }
}

/// Number of constraints, or 0 for a null handle.
///
/// # Safety
/// `cat` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qmarg_catalog_len(cat: *const QmargCatalog) -> usize {
    if cat.is_null() {
        0
    } else {
        (*cat).inner.constraints.len()
    }
}

/// Value of the constraint `label` at the occupation vector `lambda`.
///
/// # Safety
/// `cat` must be a live handle, `label` NUL-terminated, `lambda` must hold
/// `len` doubles and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmarg_catalog_evaluate(
    cat: *const QmargCatalog,
    label: *const c_char,
    lambda: *const f64,
    len: usize,
    value: *mut f64,
) -> QmargStatus {
    guard(|| {
        non_null(cat, "catalog")?;
        non_null(value, "value")?;
        let label = text(label, "label")?;
        let c = (*cat)
            .inner
            .get(label)
            .ok_or_else(|| fail(QmargStatus::InvalidArgument, &format!("no constraint labelled '{label}'")))?;
        *value = lib(evaluate(c, slice(lambda, len, "lambda")?))?;
        Ok(())
    })
}

/// Smallest inequality value D over the catalog; `pinned` is set to 1 when
/// some inequality is saturated within `pin_tol`.
///
/// # Safety
/// `cat` must be a live handle, `lambda` must hold `len` doubles, and `d`
/// and `pinned` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmarg_min_inequality(
    cat: *const QmargCatalog,
    lambda: *const f64,
    len: usize,
    pin_tol: f64,
    d: *mut f64,
    pinned: *mut i32,
) -> QmargStatus {
    guard(|| {
        non_null(cat, "catalog")?;
        non_null(d, "d")?;
        non_null(pinned, "pinned")?;
        let lam = lib(NonVector::from_unsorted(slice(lambda, len, "lambda")?.to_vec()))?;
        let report = lib(pinning_report(&lam, &(*cat).inner, pin_tol))?;
        *d = report.min_inequality_value;
        *pinned = i32::from(report.is_pinned());
        Ok(())
    })
}

/// Borland-Dennis value D(kappa) for three-fermion harmonium over
/// `basis` Hermite functions, with its rounding-error estimate.
/// `floor` is set to 1 when D is not resolved above that estimate.
///
/// # Safety
/// `d`, `error` and `floor` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmarg_harmonium_d(
    kappa: f64,
    basis: usize,
    d: *mut f64,
    error: *mut f64,
    floor: *mut i32,
) -> QmargStatus {
    guard(|| {
        non_null(d, "d")?;
        non_null(error, "error")?;
        non_null(floor, "floor")?;
        let p = lib(QuadratureSpec::new(3, basis).and_then(|q| quasipinning_point(kappa, &q)))?;
        *d = p.d;
        *error = p.d_error;
        *floor = i32::from(p.precision_floor);
        Ok(())
    })
}
