//! C ABI over `ncortho`.
//!
//! Objects live behind opaque handles that the caller frees with the matching
//! `*_free` function. Every fallible call returns an [`NcoStatus`]; on failure
//! the message is kept per thread and read back with
//! [`nco_last_error_message`]. Strings returned to the caller are freed with
//! [`nco_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ncortho::jacobi::{self, BlockJacobi, Hamburger};
use ncortho::opeval::{cayley, cayley_inverse};
use ncortho::recurrence::{favard, FavardOptions};
use ncortho::{Error, MomentFunctional, OperatorTuple, OrthoBasis, RecurrenceCoeffs, Word};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcoStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed, incomplete or inconsistent input.
    InvalidInput = 2,
    /// The functional is not strictly positive.
    NotPositive = 3,
    /// A numerical check failed on well-formed input.
    Numerical = 4,
    /// A point is outside the required domain.
    Domain = 5,
    Panic = 6,
}

pub struct NcoFunctional(MomentFunctional);
pub struct NcoBasis(OrthoBasis);
pub struct NcoCoeffs(RecurrenceCoeffs);
pub struct NcoJacobi(Vec<BlockJacobi>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NcoStatus {
    match e {
        Error::NotPositive { .. } => NcoStatus::NotPositive,
        Error::Membership { .. } => NcoStatus::Domain,
        e if e.is_input_error() => NcoStatus::InvalidInput,
        Error::InvalidCoefficients { .. } | Error::IllConditioned { .. } => NcoStatus::InvalidInput,
        _ => NcoStatus::Numerical,
    }
}

enum Fail {
    Null,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NcoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NcoStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            NcoStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            NcoStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidInput("string is not valid UTF-8".into())))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no interior nul").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nco_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nco_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- functionals

/// Parses a moment file.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_functional_from_json(json: *const c_char, out: *mut *mut NcoFunctional) -> NcoStatus {
    guard(|| {
        let f = MomentFunctional::from_json(text(json)?)?;
        put(out, boxed(NcoFunctional(f)))
    })
}

/// # Safety
/// `f` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_functional_to_json(f: *const NcoFunctional, out: *mut *mut c_char) -> NcoStatus {
    guard(|| put(out, c_string(get(f)?.0.to_json()?)))
}

/// # Safety
/// `f` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn nco_functional_free(f: *mut NcoFunctional) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Smallest eigenvalue of the Gram matrix at `level`.
///
/// # Safety
/// `f` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_functional_min_eigenvalue(f: *const NcoFunctional, level: usize, out: *mut f64) -> NcoStatus {
    guard(|| {
        let p = get(f)?.0.strict_positivity(level, 0.0)?;
        put(out, p.min_eigenvalue())
    })
}

// ---- orthonormal bases

/// # Safety
/// `f` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_orthogonalize(f: *const NcoFunctional, level: usize, out: *mut *mut NcoBasis) -> NcoStatus {
    guard(|| {
        let b = ncortho::orthogonalize(&get(f)?.0, level)?;
        put(out, boxed(NcoBasis(b)))
    })
}

/// `max |A G A* − I|` of `basis` under the Gram matrix of `f`.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_basis_orthonormality_residual(
    basis: *const NcoBasis,
    f: *const NcoFunctional,
    out: *mut f64,
) -> NcoStatus {
    guard(|| {
        let basis = &get(basis)?.0;
        let gram = get(f)?.0.gram(basis.level())?;
        put(out, basis.orthonormality_residual(&gram))
    })
}

/// # Safety
/// `basis` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_basis_to_json(basis: *const NcoBasis, out: *mut *mut c_char) -> NcoStatus {
    guard(|| put(out, c_string(get(basis)?.0.to_json()?)))
}

/// # Safety
/// `b` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn nco_basis_free(b: *mut NcoBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

// ---- recurrence coefficients

/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_extract(
    f: *const NcoFunctional,
    basis: *const NcoBasis,
    levels: usize,
    out: *mut *mut NcoCoeffs,
) -> NcoStatus {
    guard(|| {
        let c = ncortho::extract(&get(f)?.0, &get(basis)?.0, levels)?;
        put(out, boxed(NcoCoeffs(c)))
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_coeffs_from_json(json: *const c_char, out: *mut *mut NcoCoeffs) -> NcoStatus {
    guard(|| {
        let c = RecurrenceCoeffs::from_json(text(json)?)?;
        put(out, boxed(NcoCoeffs(c)))
    })
}

/// # Safety
/// `c` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_coeffs_to_json(c: *const NcoCoeffs, out: *mut *mut c_char) -> NcoStatus {
    guard(|| put(out, c_string(get(c)?.0.to_json()?)))
}

/// # Safety
/// `c` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn nco_coeffs_free(c: *mut NcoCoeffs) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Rebuilds the functional (moments up to degree `2·levels`) and, when
/// `out_basis` is non-null, the orthonormal basis.
///
/// # Safety
/// `c` must be a valid handle; `out_functional` must be writable; `out_basis`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn nco_favard(
    c: *const NcoCoeffs,
    levels: usize,
    cond_bound: f64,
    out_functional: *mut *mut NcoFunctional,
    out_basis: *mut *mut NcoBasis,
) -> NcoStatus {
    guard(|| {
        let opts = FavardOptions {
            cond_bound,
            ..FavardOptions::default()
        };
        let r = favard(&get(c)?.0, levels, opts)?;
        if out_functional.is_null() {
            return Err(Fail::Null);
        }
        if !out_basis.is_null() {
            out_basis.write(boxed(NcoBasis(r.basis)));
        }
        out_functional.write(boxed(NcoFunctional(r.functional)));
        Ok(())
    })
}

// ---- Jacobi families

/// # Safety
/// `c` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_jacobi_build(c: *const NcoCoeffs, truncation: usize, out: *mut *mut NcoJacobi) -> NcoStatus {
    guard(|| {
        let family = jacobi::build(&get(c)?.0, truncation)?;
        put(out, boxed(NcoJacobi(family)))
    })
}

/// `<J_σ e_∅, e_∅>` for the word written as in `"1.2.2"` (`"e"` is empty).
/// `truncated` is set when the truncation may affect the value.
///
/// # Safety
/// `j` must be a valid handle; `word` a nul-terminated string; the outputs
/// writable.
#[no_mangle]
pub unsafe extern "C" fn nco_jacobi_moment(
    j: *const NcoJacobi,
    word: *const c_char,
    re: *mut f64,
    im: *mut f64,
    truncated: *mut bool,
) -> NcoStatus {
    guard(|| {
        let family = &get(j)?.0;
        let n = family.len();
        let sigma = Word::parse_for(text(word)?, n)?;
        let m = jacobi::moment(family, &sigma)?;
        put(re, m.value.re)?;
        put(im, m.value.im)?;
        put(truncated, m.truncated)
    })
}

/// # Safety
/// `j` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn nco_jacobi_free(j: *mut NcoJacobi) {
    if !j.is_null() {
        drop(Box::from_raw(j));
    }
}

// ---- moment problem and domains

/// Writes whether the Hankel data come from a positive functional, and the
/// minimum Gram eigenvalue.
///
/// # Safety
/// `f` must be a valid handle; the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn nco_hamburger(
    f: *const NcoFunctional,
    level: usize,
    tol: f64,
    yes: *mut bool,
    min_eigenvalue: *mut f64,
) -> NcoStatus {
    guard(|| {
        let answer = jacobi::hamburger_check(&get(f)?.0, level, tol)?;
        put(min_eigenvalue, answer.min_eigenvalue())?;
        put(yes, matches!(answer, Hamburger::Yes { .. }))
    })
}

/// Cayley transform of a point file (ball to Siegel, or back when `inverse`).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nco_cayley_json(json: *const c_char, inverse: bool, out: *mut *mut c_char) -> NcoStatus {
    guard(|| {
        let t = OperatorTuple::from_json(text(json)?)?;
        let image = if inverse { cayley_inverse(&t)? } else { cayley(&t)? };
        put(out, c_string(image.to_json()?))
    })
}
