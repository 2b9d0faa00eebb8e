//! C ABI over `gtscheme`.
//!
//! Every fallible call returns a [`GtsStatus`]; on failure the message is
//! available from [`gts_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function. Items are 1-based, as in the
//! text formats.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use gtscheme::format;
use gtscheme::gvcode::{construct_code, verify_distance, ConstructOptions, GeneratorMatrix, Mode};
use gtscheme::params::{derive_params, CodeParams, Rational};
use gtscheme::scheme::{self, BuildOptions, DefectiveSet, OutcomeVector};
use gtscheme::ssf::{verify_ssf, Scheme, SsfVerdict};
use gtscheme::GtError;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GtsStatus {
    Ok = 0,
    Usage = 1,
    Domain = 2,
    NoPrime = 3,
    Unverifiable = 4,
    Inconsistent = 5,
    Verification = 6,
    Parse = 7,
    Io = 8,
    NullPointer = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GtsMode {
    Fast = 0,
    Exact = 1,
}

impl From<GtsMode> for Mode {
    fn from(m: GtsMode) -> Mode {
        match m {
            GtsMode::Fast => Mode::Fast,
            GtsMode::Exact => Mode::Exact,
        }
    }
}

/// Derived parameters. `q`, `k`, `m` and `delta_*` are zero when `trivial`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GtsParams {
    pub trivial: bool,
    pub q: u32,
    pub k: u32,
    pub m: u32,
    pub delta_num: u64,
    pub delta_den: u64,
    pub t_bound: u64,
}

/// Opaque test family.
pub struct GtsScheme(Scheme);

/// Opaque generator matrix.
pub struct GtsCode(GeneratorMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &GtError) -> GtsStatus {
    match e {
        GtError::Usage(_) => GtsStatus::Usage,
        GtError::Domain(_) => GtsStatus::Domain,
        GtError::NoPrime { .. } => GtsStatus::NoPrime,
        GtError::Unverifiable { .. } => GtsStatus::Unverifiable,
        GtError::Inconsistent(_) => GtsStatus::Inconsistent,
        GtError::Verification(_) => GtsStatus::Verification,
        GtError::Parse { .. } => GtsStatus::Parse,
        GtError::Io(_) => GtsStatus::Io,
    }
}

enum Fail {
    Gt(GtError),
    Null(&'static str),
    Small { need: usize },
}

impl From<GtError> for Fail {
    fn from(e: GtError) -> Self {
        Fail::Gt(e)
    }
}

// runs `f`, turning errors and panics into a status plus thread-local message
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GtsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GtsStatus::Ok,
        Ok(Err(Fail::Gt(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            GtsStatus::NullPointer
        }
        Ok(Err(Fail::Small { need })) => {
            set_error(format!("buffer too small, {need} elements needed"));
            GtsStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            GtsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| GtError::Usage("path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

// copies `src` into a caller buffer of capacity `cap`, always reporting the length
unsafe fn fill<T: Copy>(src: &[T], buf: *mut T, cap: usize, len: *mut usize) -> Result<(), Fail> {
    *out(len, "len")? = src.len();
    if src.len() > cap {
        return Err(Fail::Small { need: src.len() });
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(Fail::Null("buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

fn read_file(p: &PathBuf) -> Result<String, GtError> {
    std::fs::read_to_string(p).map_err(|e| GtError::Io(format!("{}: {e}", p.display())))
}

fn write_file(p: &PathBuf, text: &str) -> Result<(), GtError> {
    std::fs::write(p, text).map_err(|e| GtError::Io(format!("{}: {e}", p.display())))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parameters for an `(n, r)`-SSF (`r` is the strength).
#[no_mangle]
pub unsafe extern "C" fn gts_derive_params(n: u64, r: u64, params: *mut GtsParams) -> GtsStatus {
    guard(|| {
        let dst = out(params, "params")?;
        let p = derive_params(n, r)?;
        let mut res = GtsParams { trivial: p.trivial(), t_bound: p.t_bound(), ..Default::default() };
        if let Some(c) = p.code {
            res.q = c.q;
            res.k = c.k;
            res.m = c.m;
            res.delta_num = *c.delta.numer();
            res.delta_den = *c.delta.denom();
        }
        *dst = res;
        Ok(())
    })
}

fn build(n: u64, r: u64, gt: bool, mode: GtsMode) -> Result<Box<GtsScheme>, GtError> {
    let opts = BuildOptions {
        code: ConstructOptions { mode: mode.into(), ..Default::default() },
    };
    let c = if gt {
        scheme::build_gt_scheme_with(n, r, &opts)?
    } else {
        scheme::build_scheme_with(n, r, &opts)?
    };
    Ok(Box::new(GtsScheme(c.scheme)))
}

/// Builds an `(n, r)`-SSF. On success `*scheme` owns a new handle.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_build_ssf(
    n: u64,
    r: u64,
    mode: GtsMode,
    scheme: *mut *mut GtsScheme,
) -> GtsStatus {
    guard(|| {
        let dst = out(scheme, "scheme")?;
        *dst = Box::into_raw(build(n, r, false, mode)?);
        Ok(())
    })
}

/// Builds a scheme identifying up to `r` defectives among `n` items.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_build_gt(
    n: u64,
    r: u64,
    mode: GtsMode,
    scheme: *mut *mut GtsScheme,
) -> GtsStatus {
    guard(|| {
        let dst = out(scheme, "scheme")?;
        *dst = Box::into_raw(build(n, r, true, mode)?);
        Ok(())
    })
}

/// Reads a `GTS v1` file.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_read(file: *const c_char, scheme: *mut *mut GtsScheme) -> GtsStatus {
    guard(|| {
        let dst = out(scheme, "scheme")?;
        let s = format::read_scheme(&read_file(&path(file)?)?)?;
        *dst = Box::into_raw(Box::new(GtsScheme(s)));
        Ok(())
    })
}

/// Writes a `GTS v1` file.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_write(scheme: *const GtsScheme, file: *const c_char) -> GtsStatus {
    guard(|| {
        let s = get(scheme, "scheme")?;
        write_file(&path(file)?, &format::write_scheme(&s.0))?;
        Ok(())
    })
}

/// Releases a scheme handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_free(scheme: *mut GtsScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Number of items; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_items(scheme: *const GtsScheme) -> u64 {
    scheme.as_ref().map_or(0, |s| s.0.n())
}

/// SSF strength; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_strength(scheme: *const GtsScheme) -> u64 {
    scheme.as_ref().map_or(0, |s| s.0.strength())
}

/// Number of tests; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_num_tests(scheme: *const GtsScheme) -> usize {
    scheme.as_ref().map_or(0, |s| s.0.num_tests())
}

/// Copies the sorted items of test `index` into `buf`. `*len` receives the
/// test size even when `cap` is too small.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_test(
    scheme: *const GtsScheme,
    index: usize,
    buf: *mut u64,
    cap: usize,
    len: *mut usize,
) -> GtsStatus {
    guard(|| {
        let s = get(scheme, "scheme")?;
        let test = s.0.tests().get(index).ok_or_else(|| {
            GtError::Usage(format!("test {index} out of range, scheme has {}", s.0.num_tests()))
        })?;
        fill(test, buf, cap, len)
    })
}

/// Exhaustively checks the `r`-SSF property. `*valid` is false when a
/// violation is found; the status is `Unverifiable` when over `budget`.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_verify(
    scheme: *const GtsScheme,
    r: u64,
    budget: u64,
    valid: *mut bool,
) -> GtsStatus {
    guard(|| {
        let s = get(scheme, "scheme")?;
        let dst = out(valid, "valid")?;
        match verify_ssf(&s.0, r, budget as u128) {
            SsfVerdict::Valid => *dst = true,
            SsfVerdict::Violation { .. } => *dst = false,
            SsfVerdict::Unverified { required, budget } => {
                *dst = false;
                return Err(GtError::Unverifiable { required, budget }.into());
            }
        }
        Ok(())
    })
}

/// Writes one byte per test (1 positive, 0 negative) for the given
/// defective items into `buf`, which must hold `gts_scheme_num_tests` bytes.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_outcomes(
    scheme: *const GtsScheme,
    items: *const u64,
    count: usize,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> GtsStatus {
    guard(|| {
        let s = get(scheme, "scheme")?;
        let d = DefectiveSet::new(slice(items, count, "items")?.to_vec());
        let o = scheme::outcomes(&s.0, &d)?;
        let bytes: Vec<u8> = o.bits().iter().map(|&b| b as u8).collect();
        fill(&bytes, buf, cap, len)
    })
}

/// Decodes outcome bytes (nonzero = positive) into at most `r` items.
#[no_mangle]
pub unsafe extern "C" fn gts_scheme_decode(
    scheme: *const GtsScheme,
    outcomes: *const u8,
    tests: usize,
    r: u64,
    buf: *mut u64,
    cap: usize,
    len: *mut usize,
) -> GtsStatus {
    guard(|| {
        let s = get(scheme, "scheme")?;
        let bits = slice(outcomes, tests, "outcomes")?.iter().map(|&b| b != 0).collect();
        let d = scheme::decode(&s.0, &OutcomeVector::new(bits), r)?;
        fill(d.items(), buf, cap, len)
    })
}

/// Constructs a code with relative distance `delta_num / delta_den`,
/// verifying its distance when `q^k` is at most 2^24.
#[no_mangle]
pub unsafe extern "C" fn gts_code_build(
    q: u32,
    m: u32,
    k: u32,
    delta_num: u64,
    delta_den: u64,
    mode: GtsMode,
    code: *mut *mut GtsCode,
) -> GtsStatus {
    guard(|| {
        let dst = out(code, "code")?;
        if delta_den == 0 {
            return Err(GtError::Usage("delta denominator is zero".into()).into());
        }
        let p = CodeParams::new(q, m, k, Rational::new(delta_num, delta_den))?;
        let built = construct_code(&p, &ConstructOptions { mode: mode.into(), ..Default::default() })?;
        *dst = Box::into_raw(Box::new(GtsCode(built.matrix)));
        Ok(())
    })
}

/// Reads a `GVC v1` file.
#[no_mangle]
pub unsafe extern "C" fn gts_code_read(file: *const c_char, code: *mut *mut GtsCode) -> GtsStatus {
    guard(|| {
        let dst = out(code, "code")?;
        let g = format::read_code(&read_file(&path(file)?)?)?;
        *dst = Box::into_raw(Box::new(GtsCode(g)));
        Ok(())
    })
}

/// Writes a `GVC v1` file.
#[no_mangle]
pub unsafe extern "C" fn gts_code_write(code: *const GtsCode, file: *const c_char) -> GtsStatus {
    guard(|| {
        let g = get(code, "code")?;
        write_file(&path(file)?, &format::write_code(&g.0))?;
        Ok(())
    })
}

/// Releases a code handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gts_code_free(code: *mut GtsCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Matrix dimensions and field size. Any output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn gts_code_shape(code: *const GtsCode, q: *mut u32, m: *mut u32, k: *mut u32) -> GtsStatus {
    guard(|| {
        let p = get(code, "code")?.0.params();
        for (dst, v) in [(q, p.q), (m, p.m), (k, p.k)] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// Copies the `m * k` entries, row-major, into `buf`.
#[no_mangle]
pub unsafe extern "C" fn gts_code_entries(
    code: *const GtsCode,
    buf: *mut u32,
    cap: usize,
    len: *mut usize,
) -> GtsStatus {
    guard(|| fill(get(code, "code")?.0.raw_entries(), buf, cap, len))
}

/// Minimum distance by enumerating all `q^k` codewords (at most `budget`).
#[no_mangle]
pub unsafe extern "C" fn gts_code_min_distance(code: *const GtsCode, budget: u64, distance: *mut u32) -> GtsStatus {
    guard(|| {
        let g = get(code, "code")?;
        *out(distance, "distance")? = verify_distance(&g.0, budget)?;
        Ok(())
    })
}
