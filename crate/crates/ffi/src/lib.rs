//! C ABI over `grading_lab`.
//!
//! Every fallible function returns a [`GlStatus`]; outputs go through pointer arguments
//! and are written only on `GL_STATUS_OK`. The message of the most recent failure on the
//! calling thread is available from [`gl_last_error`]. Handles are opaque and owned by
//! the caller, who releases them with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use grading_lab::dense::{op_norm, realize, ChainSpec};
use grading_lab::dressing::{dressed_matrix_unit, dressed_weyl, exchange_exponent};
use grading_lab::dynamics::{build_hamiltonian, commutator_decay, QuadraticModel};
use grading_lab::lab::{cmd_block, cmd_decay, cmd_evolve, cmd_verify, ExperimentConfig, RunOptions};
use grading_lab::one_particle::Hopping;
use grading_lab::states::trace_state;
use grading_lab::{AlgebraElement, GradingParams, LabError, WeylMonomial, C64};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidDimension = 4,
    IndexOutOfRange = 5,
    SiteOutsideChain = 6,
    CapExceeded = 7,
    NotHermitian = 8,
    GridError = 9,
    BlockMismatch = 10,
    SupportTooLarge = 11,
    Numerical = 12,
    ConfigError = 13,
    Panic = 14,
}

impl From<&LabError> for GlStatus {
    fn from(e: &LabError) -> Self {
        match e {
            LabError::DimensionMismatch { .. } => GlStatus::DimensionMismatch,
            LabError::InvalidDimension(_) => GlStatus::InvalidDimension,
            LabError::IndexOutOfRange { .. } => GlStatus::IndexOutOfRange,
            LabError::SiteOutsideChain { .. } => GlStatus::SiteOutsideChain,
            LabError::CapExceeded { .. } => GlStatus::CapExceeded,
            LabError::NotHermitian { .. } => GlStatus::NotHermitian,
            LabError::GridTooSmall { .. } | LabError::GridNotDivisible { .. } => GlStatus::GridError,
            LabError::BlockMismatch { .. } => GlStatus::BlockMismatch,
            LabError::SupportTooLarge { .. } => GlStatus::SupportTooLarge,
            LabError::InvalidArgument(_) => GlStatus::InvalidArgument,
            LabError::Numerical(_) => GlStatus::Numerical,
        }
    }
}

/// Subcommands reachable through [`gl_run_command`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlCommand {
    Verify = 0,
    Evolve = 1,
    Decay = 2,
    Block = 3,
}

/// Element of the Weyl algebra (finite sum of phased monomials).
pub struct GlElement(AlgebraElement);

/// Quadratic gauge-invariant model on a finite chain, with its dense realization.
pub struct GlModel(QuadraticModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: GlStatus, msg: impl Into<String>) -> GlStatus {
    set_error(msg);
    status
}

fn guard(body: impl FnOnce() -> Result<(), GlStatus>) -> GlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            GlStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(GlStatus::Panic, "internal panic"),
    }
}

fn lab<T>(r: grading_lab::Result<T>) -> Result<T, GlStatus> {
    r.map_err(|e| fail((&e).into(), e.to_string()))
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, GlStatus> {
    p.as_ref().ok_or_else(|| fail(GlStatus::NullPointer, "null handle"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), GlStatus> {
    if out.is_null() {
        return Err(fail(GlStatus::NullPointer, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn setup(d: u32, j_plus: i64, j_minus: i64, len: usize) -> Result<(GradingParams, ChainSpec), GlStatus> {
    let p = lab(GradingParams::new(d, j_plus, j_minus))?;
    let chain = lab(ChainSpec::with_cap(d, len, usize::MAX))?;
    Ok((p, chain))
}

/// Message for the last failing call on this thread; empty after a success. The
/// pointer stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn gl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Bare Weyl operator `W_site(k, l)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn gl_element_weyl(d: u32, site: i64, k: i64, l: i64, out: *mut *mut GlElement) -> GlStatus {
    guard(|| {
        let m = lab(WeylMonomial::single(d, site, k, l))?;
        put(out, boxed(GlElement(AlgebraElement::from_monomial(&m))))
    })
}

/// Dressed Weyl operator `W̄_x(0, s)` on a chain of `len` sites.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn gl_element_dressed_weyl(
    d: u32,
    j_plus: i64,
    j_minus: i64,
    len: usize,
    x: i64,
    s: i64,
    out: *mut *mut GlElement,
) -> GlStatus {
    guard(|| {
        let (p, chain) = setup(d, j_plus, j_minus, len)?;
        let m = lab(dressed_weyl(x, s, &p, &chain))?;
        put(out, boxed(GlElement(AlgebraElement::from_monomial(&m))))
    })
}

/// Dressed matrix unit sending level `s` to level `r` at site `x`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn gl_element_dressed_unit(
    d: u32,
    j_plus: i64,
    j_minus: i64,
    len: usize,
    x: i64,
    r: u32,
    s: u32,
    out: *mut *mut GlElement,
) -> GlStatus {
    guard(|| {
        let (p, chain) = setup(d, j_plus, j_minus, len)?;
        let u = lab(dressed_matrix_unit(x, r, s, &p, &chain))?;
        put(out, boxed(GlElement(u)))
    })
}

/// `a · b`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_element_mul(a: *const GlElement, b: *const GlElement, out: *mut *mut GlElement) -> GlStatus {
    guard(|| {
        let v = lab(get(a)?.0.mul(&get(b)?.0))?;
        put(out, boxed(GlElement(v)))
    })
}

/// `a + (re + i·im) · b`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_element_add_scaled(
    a: *const GlElement,
    b: *const GlElement,
    re: f64,
    im: f64,
    out: *mut *mut GlElement,
) -> GlStatus {
    guard(|| {
        let v = lab(get(a)?.0.add(&get(b)?.0.scale(C64::new(re, im))))?;
        put(out, boxed(GlElement(v)))
    })
}

/// `a†`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_element_adjoint(a: *const GlElement, out: *mut *mut GlElement) -> GlStatus {
    guard(|| put(out, boxed(GlElement(get(a)?.0.adjoint()))))
}

/// Normalized trace, computed symbolically.
///
/// # Safety
/// `a` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_element_trace(a: *const GlElement, re: *mut f64, im: *mut f64) -> GlStatus {
    guard(|| {
        let t = trace_state(&get(a)?.0);
        put(re, t.re)?;
        put(im, t.im)
    })
}

/// Number of monomials with nonzero coefficient.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_element_term_count(a: *const GlElement, out: *mut usize) -> GlStatus {
    guard(|| put(out, get(a)?.0.terms().count()))
}

/// Largest coefficient modulus, zero for the zero element.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_element_max_abs_coefficient(a: *const GlElement, out: *mut f64) -> GlStatus {
    guard(|| put(out, get(a)?.0.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)))
}

/// Operator norm of the dense realization on a chain of `len` sites, refusing
/// Hilbert spaces larger than `cap`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_element_op_norm(a: *const GlElement, len: usize, cap: usize, out: *mut f64) -> GlStatus {
    guard(|| {
        let a = &get(a)?.0;
        let chain = lab(ChainSpec::with_cap(a.d(), len, cap))?;
        let n = lab(op_norm(&lab(realize(a, &chain))?))?;
        put(out, n)
    })
}

/// Releases an element handle; null is ignored.
///
/// # Safety
/// `a` must be null or a handle obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl_element_free(a: *mut GlElement) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Exponent `c` with `W̄_x W̄_y = e^{2πic/d} W̄_y W̄_x`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_exchange_exponent(
    d: u32,
    j_plus: i64,
    j_minus: i64,
    len: usize,
    x: i64,
    y: i64,
    out: *mut u32,
) -> GlStatus {
    guard(|| {
        let (p, chain) = setup(d, j_plus, j_minus, len)?;
        put(out, lab(exchange_exponent(x, y, &p, &chain))?)
    })
}

/// Builds the quadratic model with hopping `h(offsets[i]) = re[i] + i·im[i]`.
///
/// # Safety
/// `offsets`, `re` and `im` must each point to `count` readable values (or be null
/// with `count == 0`); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_model_new(
    d: u32,
    j_plus: i64,
    j_minus: i64,
    len: usize,
    offsets: *const i64,
    re: *const f64,
    im: *const f64,
    count: usize,
    cap: usize,
    out: *mut *mut GlModel,
) -> GlStatus {
    guard(|| {
        if count > 0 && (offsets.is_null() || re.is_null() || im.is_null()) {
            return Err(fail(GlStatus::NullPointer, "null hopping array"));
        }
        let entries: Vec<(i64, C64)> = (0..count).map(|i| (*offsets.add(i), C64::new(*re.add(i), *im.add(i)))).collect();
        let h = lab(Hopping::new(entries))?;
        let p = lab(GradingParams::new(d, j_plus, j_minus))?;
        let chain = lab(ChainSpec::with_cap(d, len, cap))?;
        put(out, boxed(GlModel(lab(build_hamiltonian(&h, &p, &chain))?)))
    })
}

/// `‖[H, G]‖` with `G` the global gauge unitary.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_model_gauge_defect(m: *const GlModel, out: *mut f64) -> GlStatus {
    guard(|| put(out, lab(get(m)?.0.gauge_defect())?))
}

/// Lieb-Robinson speed used for the light-cone guard.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_model_light_cone_speed(m: *const GlModel, out: *mut f64) -> GlStatus {
    guard(|| put(out, get(m)?.0.light_cone_speed()))
}

/// `‖[τ_t(a), b]‖` under the model dynamics.
///
/// # Safety
/// `m`, `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_model_commutator_norm(
    m: *const GlModel,
    a: *const GlElement,
    b: *const GlElement,
    t: f64,
    out: *mut f64,
) -> GlStatus {
    guard(|| {
        let s = lab(commutator_decay(&get(a)?.0, &get(b)?.0, &get(m)?.0, &[t]))?;
        put(out, s.series[0].1)
    })
}

/// Releases a model handle; null is ignored.
///
/// # Safety
/// `m` must be null or a handle obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl_model_free(m: *mut GlModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs a subcommand on a config text (the CLI's `key = value` format) and returns
/// the CSV as a NUL-terminated string to be released with [`gl_string_free`].
/// `failures` receives the number of assertion-tier failures.
///
/// # Safety
/// `config` must be a NUL-terminated string; `csv` and `failures` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_run_command(
    command: GlCommand,
    config: *const c_char,
    cap: usize,
    seed: u64,
    csv: *mut *mut c_char,
    failures: *mut usize,
) -> GlStatus {
    guard(|| {
        if config.is_null() {
            return Err(fail(GlStatus::NullPointer, "null config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|_| fail(GlStatus::ConfigError, "config is not UTF-8"))?;
        let cfg = ExperimentConfig::parse(text).map_err(|e| fail(GlStatus::ConfigError, e.to_string()))?;
        let opts = RunOptions { cap, seed };
        let outcome = lab(match command {
            GlCommand::Verify => cmd_verify(&cfg, opts),
            GlCommand::Evolve => cmd_evolve(&cfg, opts),
            GlCommand::Decay => cmd_decay(&cfg, opts),
            GlCommand::Block => cmd_block(&cfg, opts),
        })?;
        let s = CString::new(outcome.csv).map_err(|_| fail(GlStatus::Numerical, "CSV contains NUL"))?;
        put(failures, outcome.failures)?;
        put(csv, s.into_raw())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
