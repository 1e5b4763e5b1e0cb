//! C interface to `ptreadout`.
//!
//! Parameters live behind an opaque [`PtreadoutParams`] handle. Every
//! fallible function returns a [`PtreadoutStatus`]; on failure a message is
//! available from [`ptreadout_last_error`] on the same thread until the next
//! call. Panics never cross the boundary.
//!
//! Qubit branches are passed as `PTREADOUT_BRANCH_*` integers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ptreadout::experiment::{load_config, preset, run_scenario, ExperimentError};
use ptreadout::spectrum::{find_ep, spectrum, EpMethod, SpectrumError};
use ptreadout::transmission::{s21_at, TransmissionError};
use ptreadout::{dispersive_shift, Complex64, ParamError, QubitBranch, SystemParams};

pub const PTREADOUT_BRANCH_ABSENT: u32 = 0;
pub const PTREADOUT_BRANCH_GROUND: u32 = 1;
pub const PTREADOUT_BRANCH_EXCITED: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtreadoutStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    NumericalFailure = 4,
    IoError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtreadoutComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for PtreadoutComplex {
    fn from(z: Complex64) -> Self {
        PtreadoutComplex { re: z.re, im: z.im }
    }
}

/// Exceptional point of the qubit-free chain.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtreadoutEp {
    pub coupling: f64,
    /// Number of coalescing eigenvalues.
    pub order: usize,
    pub value: PtreadoutComplex,
    pub gap: f64,
    /// True when the location is exact rather than searched.
    pub analytic: bool,
}

/// Opaque system-parameter handle.
pub struct PtreadoutParams {
    inner: SystemParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(PtreadoutStatus, String);

impl Failure {
    fn new(status: PtreadoutStatus, message: impl Into<String>) -> Self {
        Failure(status, message.into())
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        Failure::new(PtreadoutStatus::InvalidParams, e.to_string())
    }
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Param(p) => p.into(),
            other => Failure::new(PtreadoutStatus::NumericalFailure, other.to_string()),
        }
    }
}

impl From<TransmissionError> for Failure {
    fn from(e: TransmissionError) -> Self {
        match e {
            TransmissionError::Param(p) => p.into(),
            other => Failure::new(PtreadoutStatus::NumericalFailure, other.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let status = match &e {
            ExperimentError::Io { .. } => PtreadoutStatus::IoError,
            ExperimentError::Param(_) => PtreadoutStatus::InvalidParams,
            _ if e.is_validation() => PtreadoutStatus::InvalidArgument,
            _ => PtreadoutStatus::NumericalFailure,
        };
        Failure::new(status, e.to_string())
    }
}

/// Runs `body`, converting failures and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PtreadoutStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            PtreadoutStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PtreadoutStatus::Panic
        }
    }
}

fn branch(code: u32) -> Result<QubitBranch, Failure> {
    match code {
        PTREADOUT_BRANCH_ABSENT => Ok(QubitBranch::Absent),
        PTREADOUT_BRANCH_GROUND => Ok(QubitBranch::Ground),
        PTREADOUT_BRANCH_EXCITED => Ok(QubitBranch::Excited),
        other => Err(Failure::new(
            PtreadoutStatus::InvalidArgument,
            format!("unknown branch code {other}"),
        )),
    }
}

/// # Safety
/// `p` must be null or a live handle from this library.
unsafe fn params_ref<'a>(p: *const PtreadoutParams) -> Result<&'a SystemParams, Failure> {
    p.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Failure::new(PtreadoutStatus::NullPointer, "null parameter handle"))
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::new(PtreadoutStatus::NullPointer, format!("null {what}")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::new(PtreadoutStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Failure::new(PtreadoutStatus::NullPointer, format!("null {what}")))
}

/// Message describing the last failure on this thread (empty after success).
///
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ptreadout_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn ptreadout_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New handle with the default two-cavity parameters (`J_1 = 0`).
#[no_mangle]
pub extern "C" fn ptreadout_params_new() -> *mut PtreadoutParams {
    Box::into_raw(Box::new(PtreadoutParams {
        inner: SystemParams::default(),
    }))
}

/// New handle with a built-in scenario's parameters, or null if unknown.
///
/// # Safety
/// `name` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_params_from_preset(name: *const c_char) -> *mut PtreadoutParams {
    let mut out = std::ptr::null_mut();
    guard(|| {
        let name = text(name, "preset name")?;
        let inner = preset(name)?.config.params;
        out = Box::into_raw(Box::new(PtreadoutParams { inner }));
        Ok(())
    });
    out
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_params_free(p: *mut PtreadoutParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Sets a field by name. `n_cavities` takes an integral value and
/// `lossy_auxiliaries` treats any non-zero value as true. The handle is not
/// validated until it is used.
///
/// # Safety
/// `p` must be a live handle and `field` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_params_set(
    p: *mut PtreadoutParams,
    field: *const c_char,
    value: f64,
) -> PtreadoutStatus {
    guard(|| {
        let handle = out_ptr(p, "parameter handle")?;
        let field = text(field, "field name")?;
        match field {
            "n_cavities" => {
                if value.fract() != 0.0 || !(1.0..=3.0).contains(&value) {
                    return Err(Failure::new(
                        PtreadoutStatus::InvalidArgument,
                        "n_cavities must be 1, 2 or 3",
                    ));
                }
                handle.inner.n_cavities = value as u8;
            }
            "lossy_auxiliaries" => handle.inner.lossy_auxiliaries = value != 0.0,
            _ => {
                if !handle.inner.set(field, value) {
                    return Err(Failure::new(
                        PtreadoutStatus::InvalidArgument,
                        format!("unknown field {field:?}"),
                    ));
                }
            }
        }
        Ok(())
    })
}

/// Reads a field by name into `out`.
///
/// # Safety
/// `p` must be a live handle, `field` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_params_get(
    p: *const PtreadoutParams,
    field: *const c_char,
    out: *mut f64,
) -> PtreadoutStatus {
    guard(|| {
        let params = params_ref(p)?;
        let field = text(field, "field name")?;
        let value = match field {
            "n_cavities" => f64::from(params.n_cavities),
            "lossy_auxiliaries" => f64::from(u8::from(params.lossy_auxiliaries)),
            _ => params
                .get(field)
                .ok_or_else(|| Failure::new(PtreadoutStatus::InvalidArgument, format!("unknown field {field:?}")))?,
        };
        *out_ptr(out, "output")? = value;
        Ok(())
    })
}

/// Complex dispersive shift of the passive cavity for one qubit branch.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_dispersive_shift(
    p: *const PtreadoutParams,
    branch_code: u32,
    out: *mut PtreadoutComplex,
) -> PtreadoutStatus {
    guard(|| {
        let params = params_ref(p)?;
        let shift = dispersive_shift(params, branch(branch_code)?)?;
        *out_ptr(out, "output")? = shift.into();
        Ok(())
    })
}

/// Eigenvalues of the effective Hamiltonian (one per cavity).
///
/// `*written` receives the number of eigenvalues; if `capacity` is too
/// small nothing else is written and `BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `p` must be a live handle, `out` must point to `capacity` writable
/// elements and `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_eigenvalues(
    p: *const PtreadoutParams,
    branch_code: u32,
    out: *mut PtreadoutComplex,
    capacity: usize,
    written: *mut usize,
) -> PtreadoutStatus {
    guard(|| {
        let params = params_ref(p)?;
        let s = spectrum(params, branch(branch_code)?)?;
        let count = out_ptr(written, "count")?;
        *count = s.eigenvalues.len();
        if capacity < s.eigenvalues.len() {
            return Err(Failure::new(
                PtreadoutStatus::BufferTooSmall,
                format!("need room for {} eigenvalues", s.eigenvalues.len()),
            ));
        }
        if out.is_null() {
            return Err(Failure::new(PtreadoutStatus::NullPointer, "null output buffer"));
        }
        let dst = std::slice::from_raw_parts_mut(out, s.eigenvalues.len());
        for (d, z) in dst.iter_mut().zip(&s.eigenvalues) {
            *d = (*z).into();
        }
        Ok(())
    })
}

/// Transmission coefficient at probe detuning `omega`. `near_singular` may
/// be null; otherwise it is set when the denominator is below `1e-9 kappa_a`.
///
/// # Safety
/// `p` must be a live handle, `out` writable, `near_singular` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_s21(
    p: *const PtreadoutParams,
    branch_code: u32,
    omega: f64,
    out: *mut PtreadoutComplex,
    near_singular: *mut bool,
) -> PtreadoutStatus {
    guard(|| {
        let params = params_ref(p)?;
        let point = s21_at(params, branch(branch_code)?, omega)?;
        *out_ptr(out, "output")? = point.value.into();
        if let Some(flag) = near_singular.as_mut() {
            *flag = point.near_singular;
        }
        Ok(())
    })
}

/// Exceptional point of the qubit-free chain along `J_1` (with `J_2 = J_1`
/// for three cavities that start with equal couplings).
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_find_ep(p: *const PtreadoutParams, out: *mut PtreadoutEp) -> PtreadoutStatus {
    guard(|| {
        let params = params_ref(p)?;
        let ep = find_ep(params)?;
        *out_ptr(out, "output")? = PtreadoutEp {
            coupling: ep.coupling,
            order: ep.order,
            value: ep.value.into(),
            gap: ep.gap,
            analytic: ep.method == EpMethod::Analytic,
        };
        Ok(())
    })
}

/// Runs a preset (by name) or a TOML scenario file (by path) and writes its
/// outputs into `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ptreadout_run_scenario(target: *const c_char, out_dir: *const c_char) -> PtreadoutStatus {
    guard(|| {
        let target = text(target, "scenario")?;
        let out_dir = text(out_dir, "output directory")?;
        let path = Path::new(target);
        let cfg = if path.is_file() {
            let body = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(PtreadoutStatus::IoError, format!("{target}: {e}")))?;
            load_config(&body)?
        } else {
            preset(target)?.config
        };
        run_scenario(&cfg, Path::new(out_dir))?;
        Ok(())
    })
}
