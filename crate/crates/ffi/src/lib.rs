//! C ABI over `psd_approx`.
//!
//! A [`PsdSpec`] is an opaque handle holding the summands of `S_n`. Every
//! fallible call returns a [`PsdStatus`] and writes its result through an out
//! pointer; on failure the message is available from
//! [`psd_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use psd_approx::nb::{self, FitRequest};
use psd_approx::oracle::{self, Reference, DEFAULT_SUPPORT_CAP};
use psd_approx::poisson::{self, StepConstant};
use psd_approx::scenario::{Format, Scenario};
use psd_approx::table::{emit, run_scenario, RunOptions};
use psd_approx::{ConvolutionSpec, Error, FitMode, NbParams, PowerSeriesFamily, PsdInstance};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Convergence = 4,
    Degenerate = 5,
    Truncation = 6,
    EmptySpec = 7,
    Infeasible = 8,
    UnsupportedClosedForm = 9,
    SupportCap = 10,
    Parse = 11,
    Io = 12,
    Panic = 13,
}

/// Built-in distribution families. The parameter passed alongside is the
/// natural one: lambda, p, q, or theta respectively.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdFamily {
    Poisson = 0,
    Bernoulli = 1,
    Geometric = 2,
    LogarithmicShifted = 3,
}

fn family_from_code(code: u32) -> Result<PowerSeriesFamily, Error> {
    Ok(match code {
        c if c == PsdFamily::Poisson as u32 => PowerSeriesFamily::Poisson,
        c if c == PsdFamily::Bernoulli as u32 => PowerSeriesFamily::Bernoulli,
        c if c == PsdFamily::Geometric as u32 => PowerSeriesFamily::Geometric,
        c if c == PsdFamily::LogarithmicShifted as u32 => PowerSeriesFamily::LogarithmicShifted,
        c => return Err(Error::InvalidArgument(format!("unknown family code {c}"))),
    })
}

/// Opaque list of independent summands.
pub struct PsdSpec {
    instances: Vec<PsdInstance>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PsdStatus {
    match e {
        Error::Domain { .. } => PsdStatus::Domain,
        Error::Convergence { .. } => PsdStatus::Convergence,
        Error::Degenerate { .. } => PsdStatus::Degenerate,
        Error::Truncation { .. } => PsdStatus::Truncation,
        Error::EmptySpec => PsdStatus::EmptySpec,
        Error::Infeasible(_) => PsdStatus::Infeasible,
        Error::UnsupportedClosedForm(_) => PsdStatus::UnsupportedClosedForm,
        Error::SupportCap { .. } => PsdStatus::SupportCap,
        Error::Parse { .. } => PsdStatus::Parse,
        Error::InvalidArgument(_) => PsdStatus::InvalidArgument,
        Error::Io(_) => PsdStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PsdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsdStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            PsdStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            PsdStatus::Panic
        }
    }
}

unsafe fn spec_ref<'a>(spec: *const PsdSpec) -> Result<&'a PsdSpec, Failure> {
    spec.as_ref().ok_or(Failure::Null("spec"))
}

unsafe fn convolution(spec: *const PsdSpec) -> Result<ConvolutionSpec, Failure> {
    Ok(ConvolutionSpec::new(spec_ref(spec)?.instances.clone())?)
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Creates an empty spec. Free it with [`psd_spec_free`].
#[no_mangle]
pub extern "C" fn psd_spec_new() -> *mut PsdSpec {
    Box::into_raw(Box::new(PsdSpec {
        instances: Vec::new(),
    }))
}

/// # Safety
/// `spec` must come from [`psd_spec_new`] and not be used afterwards. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn psd_spec_free(spec: *mut PsdSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Appends one summand. `family` is a [`PsdFamily`] value.
///
/// # Safety
/// `spec` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn psd_spec_push(spec: *mut PsdSpec, family: u32, param: f64) -> PsdStatus {
    guard(|| {
        let spec = spec.as_mut().ok_or(Failure::Null("spec"))?;
        spec.instances
            .push(PsdInstance::from_param(family_from_code(family)?, param)?);
        Ok(())
    })
}

/// Number of summands, or 0 for a null handle.
///
/// # Safety
/// `spec` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn psd_spec_len(spec: *const PsdSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.instances.len())
}

/// Mean and variance of `S_n`.
///
/// # Safety
/// `spec` must be a live handle; out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_spec_moments(
    spec: *const PsdSpec,
    mean: *mut f64,
    variance: *mut f64,
) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        write(mean, s.mean())?;
        write(variance, s.variance())
    })
}

/// Total variation bound to Poisson(`lambda`). `barbour_hall` selects the
/// `(1 - e^-lambda)/lambda` step constant instead of `1/max(1, lambda)`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_poisson_bound(
    spec: *const PsdSpec,
    lambda: f64,
    eps: f64,
    barbour_hall: bool,
    out: *mut f64,
) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        let constant = if barbour_hall {
            StepConstant::BarbourHall
        } else {
            StepConstant::Sharpened
        };
        write(
            out,
            poisson::poisson_bound_general(&s, lambda, eps, constant)?.value,
        )
    })
}

/// Poisson bound at `lambda = E S_n`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_poisson_bound_matched(
    spec: *const PsdSpec,
    eps: f64,
    out: *mut f64,
) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        write(out, poisson::poisson_bound_matched(&s, eps)?.value)
    })
}

/// Truncation-free Poisson bound built from `a_0` and `max_i (h'^2 + h'' h)`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_poisson_bound_crude(
    spec: *const PsdSpec,
    lambda: f64,
    out: *mut f64,
) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        write(out, poisson::poisson_bound_crude(&s, lambda)?.value)
    })
}

/// Fits NB(r, p). With `two_moment` false the mean is matched for the given
/// `r`; otherwise `r` is ignored and mean and variance are both matched.
///
/// # Safety
/// `spec` must be a live handle; out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_nb_fit(
    spec: *const PsdSpec,
    two_moment: bool,
    r: f64,
    out_r: *mut f64,
    out_p: *mut f64,
) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        let request = if two_moment {
            FitRequest::TwoMoment
        } else {
            FitRequest::OneMoment { r }
        };
        let params = nb::fit_params(&s, request)?;
        write(out_r, params.r())?;
        write(out_p, params.p())
    })
}

/// NB bound with one moment matched at the given `r`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_nb_bound_one(
    spec: *const PsdSpec,
    r: f64,
    eps: f64,
    out: *mut f64,
) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        let params = nb::fit_params(&s, FitRequest::OneMoment { r })?;
        write(out, nb::nb_bound_one(&s, &params, eps)?.value)
    })
}

/// NB bound with mean and variance matched. Fails with `Infeasible` when
/// the variance does not exceed the mean.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_nb_bound_two(
    spec: *const PsdSpec,
    eps: f64,
    out: *mut f64,
) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        let params = nb::fit_params(&s, FitRequest::TwoMoment)?;
        let tau = nb::tau_upper(&s, eps)?;
        write(out, nb::nb_bound_two(&s, &params, &tau, eps)?.value)
    })
}

/// Certified upper bound on the smoothing constant used by the two-moment
/// bound.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_tau_upper(spec: *const PsdSpec, eps: f64, out: *mut f64) -> PsdStatus {
    guard(|| {
        let s = convolution(spec)?;
        write(out, nb::tau_upper(&s, eps)?.tau_upper)
    })
}

unsafe fn oracle_tv(
    spec: *const PsdSpec,
    reference: Reference,
    eps: f64,
    value: *mut f64,
    error_bar: *mut f64,
) -> Result<(), Failure> {
    let s = convolution(spec)?;
    let exact = oracle::spec_pmf(&s, eps, DEFAULT_SUPPORT_CAP)?;
    let tv = oracle::tv_distance(&exact, &oracle::reference_pmf(&reference, eps)?);
    write(value, tv.value)?;
    write(error_bar, tv.error_bar)
}

/// Exact total variation distance from `S_n` to Poisson(`lambda`); the true
/// value lies within `value ± error_bar`.
///
/// # Safety
/// `spec` must be a live handle; out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_oracle_tv_poisson(
    spec: *const PsdSpec,
    lambda: f64,
    eps: f64,
    value: *mut f64,
    error_bar: *mut f64,
) -> PsdStatus {
    guard(|| oracle_tv(spec, Reference::Poisson { lambda }, eps, value, error_bar))
}

/// Exact total variation distance from `S_n` to NB(`r`, `p`).
///
/// # Safety
/// `spec` must be a live handle; out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_oracle_tv_nb(
    spec: *const PsdSpec,
    r: f64,
    p: f64,
    eps: f64,
    value: *mut f64,
    error_bar: *mut f64,
) -> PsdStatus {
    guard(|| {
        let params = NbParams::new(r, p, FitMode::OneMoment)?;
        oracle_tv(
            spec,
            Reference::NegativeBinomial(params),
            eps,
            value,
            error_bar,
        )
    })
}

/// Runs scenario text and returns the rendered table in `out`, to be freed
/// with [`psd_string_free`]. `markdown` selects the output format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn psd_run_scenario(
    text: *const c_char,
    markdown: bool,
    certify: bool,
    eps: f64,
    out: *mut *mut c_char,
) -> PsdStatus {
    guard(|| {
        if text.is_null() {
            return Err(Failure::Null("scenario text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Error::InvalidArgument("scenario text is not UTF-8".into()))?;
        let scenario = Scenario::parse(text)?;
        let opts = RunOptions {
            eps,
            certify,
            ..RunOptions::default()
        };
        let table = run_scenario(&scenario, &opts)?;
        let format = if markdown {
            Format::Markdown
        } else {
            Format::Csv
        };
        let rendered = CString::new(emit(&table, format))
            .map_err(|_| Error::InvalidArgument("output contains NUL".into()))?;
        write(out, rendered.into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn psd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn psd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
