//! C interface to `finsler-core`.
//!
//! Metrics are opaque handles created by [`finsler_metric_new`] and released
//! with [`finsler_metric_free`]. Every fallible call returns a
//! [`FinslerStatus`]; on anything but `FINSLER_STATUS_OK` the message is
//! available from [`finsler_last_error`] on the same thread. Tensor outputs
//! are written row-major into caller buffers of `n * n` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use finsler_core::catalog::{self, sample_points, SamplerConfig};
use finsler_core::geometry::{metric_tensor, FinslerMetric, SamplePoint, TensorBundle};
use finsler_core::report::aggregate;
use finsler_core::suite::{paper_suite, SuiteConfig};
use finsler_core::weyl::{constant_curvature_verdict, recover_kappa, weyl_type, Classification};
use finsler_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinslerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    Argument = 3,
    Domain = 4,
    Degenerate = 5,
    Dimension = 6,
    Parameter = 7,
    Precondition = 8,
    Sampling = 9,
    Integrity = 10,
    UnknownMetric = 11,
    Internal = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinslerVerdictKind {
    Constant = 0,
    ScalarNonconstant = 1,
    NotScalar = 2,
}

/// Opaque metric handle.
pub struct FinslerMetricHandle {
    metric: Arc<dyn FinslerMetric>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> FinslerStatus {
    match e {
        Error::Argument(_) => FinslerStatus::Argument,
        Error::Domain { .. } | Error::Jet(_) => FinslerStatus::Domain,
        Error::Degenerate { .. } => FinslerStatus::Degenerate,
        Error::Dimension(_) => FinslerStatus::Dimension,
        Error::Parameter(_) => FinslerStatus::Parameter,
        Error::Precondition(_) => FinslerStatus::Precondition,
        Error::Sampling(_) => FinslerStatus::Sampling,
        Error::Integrity(_) => FinslerStatus::Integrity,
        Error::UnknownMetric(_) => FinslerStatus::UnknownMetric,
        Error::Io(_) | Error::Json(_) => FinslerStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Utf8,
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FinslerStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FinslerStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FinslerStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            FinslerStatus::InvalidString
        }
        Ok(Err(Failure::Engine(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside finsler-core".into());
            FinslerStatus::Panic
        }
    }
}

unsafe fn handle<'a>(h: *const FinslerMetricHandle) -> Result<&'a FinslerMetricHandle, Failure> {
    h.as_ref().ok_or(Failure::Null("metric handle"))
}

unsafe fn point(h: &FinslerMetricHandle, x: *const f64, y: *const f64) -> Result<SamplePoint, Failure> {
    if x.is_null() || y.is_null() {
        return Err(Failure::Null("point coordinates"));
    }
    let n = h.metric.dim();
    Ok(SamplePoint::new(
        slice::from_raw_parts(x, n).to_vec(),
        slice::from_raw_parts(y, n).to_vec(),
    )?)
}

unsafe fn out_buf<'a>(out: *mut f64, len: usize) -> Result<&'a mut [f64], Failure> {
    if out.is_null() {
        return Err(Failure::Null("output buffer"));
    }
    Ok(slice::from_raw_parts_mut(out, len))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn finsler_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build catalog metric `id` in dimension `dim`.
///
/// # Safety
/// `id` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_new(
    id: *const c_char,
    dim: usize,
    out: *mut *mut FinslerMetricHandle,
) -> FinslerStatus {
    guard(|| {
        if id.is_null() || out.is_null() {
            return Err(Failure::Null("id or out"));
        }
        let id = CStr::from_ptr(id).to_str().map_err(|_| Failure::Utf8)?;
        let metric = catalog::build(id, dim)?;
        *out = Box::into_raw(Box::new(FinslerMetricHandle { metric }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`finsler_metric_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_free(h: *mut FinslerMetricHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the metric, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_dim(h: *const FinslerMetricHandle) -> usize {
    h.as_ref().map_or(0, |h| h.metric.dim())
}

/// `F(x, y)`.
///
/// # Safety
/// `x` and `y` hold `n` doubles, `out` one.
#[no_mangle]
pub unsafe extern "C" fn finsler_value(
    h: *const FinslerMetricHandle,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let h = handle(h)?;
        let p = point(h, x, y)?;
        out_buf(out, 1)?[0] = h.metric.jet(&p, 0)?.value();
        Ok(())
    })
}

/// Metric tensor `g_ij` into `out[n * n]`.
///
/// # Safety
/// `x` and `y` hold `n` doubles, `out` `n * n`.
#[no_mangle]
pub unsafe extern "C" fn finsler_metric_tensor(
    h: *const FinslerMetricHandle,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let h = handle(h)?;
        let p = point(h, x, y)?;
        let g = metric_tensor(h.metric.as_ref(), &p)?;
        write_matrix(out_buf(out, p.dim() * p.dim())?, p.dim(), |i, j| g[(i, j)]);
        Ok(())
    })
}

fn write_matrix(out: &mut [f64], n: usize, f: impl Fn(usize, usize) -> f64) {
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = f(i, j);
        }
    }
}

/// Spray coefficients `Gⁱ` into `spray[n]`, connection `Nⁱⱼ` and Jacobi
/// endomorphism `Rⁱⱼ` into `n * n` buffers. Any output may be null.
///
/// # Safety
/// `x` and `y` hold `n` doubles; non-null outputs are large enough.
#[no_mangle]
pub unsafe extern "C" fn finsler_spray_tensors(
    h: *const FinslerMetricHandle,
    x: *const f64,
    y: *const f64,
    spray: *mut f64,
    connection: *mut f64,
    jacobi: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let h = handle(h)?;
        let p = point(h, x, y)?;
        let n = p.dim();
        let b = TensorBundle::from_metric(&h.metric, &p, 1)?;
        if !spray.is_null() {
            out_buf(spray, n)?.copy_from_slice(b.spray_values().as_slice());
        }
        if !connection.is_null() {
            let m = b.connection_matrix();
            write_matrix(out_buf(connection, n * n)?, n, |i, j| m[(i, j)]);
        }
        if !jacobi.is_null() {
            let m = b.jacobi_matrix();
            write_matrix(out_buf(jacobi, n * n)?, n, |i, j| m[(i, j)]);
        }
        Ok(())
    })
}

/// Weyl-type tensor `W₀ⁱⱼ` into `w0[n * n]` and flag curvature `κ` into
/// `kappa`. Either output may be null. Needs `n >= 3`.
///
/// # Safety
/// `x` and `y` hold `n` doubles; non-null outputs are large enough.
#[no_mangle]
pub unsafe extern "C" fn finsler_weyl(
    h: *const FinslerMetricHandle,
    x: *const f64,
    y: *const f64,
    w0: *mut f64,
    kappa: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let h = handle(h)?;
        let p = point(h, x, y)?;
        let n = p.dim();
        let b = TensorBundle::from_metric(&h.metric, &p, 1)?;
        let w = weyl_type(&b)?.w0;
        if !w0.is_null() {
            write_matrix(out_buf(w0, n * n)?, n, |i, j| w[(i, j)]);
        }
        if !kappa.is_null() {
            let f = b.f_value().expect("metric bundle");
            out_buf(kappa, 1)?[0] = recover_kappa(&b, f)?;
        }
        Ok(())
    })
}

/// Constant-curvature verdict over `samples` seeded points. `kappa` is set
/// only for a constant verdict and is NaN otherwise.
///
/// # Safety
/// `kind` and `kappa` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn finsler_verdict(
    h: *const FinslerMetricHandle,
    seed: u64,
    samples: usize,
    tol: f64,
    kind: *mut FinslerVerdictKind,
    kappa: *mut f64,
) -> FinslerStatus {
    guard(|| {
        let h = handle(h)?;
        if kind.is_null() || kappa.is_null() {
            return Err(Failure::Null("kind or kappa"));
        }
        let pts = sample_points(h.metric.as_ref(), &SamplerConfig::with_count(seed, samples))?;
        let v = constant_curvature_verdict(&h.metric, &pts, tol)?;
        let (k, value) = match v.classification {
            Classification::Constant { kappa } => (FinslerVerdictKind::Constant, kappa),
            Classification::ScalarNonconstant => (FinslerVerdictKind::ScalarNonconstant, f64::NAN),
            Classification::NotScalar => (FinslerVerdictKind::NotScalar, f64::NAN),
        };
        *kind = k;
        *kappa = value;
        Ok(())
    })
}

/// Run every reproduction criterion and return the report as JSON in
/// `*json`, to be released with [`finsler_string_free`]. `*passed` is set
/// to 1 when every check passed and 0 otherwise.
///
/// # Safety
/// `json` and `passed` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn finsler_paper_suite_json(
    dim: usize,
    seed: u64,
    samples: usize,
    json: *mut *mut c_char,
    passed: *mut i32,
) -> FinslerStatus {
    guard(|| {
        if json.is_null() || passed.is_null() {
            return Err(Failure::Null("json or passed"));
        }
        let outcomes = paper_suite(&SuiteConfig { dim, seed, samples })?;
        let report = aggregate(outcomes.into_iter().flat_map(|o| o.checks).collect(), dim)?;
        let text = CString::new(report.to_json()?).expect("JSON has no nul bytes");
        *passed = i32::from(report.overall);
        *json = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn finsler_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
