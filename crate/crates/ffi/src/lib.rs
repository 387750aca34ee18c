//! C ABI for `dtquant`.
//!
//! Fields cross the boundary as opaque handles created by `dtq_*_new`,
//! `dtq_*_load` or an operation, and released with the matching
//! `dtq_*_free`. Every entry point returns a [`DtqStatus`]; on failure a
//! one-line message is available from [`dtq_last_error`] on the same thread.
//! Output handles are only written on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dtquant::grid::{load_binary, load_scalar, save_binary, save_scalar};
use dtquant::reinit::{dither, error_metrics, reinitialize, DitherParams, ErrorReport, ReinitParams};
use dtquant::{
    binarize, distance_transform, signed_distance_transform, BinaryField, Error, ErrorKind, GridSpec, Metric,
    ScalarField, Target,
};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtqStatus {
    Ok = 0,
    InvalidArgument = 1,
    EmptySet = 2,
    Format = 3,
    Io = 4,
    InvalidInput = 5,
    NumericalFailure = 6,
    EmptyBand = 7,
    NullPointer = 8,
    Panic = 9,
}

impl From<ErrorKind> for DtqStatus {
    fn from(kind: ErrorKind) -> Self {
        match kind {
            ErrorKind::InvalidArgument => DtqStatus::InvalidArgument,
            ErrorKind::EmptySet => DtqStatus::EmptySet,
            ErrorKind::Format => DtqStatus::Format,
            ErrorKind::Io => DtqStatus::Io,
            ErrorKind::InvalidInput => DtqStatus::InvalidInput,
            ErrorKind::NumericalFailure => DtqStatus::NumericalFailure,
            ErrorKind::EmptyBand => DtqStatus::EmptyBand,
        }
    }
}

/// Distance used by the transforms. Chamfer weights are read only for
/// `DTQ_METRIC_KIND_CHAMFER`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtqMetricKind {
    Euclidean = 0,
    Manhattan = 1,
    Chebyshev = 2,
    Chamfer = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtqTarget {
    Foreground = 0,
    Background = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtqMetric {
    pub kind: DtqMetricKind,
    pub axial: f64,
    pub diagonal: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtqReinitParams {
    pub iterations: usize,
    pub cfl: f64,
    pub sign_epsilon: f64,
    pub log_every: usize,
}

/// Error metrics of one field. `e_d` is NaN and `has_e_d` is 0 when no
/// exact gradient was supplied.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtqErrorReport {
    pub iteration: usize,
    pub e_r: f64,
    pub e_mg: f64,
    pub e_d: f64,
    pub has_e_d: u8,
}

impl From<&ErrorReport> for DtqErrorReport {
    fn from(r: &ErrorReport) -> Self {
        DtqErrorReport {
            iteration: r.iteration,
            e_r: r.e_r,
            e_mg: r.e_mg,
            e_d: r.e_d.unwrap_or(f64::NAN),
            has_e_d: u8::from(r.e_d.is_some()),
        }
    }
}

/// Opaque float64 grid field.
pub struct DtqScalarField(ScalarField);

/// Opaque boolean grid field.
pub struct DtqBinaryField(BinaryField);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean: String = msg.chars().map(|c| if c == '\0' || c == '\n' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

struct Failure(DtqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.kind().into(), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DtqStatus::NullPointer, format!("null pointer: {what}"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DtqStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DtqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DtqStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            DtqStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn grid_spec(ndim: usize, dims: *const usize, spacing: f64, origin: *const f64) -> Result<GridSpec, Failure> {
    let dims = slice(dims, ndim, "dims")?;
    let spec = if origin.is_null() {
        GridSpec::new(dims, spacing)?
    } else {
        GridSpec::with_origin(dims, spacing, slice(origin, ndim, "origin")?)?
    };
    Ok(spec)
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid("path is not valid UTF-8"))
}

fn metric(m: &DtqMetric) -> Result<Metric, Failure> {
    Ok(match m.kind {
        DtqMetricKind::Euclidean => Metric::Euclidean,
        DtqMetricKind::Manhattan => Metric::Manhattan,
        DtqMetricKind::Chebyshev => Metric::Chebyshev,
        DtqMetricKind::Chamfer => Metric::chamfer(m.axial, m.diagonal)?,
    })
}

unsafe fn gradient(grad: *const *const DtqScalarField, n: usize) -> Result<Option<Vec<ScalarField>>, Failure> {
    if n == 0 {
        return Ok(None);
    }
    let handles = slice(grad, n, "exact_gradient")?;
    let mut out = Vec::with_capacity(n);
    for &h in handles {
        out.push(as_ref(h, "exact_gradient component")?.0.clone());
    }
    Ok(Some(out))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dtq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dtq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn dtq_metric_euclidean() -> DtqMetric {
    DtqMetric { kind: DtqMetricKind::Euclidean, axial: 1.0, diagonal: std::f64::consts::SQRT_2 }
}

#[no_mangle]
pub extern "C" fn dtq_reinit_params_default() -> DtqReinitParams {
    let p = ReinitParams::default();
    DtqReinitParams { iterations: p.iterations, cfl: p.cfl, sign_epsilon: p.sign_epsilon, log_every: p.log_every }
}

/// Creates a scalar field from `prod(dims)` row-major values. `origin` may
/// be null for the zero origin.
///
/// # Safety
/// `dims` (and `origin` if non-null) must point to `ndim` readable elements
/// and `values` to `prod(dims)`.
#[no_mangle]
pub unsafe extern "C" fn dtq_scalar_new(
    ndim: usize,
    dims: *const usize,
    spacing: f64,
    origin: *const f64,
    values: *const f64,
    out: *mut *mut DtqScalarField,
) -> DtqStatus {
    guard(|| {
        let spec = grid_spec(ndim, dims, spacing, origin)?;
        let values = slice(values, spec.len(), "values")?.to_vec();
        let field = ScalarField::new(spec, values)?;
        write_out(out, boxed(DtqScalarField(field)), "out")
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dtq_scalar_free(field: *mut DtqScalarField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_scalar_len(field: *const DtqScalarField, out: *mut usize) -> DtqStatus {
    guard(|| write_out(out, as_ref(field, "field")?.0.len(), "out"))
}

/// Copies the field values into `buf`, which must hold `len` cells.
///
/// # Safety
/// `field` must be a live handle; `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dtq_scalar_copy_values(field: *const DtqScalarField, buf: *mut f64, len: usize) -> DtqStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        if len != f.len() {
            return Err(invalid(format!("buffer holds {len} cells, field has {}", f.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(f.values().as_ptr(), buf, len);
        Ok(())
    })
}

/// Writes the rank to `ndim` and, if `dims` is non-null, the extents to the
/// first `ndim` entries of `dims` (at most 3).
///
/// # Safety
/// `field` must be a live handle; `ndim` writable; `dims` null or writable
/// for the field's rank.
#[no_mangle]
pub unsafe extern "C" fn dtq_scalar_shape(
    field: *const DtqScalarField,
    ndim: *mut usize,
    dims: *mut usize,
    spacing: *mut f64,
) -> DtqStatus {
    guard(|| {
        let spec = as_ref(field, "field")?.0.spec();
        write_out(ndim, spec.ndim(), "ndim")?;
        if !dims.is_null() {
            ptr::copy_nonoverlapping(spec.dims().as_ptr(), dims, spec.ndim());
        }
        if !spacing.is_null() {
            spacing.write(spec.spacing());
        }
        Ok(())
    })
}

/// Creates a binary field; any nonzero byte marks a foreground cell.
///
/// # Safety
/// Same layout contract as [`dtq_scalar_new`] with one byte per cell.
#[no_mangle]
pub unsafe extern "C" fn dtq_binary_new(
    ndim: usize,
    dims: *const usize,
    spacing: f64,
    origin: *const f64,
    values: *const u8,
    out: *mut *mut DtqBinaryField,
) -> DtqStatus {
    guard(|| {
        let spec = grid_spec(ndim, dims, spacing, origin)?;
        let values = slice(values, spec.len(), "values")?.iter().map(|&v| v != 0).collect();
        let field = BinaryField::new(spec, values)?;
        write_out(out, boxed(DtqBinaryField(field)), "out")
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dtq_binary_free(field: *mut DtqBinaryField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Copies the cells as 0/1 bytes into `buf` of `len` entries.
///
/// # Safety
/// `field` must be a live handle; `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn dtq_binary_copy_values(field: *const DtqBinaryField, buf: *mut u8, len: usize) -> DtqStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        if len != f.len() {
            return Err(invalid(format!("buffer holds {len} cells, field has {}", f.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        for (i, &v) in f.values().iter().enumerate() {
            buf.add(i).write(u8::from(v));
        }
        Ok(())
    })
}

/// Number of foreground cells.
///
/// # Safety
/// `field` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_binary_count(field: *const DtqBinaryField, out: *mut usize) -> DtqStatus {
    guard(|| write_out(out, as_ref(field, "field")?.0.count(), "out"))
}

/// Foreground is every cell with a negative value.
///
/// # Safety
/// `phi` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_binarize(phi: *const DtqScalarField, out: *mut *mut DtqBinaryField) -> DtqStatus {
    guard(|| {
        let b = binarize(&as_ref(phi, "phi")?.0);
        write_out(out, boxed(DtqBinaryField(b)), "out")
    })
}

/// Unsigned distance from every cell to the nearest `target` cell.
///
/// # Safety
/// `b` must be a live handle; `metric` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_distance_transform(
    b: *const DtqBinaryField,
    metric: *const DtqMetric,
    target: DtqTarget,
    out: *mut *mut DtqScalarField,
) -> DtqStatus {
    guard(|| {
        let m = self::metric(as_ref(metric, "metric")?)?;
        let target = match target {
            DtqTarget::Foreground => Target::Foreground,
            DtqTarget::Background => Target::Background,
        };
        let d = distance_transform(&as_ref(b, "b")?.0, m, target)?;
        write_out(out, boxed(DtqScalarField(d)), "out")
    })
}

/// Signed transform, negative inside; `corrected` non-zero selects the
/// half-cell shifted form.
///
/// # Safety
/// `b` must be a live handle; `metric` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_signed_distance_transform(
    b: *const DtqBinaryField,
    metric: *const DtqMetric,
    corrected: u8,
    out: *mut *mut DtqScalarField,
) -> DtqStatus {
    guard(|| {
        let m = self::metric(as_ref(metric, "metric")?)?;
        let d = signed_distance_transform(&as_ref(b, "b")?.0, m, corrected != 0)?;
        write_out(out, boxed(DtqScalarField(d)), "out")
    })
}

/// Seeded sign-preserving random perturbation of amplitude `h / alpha`.
///
/// # Safety
/// `phi` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_dither(
    phi: *const DtqScalarField,
    alpha: f64,
    seed: u64,
    out: *mut *mut DtqScalarField,
) -> DtqStatus {
    guard(|| {
        let d = dither(&as_ref(phi, "phi")?.0, DitherParams::new(alpha, seed)?)?;
        write_out(out, boxed(DtqScalarField(d)), "out")
    })
}

/// Error metrics of `phi` against `reference`. Pass `n_gradient = 0` (and
/// any `exact_gradient`) to skip `e_d`; otherwise one component per axis.
///
/// # Safety
/// Handles must be live; `exact_gradient` readable for `n_gradient`
/// handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_error_metrics(
    phi: *const DtqScalarField,
    reference: *const DtqBinaryField,
    exact_gradient: *const *const DtqScalarField,
    n_gradient: usize,
    out: *mut DtqErrorReport,
) -> DtqStatus {
    guard(|| {
        let grad = gradient(exact_gradient, n_gradient)?;
        let r = error_metrics(&as_ref(phi, "phi")?.0, &as_ref(reference, "reference")?.0, grad.as_deref())?;
        write_out(out, DtqErrorReport::from(&r), "out")
    })
}

/// Runs the reinitialization. The final field goes to `out`; if
/// `final_report` is non-null it receives the last logged metrics.
///
/// # Safety
/// Handles must be live; `params` readable; `exact_gradient` as in
/// [`dtq_error_metrics`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_reinitialize(
    phi0: *const DtqScalarField,
    reference: *const DtqBinaryField,
    exact_gradient: *const *const DtqScalarField,
    n_gradient: usize,
    params: *const DtqReinitParams,
    out: *mut *mut DtqScalarField,
    final_report: *mut DtqErrorReport,
) -> DtqStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        let params = ReinitParams {
            iterations: p.iterations,
            cfl: p.cfl,
            sign_epsilon: p.sign_epsilon,
            log_every: p.log_every,
        };
        let grad = gradient(exact_gradient, n_gradient)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = reinitialize(&as_ref(phi0, "phi0")?.0, &as_ref(reference, "reference")?.0, grad.as_deref(), &params)?;
        if let (false, Some(last)) = (final_report.is_null(), r.reports.last()) {
            final_report.write(last.into());
        }
        write_out(out, boxed(DtqScalarField(r.field)), "out")
    })
}

/// # Safety
/// `field` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn dtq_scalar_save(field: *const DtqScalarField, path: *const c_char) -> DtqStatus {
    guard(|| Ok(save_scalar(self::path(path)?, &as_ref(field, "field")?.0)?))
}

/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_scalar_load(path: *const c_char, out: *mut *mut DtqScalarField) -> DtqStatus {
    guard(|| {
        let f = load_scalar(self::path(path)?)?;
        write_out(out, boxed(DtqScalarField(f)), "out")
    })
}

/// # Safety
/// `field` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn dtq_binary_save(field: *const DtqBinaryField, path: *const c_char) -> DtqStatus {
    guard(|| Ok(save_binary(self::path(path)?, &as_ref(field, "field")?.0)?))
}

/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dtq_binary_load(path: *const c_char, out: *mut *mut DtqBinaryField) -> DtqStatus {
    guard(|| {
        let f = load_binary(self::path(path)?)?;
        write_out(out, boxed(DtqBinaryField(f)), "out")
    })
}
