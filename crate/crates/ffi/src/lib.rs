//! C interface to `shadowgeom`.
//!
//! Bodies live behind the opaque handle [`SgBody`]; every fallible function
//! returns an [`SgStatus`] and, on failure, leaves a message that
//! [`sg_last_error`] copies out. Messages are per thread. Matrices cross
//! the boundary as row-major `double` arrays. Strings returned by the
//! library are released with [`sg_string_free`], bodies with
//! [`sg_body_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::{DMatrix, DVector};
use serde_json::Value;

use shadowgeom::equivalence::{affine_equivalent_with, linear_equivalent_with, EquivalenceOptions};
use shadowgeom::fit::{body_mvee, is_ellipsoid};
use shadowgeom::generate::{gen_body, BodySpec};
use shadowgeom::geometry::{project_along, support, ConvexBody, Ellipsoid};
use shadowgeom::harness::{suite_json, verify, SuiteConfig};
use shadowgeom::io::{body_from_json, body_json, to_stable_string};
use shadowgeom::revolution::{affine_revolution_axis_with, revolution_axis_with, AxisSearch};
use shadowgeom::GeomError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Degenerate = 4,
    Format = 5,
    Io = 6,
    /// A suite ran but did not pass.
    Failed = 7,
    Panic = 8,
}

/// Opaque convex body.
pub struct SgBody {
    body: ConvexBody,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgVerdict {
    pub equivalent: bool,
    pub residual: f64,
    pub restarts_used: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgAxis {
    /// False when no axis fits within tolerance.
    pub found: bool,
    pub degenerate: bool,
    pub residual: f64,
    pub second_best: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(SgStatus, String);

impl From<GeomError> for Fail {
    fn from(e: GeomError) -> Self {
        let status = match &e {
            GeomError::DimensionMismatch { .. } => SgStatus::DimensionMismatch,
            GeomError::DegenerateBody(_)
            | GeomError::PointsDoNotSpan
            | GeomError::ParallelFlats
            | GeomError::ShadowBoundaryIsBand { .. }
            | GeomError::DegenerateObliqueDirection
            | GeomError::ProjectionOntoFullSpace => SgStatus::Degenerate,
            GeomError::Format(_) => SgStatus::Format,
            GeomError::Io(_) => SgStatus::Io,
            _ => SgStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SgStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(SgStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SgStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SgStatus::Panic
        }
    }
}

unsafe fn body_ref<'a>(b: *const SgBody, what: &str) -> Result<&'a ConvexBody, Fail> {
    b.as_ref().map(|b| &b.body).ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize) -> Option<&'a mut [f64]> {
    (!p.is_null()).then(|| std::slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed(body: ConvexBody) -> *mut SgBody {
    Box::into_raw(Box::new(SgBody { body }))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("string contains a NUL byte"))
}

fn write_row_major(dst: &mut [f64], m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dst[i * m.ncols() + j] = m[(i, j)];
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated
/// and NUL-terminated when `len > 0`). Returns the full message length
/// without the terminator, 0 when there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sg_last_error(buf: *mut c_char, len: usize) -> usize {
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
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `body` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_body_free(body: *mut SgBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// Ambient dimension, 0 for a null handle.
///
/// # Safety
/// `body` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_body_dim(body: *const SgBody) -> usize {
    body.as_ref().map_or(0, |b| b.body.dim())
}

/// Convex hull of `count` points of dimension `dim`, stored row-major.
/// With `symmetric`, the hull of the points and their negatives.
///
/// # Safety
/// `points` must hold `count * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_body_from_points(
    points: *const f64,
    count: usize,
    dim: usize,
    symmetric: bool,
    out: *mut *mut SgBody,
) -> SgStatus {
    guard(|| {
        if dim == 0 || count == 0 {
            return Err(invalid("need at least one point of positive dimension"));
        }
        let total = count.checked_mul(dim).ok_or_else(|| invalid("size overflow"))?;
        let data = slice(points, total, "points")?;
        let mut pts: Vec<DVector<f64>> = data.chunks(dim).map(DVector::from_column_slice).collect();
        if symmetric {
            let negated: Vec<DVector<f64>> = pts.iter().map(|p| -p).collect();
            pts.extend(negated);
        }
        let body = ConvexBody::point_cloud(pts, symmetric)?;
        put(out, boxed(body), "out")
    })
}

/// Ellipsoid `{x : (x - c)^T Q (x - c) <= 1}` with `shape` = Q row-major.
///
/// # Safety
/// `center` must hold `dim` doubles, `shape` `dim * dim`; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_body_ellipsoid(
    center: *const f64,
    shape: *const f64,
    dim: usize,
    out: *mut *mut SgBody,
) -> SgStatus {
    guard(|| {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let c = DVector::from_column_slice(slice(center, dim, "center")?);
        let q = DMatrix::from_row_slice(dim, dim, slice(shape, dim * dim, "shape")?);
        let e = Ellipsoid::new(c, q)?;
        put(out, boxed(ConvexBody::ellipsoid(e)), "out")
    })
}

/// Body from JSON text: either a serialized body or a generator
/// descriptor, which is built with `seed`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_body_from_json(
    json: *const c_char,
    seed: u64,
    out: *mut *mut SgBody,
) -> SgStatus {
    guard(|| {
        let v: Value = serde_json::from_str(text(json, "json")?).map_err(GeomError::from)?;
        let body = if v.get("kind").is_some() {
            let spec: BodySpec = serde_json::from_value(v).map_err(GeomError::from)?;
            gen_body(&spec, seed)?
        } else {
            body_from_json(&v)?
        };
        put(out, boxed(body), "out")
    })
}

/// Serialized body; free the result with [`sg_string_free`].
///
/// # Safety
/// `body` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_body_to_json(body: *const SgBody, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        let b = body_ref(body, "body")?;
        let s = c_string(to_stable_string(&body_json(b)))?;
        put(out, s, "out")
    })
}

/// Support function `h_K(u)` for a unit vector `u`.
///
/// # Safety
/// `u` must hold `dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_support(
    body: *const SgBody,
    u: *const f64,
    dim: usize,
    out: *mut f64,
) -> SgStatus {
    guard(|| {
        let b = body_ref(body, "body")?;
        let u = DVector::from_column_slice(slice(u, dim, "u")?);
        put(out, support(b, &u)?, "out")
    })
}

/// Orthogonal projection onto `u⊥`, in the coordinates of an orthonormal
/// basis of `u⊥`. When `basis` is non-null it receives that basis as
/// `dim - 1` rows of length `dim`.
///
/// # Safety
/// `u` must hold `dim` doubles, `basis` null or `(dim - 1) * dim`.
#[no_mangle]
pub unsafe extern "C" fn sg_project_along(
    body: *const SgBody,
    u: *const f64,
    dim: usize,
    basis: *mut f64,
    out: *mut *mut SgBody,
) -> SgStatus {
    guard(|| {
        let b = body_ref(body, "body")?;
        let u = DVector::from_column_slice(slice(u, dim, "u")?);
        let (shadow, plane) = project_along(b, &u)?;
        if let Some(dst) = out_slice(basis, dim.saturating_sub(1) * dim) {
            write_row_major(dst, &plane.basis().transpose());
        }
        put(out, boxed(shadow), "out")
    })
}

/// Minimum-volume enclosing ellipsoid (centered at the origin for
/// symmetric bodies). Any output pointer may be null.
///
/// # Safety
/// `center` null or `dim` doubles, `shape` null or `dim * dim`.
#[no_mangle]
pub unsafe extern "C" fn sg_mvee(
    body: *const SgBody,
    center: *mut f64,
    shape: *mut f64,
    dual_gap: *mut f64,
) -> SgStatus {
    guard(|| {
        let b = body_ref(body, "body")?;
        let n = b.dim();
        let r = body_mvee(b)?;
        if let Some(dst) = out_slice(center, n) {
            dst.copy_from_slice(r.ellipsoid.center().as_slice());
        }
        if let Some(dst) = out_slice(shape, n * n) {
            write_row_major(dst, r.ellipsoid.shape());
        }
        if !dual_gap.is_null() {
            dual_gap.write(r.dual_gap);
        }
        Ok(())
    })
}

/// # Safety
/// `body` must be a live handle; `is_ell` writable, `residual` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sg_is_ellipsoid(
    body: *const SgBody,
    tol: f64,
    is_ell: *mut bool,
    residual: *mut f64,
) -> SgStatus {
    guard(|| {
        let b = body_ref(body, "body")?;
        let (yes, r) = is_ellipsoid(b, tol)?;
        if !residual.is_null() {
            residual.write(r);
        }
        put(is_ell, yes, "is_ell")
    })
}

/// Linear (or, with `affine`, affine) equivalence test. `witness`, when
/// non-null, receives the map as `dim * dim` matrix entries followed by
/// `dim` translation entries.
///
/// # Safety
/// Handles must be live; `out` writable; `witness` null or
/// `dim * (dim + 1)` doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_equivalent(
    first: *const SgBody,
    second: *const SgBody,
    tol: f64,
    restarts: usize,
    seed: u64,
    affine: bool,
    out: *mut SgVerdict,
    witness: *mut f64,
) -> SgStatus {
    guard(|| {
        let a = body_ref(first, "first")?;
        let b = body_ref(second, "second")?;
        let opts = EquivalenceOptions {
            tol,
            restarts,
            seed,
            directions: None,
        };
        let v = if affine {
            affine_equivalent_with(a, b, &opts)?
        } else {
            linear_equivalent_with(a, b, &opts)?
        };
        let n = a.dim();
        if let Some(dst) = out_slice(witness, n * (n + 1)) {
            write_row_major(&mut dst[..n * n], &v.witness.matrix);
            dst[n * n..].copy_from_slice(v.witness.translation.as_slice());
        }
        put(
            out,
            SgVerdict {
                equivalent: v.equivalent,
                residual: v.residual,
                restarts_used: v.restarts_used,
            },
            "out",
        )
    })
}

/// Axis of revolution (of an affine image of a body of revolution with
/// `affine`). When found, `direction` and `point` receive the axis.
///
/// # Safety
/// `body` must be live; `out` writable; `direction`, `point` null or
/// `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_revolution_axis(
    body: *const SgBody,
    tol: f64,
    seed: u64,
    affine: bool,
    out: *mut SgAxis,
    direction: *mut f64,
    point: *mut f64,
) -> SgStatus {
    guard(|| {
        let b = body_ref(body, "body")?;
        let search = AxisSearch {
            tol,
            seed,
            ..AxisSearch::default()
        };
        let cert = if affine {
            affine_revolution_axis_with(b, &search)?
        } else {
            revolution_axis_with(b, &search)?
        };
        let n = b.dim();
        let result = match &cert {
            None => SgAxis::default(),
            Some(c) => {
                if let Some(dst) = out_slice(direction, n) {
                    dst.copy_from_slice(c.axis.direction().as_slice());
                }
                if let Some(dst) = out_slice(point, n) {
                    dst.copy_from_slice(c.axis.normalized_base().as_slice());
                }
                SgAxis {
                    found: true,
                    degenerate: c.degenerate,
                    residual: c.residual,
                    second_best: c.second_best,
                }
            }
        };
        put(out, result, "out")
    })
}

/// Runs a property suite and returns its JSON report in `report` (free it
/// with [`sg_string_free`]). `dim` 0 selects the suite default. Returns
/// `Failed` when the suite ran but did not pass; the report is still set.
///
/// # Safety
/// `lemma_id` must be a NUL-terminated string; `report` writable.
#[no_mangle]
pub unsafe extern "C" fn sg_verify(
    lemma_id: *const c_char,
    trials: usize,
    dim: usize,
    seed: u64,
    report: *mut *mut c_char,
) -> SgStatus {
    let mut ok = true;
    let status = guard(|| {
        let id = text(lemma_id, "lemma_id")?;
        if report.is_null() {
            return Err(null("report"));
        }
        let mut cfg = SuiteConfig::new(trials, seed);
        cfg.dim = (dim > 0).then_some(dim);
        let r = verify(id, &cfg)?;
        ok = r.ok();
        let s = c_string(to_stable_string(&suite_json(&r, false)?))?;
        report.write(s);
        Ok(())
    });
    if status == SgStatus::Ok && !ok {
        set_error("suite failed");
        return SgStatus::Failed;
    }
    status
}
