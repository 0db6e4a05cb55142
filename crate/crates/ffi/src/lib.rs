//! C ABI over `pwlab-core`.
//!
//! Every function returns a [`PwlabStatus`]. On failure the message is kept in
//! a thread-local slot readable with [`pwlab_last_error_message`]. Objects are
//! opaque handles released with their `_free` function. Matrices are passed
//! as row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pwlab_core::criteria::{cw_bi_invariant, cw_left_invariant, Verdict};
use pwlab_core::lie::{build_conf, build_isom, LieAlgebraData};
use pwlab_core::linalg::Mat;
use pwlab_core::lorentz::{classify, ElementKind};
use pwlab_core::planewave::{
    curvature_closed, is_conformally_flat, metric_at, PlaneWaveSpec, SpacetimePoint, WaveKind,
};
use pwlab_core::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwlabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input was rejected; see the last error message.
    Validation = 3,
    /// An internal invariant failed.
    Internal = 4,
    /// An index was out of range.
    OutOfRange = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Wave kind codes for [`pwlab_spec_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwlabWaveKind {
    A = 0,
    B = 1,
}

/// Element type codes written by [`pwlab_classify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwlabElementKind {
    Elliptic = 0,
    Hyperbolic = 1,
    Parabolic = 2,
}

/// Opaque plane-wave spec.
pub struct PwlabSpec(PlaneWaveSpec);

/// Opaque Lie algebra with structure constants.
pub struct PwlabAlgebra(LieAlgebraData);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: PwlabStatus, msg: impl Into<String>) -> PwlabStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> PwlabStatus {
    let status = if e.is_validation() { PwlabStatus::Validation } else { PwlabStatus::Internal };
    fail(status, e.to_string())
}

/// Run `f` with panics converted to [`PwlabStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), PwlabStatus>) -> PwlabStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PwlabStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(PwlabStatus::Panic, "panic in pwlab"),
    }
}

fn lift<T>(r: pwlab_core::Result<T>) -> Result<T, PwlabStatus> {
    r.map_err(from_error)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), PwlabStatus> {
    if p.is_null() {
        Err(fail(PwlabStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `data` must point to `rows * cols` readable doubles.
unsafe fn read_matrix(data: *const f64, rows: usize, cols: usize, name: &str) -> Result<Mat, PwlabStatus> {
    if rows * cols == 0 {
        return Ok(Mat::zeros(rows, cols));
    }
    non_null(data, name)?;
    let s = std::slice::from_raw_parts(data, rows * cols);
    Ok(Mat::from_row_slice(rows, cols, s))
}

/// # Safety
/// `out` must point to `m.len()` writable doubles.
unsafe fn write_matrix(m: &Mat, out: *mut f64) -> Result<(), PwlabStatus> {
    if m.is_empty() {
        return Ok(());
    }
    non_null(out, "out")?;
    let dst = std::slice::from_raw_parts_mut(out, m.len());
    for (i, row) in m.row_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            dst[i * m.ncols() + j] = *v;
        }
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pwlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a spec from `n x n` row-major `f` (skew) and `b` (symmetric).
///
/// # Safety
/// `f` and `b` must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_spec_new(
    kind: PwlabWaveKind,
    n: usize,
    f: *const f64,
    b: *const f64,
    out: *mut *mut PwlabSpec,
) -> PwlabStatus {
    guard(|| {
        non_null(out, "out")?;
        let f = read_matrix(f, n, n, "f")?;
        let b = read_matrix(b, n, n, "b")?;
        let kind = match kind {
            PwlabWaveKind::A => WaveKind::A,
            PwlabWaveKind::B => WaveKind::B,
        };
        let spec = lift(PlaneWaveSpec::new(kind, f, b))?;
        *out = Box::into_raw(Box::new(PwlabSpec(spec)));
        Ok(())
    })
}

/// Parse a spec from JSON `{"kind","n","F","B"}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_spec_from_json(json: *const c_char, out: *mut *mut PwlabSpec) -> PwlabStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(PwlabStatus::InvalidUtf8, "json is not UTF-8"))?;
        let loaded = lift(pwlab_core::io::parse_spec(text))?;
        *out = Box::into_raw(Box::new(PwlabSpec(loaded.spec)));
        Ok(())
    })
}

/// # Safety
/// `spec` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pwlab_spec_free(spec: *mut PwlabSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Dimension `n` of the Euclidean part, or 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwlab_spec_n(spec: *const PwlabSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.0.n())
}

/// Metric at coordinates `(v, x_1..x_n, u)`; writes `(n+2)^2` doubles.
///
/// # Safety
/// `coords` must hold `n + 2` doubles and `out` room for `(n+2)^2`.
#[no_mangle]
pub unsafe extern "C" fn pwlab_spec_metric(
    spec: *const PwlabSpec,
    coords: *const f64,
    out: *mut f64,
) -> PwlabStatus {
    guard(|| {
        let spec = &spec.as_ref().ok_or_else(|| fail(PwlabStatus::NullPointer, "spec is null"))?.0;
        non_null(coords, "coords")?;
        let c = std::slice::from_raw_parts(coords, spec.n() + 2);
        let pt = lift(SpacetimePoint::from_coords(c))?;
        let g = lift(metric_at(spec, &pt))?;
        write_matrix(&g, out)
    })
}

/// Curvature profile at `u` (bivector convention); writes `n^2` doubles.
///
/// # Safety
/// `out` must have room for `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pwlab_spec_curvature_profile(
    spec: *const PwlabSpec,
    u: f64,
    out: *mut f64,
) -> PwlabStatus {
    guard(|| {
        let spec = &spec.as_ref().ok_or_else(|| fail(PwlabStatus::NullPointer, "spec is null"))?.0;
        let map = lift(curvature_closed(spec, u))?;
        write_matrix(&map.profile, out)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_spec_is_conformally_flat(
    spec: *const PwlabSpec,
    tol: f64,
    out: *mut bool,
) -> PwlabStatus {
    guard(|| {
        let spec = &spec.as_ref().ok_or_else(|| fail(PwlabStatus::NullPointer, "spec is null"))?.0;
        non_null(out, "out")?;
        *out = lift(is_conformally_flat(spec, tol))?;
        Ok(())
    })
}

/// Isometry algebra of `spec`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_algebra_isom(spec: *const PwlabSpec, out: *mut *mut PwlabAlgebra) -> PwlabStatus {
    guard(|| {
        let spec = &spec.as_ref().ok_or_else(|| fail(PwlabStatus::NullPointer, "spec is null"))?.0;
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(PwlabAlgebra(lift(build_isom(spec))?)));
        Ok(())
    })
}

/// Conformal algebra of `spec`; fails for conformally flat specs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_algebra_conf(spec: *const PwlabSpec, out: *mut *mut PwlabAlgebra) -> PwlabStatus {
    guard(|| {
        let spec = &spec.as_ref().ok_or_else(|| fail(PwlabStatus::NullPointer, "spec is null"))?.0;
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(PwlabAlgebra(lift(build_conf(spec))?)));
        Ok(())
    })
}

/// # Safety
/// `alg` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pwlab_algebra_free(alg: *mut PwlabAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Dimension of the algebra, or 0 for a null handle.
///
/// # Safety
/// `alg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwlab_algebra_dim(alg: *const PwlabAlgebra) -> usize {
    alg.as_ref().map_or(0, |a| a.0.dim())
}

/// Largest Jacobi cyclic sum over basis triples, or NaN for a null handle.
///
/// # Safety
/// `alg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwlab_algebra_jacobi_residual(alg: *const PwlabAlgebra) -> f64 {
    alg.as_ref().map_or(f64::NAN, |a| a.0.jacobi_residual())
}

/// Coefficient of basis element `k` in `[x_i, x_j]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_algebra_structure_constant(
    alg: *const PwlabAlgebra,
    i: usize,
    j: usize,
    k: usize,
    out: *mut f64,
) -> PwlabStatus {
    guard(|| {
        let alg = &alg.as_ref().ok_or_else(|| fail(PwlabStatus::NullPointer, "alg is null"))?.0;
        non_null(out, "out")?;
        let d = alg.dim();
        if i >= d || j >= d || k >= d {
            return Err(fail(PwlabStatus::OutOfRange, format!("index out of range for dimension {d}")));
        }
        *out = alg.structure_constant(i, j, k);
        Ok(())
    })
}

/// Structure constants as JSON `{labels, nonzero, jacobi_residual}`. Release
/// with [`pwlab_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_algebra_to_json(alg: *const PwlabAlgebra, out: *mut *mut c_char) -> PwlabStatus {
    guard(|| {
        let alg = &alg.as_ref().ok_or_else(|| fail(PwlabStatus::NullPointer, "alg is null"))?.0;
        non_null(out, "out")?;
        let text = pwlab_core::io::structure_to_json(alg).to_string();
        *out = CString::new(text).expect("json has no nul").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pwlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Classify an `(n+2) x (n+2)` element of so(1, n+1) in the Witt basis.
///
/// # Safety
/// `matrix` must hold `(n+2)^2` doubles; `kind` and `a` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_classify(
    matrix: *const f64,
    n: usize,
    tol: f64,
    kind: *mut PwlabElementKind,
    a: *mut f64,
) -> PwlabStatus {
    guard(|| {
        non_null(kind, "kind")?;
        non_null(a, "a")?;
        let m = read_matrix(matrix, n + 2, n + 2, "matrix")?;
        let form = lift(classify(&m, tol))?;
        *kind = match form.kind {
            ElementKind::Elliptic => PwlabElementKind::Elliptic,
            ElementKind::Hyperbolic => PwlabElementKind::Hyperbolic,
            ElementKind::Parabolic => PwlabElementKind::Parabolic,
        };
        *a = form.a;
        Ok(())
    })
}

/// Does the Cahen-Wallach space with symmetric `n x n` matrix `b` admit a
/// left-invariant (`bi_invariant = false`) or bi-invariant Lie group structure?
///
/// # Safety
/// `b` must hold `n * n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn pwlab_cw_decide(
    b: *const f64,
    n: usize,
    bi_invariant: bool,
    tol: f64,
    out: *mut bool,
) -> PwlabStatus {
    guard(|| {
        non_null(out, "out")?;
        let b = read_matrix(b, n, n, "b")?;
        let w = if bi_invariant { cw_bi_invariant(&b, tol) } else { cw_left_invariant(&b, tol) };
        *out = lift(w)?.verdict == Verdict::Yes;
        Ok(())
    })
}
