//! C ABI over `pathwise`.
//!
//! Every function returns a [`PwStatus`]; results go through out-pointers.
//! Objects are opaque handles released with their `_free` function. On
//! failure the thread-local message from [`pw_last_error_message`] describes
//! the error. Strings returned by the library are released with
//! [`pw_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pathwise::experiment::{run, ExperimentConfig, Verb};
use pathwise::integration::MatrixCurve;
use pathwise::partitions::{dyadic_ladder, partition_points, LadderMode, PartitionLadder};
use pathwise::paths::{generate, p_variation, GenerateParams, PathKind};
use pathwise::quadvar::discrete_qv;
use pathwise::roughpath::{RoughPath, DEFAULT_REPORT_POINTS};
use pathwise::{Error, SamplePath};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or an index out of range.
    InvalidArgument = 1,
    /// A library error; see `pw_last_error_code`.
    Failed = 2,
    /// An experiment ran but at least one requested check did not pass.
    CheckFailed = 3,
    /// Output buffer too small.
    BufferTooSmall = 4,
    Panic = 5,
}

/// Sampled path.
pub struct PwPath(SamplePath);

/// Crossing-time partition ladder of a path.
pub struct PwLadder(PartitionLadder);

/// Itô rough path.
pub struct PwRoughPath(RoughPath);

thread_local! {
    static LAST_ERROR: RefCell<(CString, CString)> = RefCell::new((CString::default(), CString::default()));
}

fn set_error(code: &str, message: &str) {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = (clean(code), clean(message)));
}

fn invalid(message: &str) -> PwStatus {
    set_error("invalid_argument", message);
    PwStatus::InvalidArgument
}

fn guard(f: impl FnOnce() -> Result<PwStatus, Error>) -> PwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            set_error(e.code(), &e.to_string());
            PwStatus::Failed
        }
        Err(_) => {
            set_error("panic", "internal panic");
            PwStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        None
    } else {
        CStr::from_ptr(p).to_str().ok()
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread ("" if none). Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().1.as_ptr())
}

/// Machine-readable code of the last failed call on this thread.
#[no_mangle]
pub extern "C" fn pw_last_error_code() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().0.as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Path from `len` times and `len * dim` row-major values.
///
/// # Safety
/// `times` and `values` must point to `len` and `len * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn pw_path_new(
    times: *const f64,
    values: *const f64,
    len: usize,
    dim: usize,
    out: *mut *mut PwPath,
) -> PwStatus {
    if times.is_null() || values.is_null() || out.is_null() {
        return invalid("null pointer");
    }
    let Some(total) = len.checked_mul(dim) else {
        return invalid("len * dim overflows");
    };
    guard(|| {
        let t = std::slice::from_raw_parts(times, len).to_vec();
        let v = std::slice::from_raw_parts(values, total).to_vec();
        *out = Box::into_raw(Box::new(PwPath(SamplePath::new(t, v, dim)?)));
        Ok(PwStatus::Ok)
    })
}

/// Seeded test path: `kind` is "linear", "sinusoid", "random_walk" or
/// "brownian"; `scale` is used by random walks only.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_path_generate(
    kind: *const c_char,
    seed: u64,
    n_steps: usize,
    horizon: f64,
    dim: usize,
    scale: f64,
    out: *mut *mut PwPath,
) -> PwStatus {
    let Some(kind) = str_arg(kind) else {
        return invalid("kind must be a UTF-8 string");
    };
    if out.is_null() {
        return invalid("null pointer");
    }
    guard(|| {
        let kind: PathKind = kind.parse()?;
        let mut params = GenerateParams::new();
        params.insert("n_steps".into(), n_steps as f64);
        params.insert("T".into(), horizon);
        params.insert("d".into(), dim as f64);
        if kind == PathKind::RandomWalk {
            params.insert("scale".into(), scale);
        }
        *out = Box::into_raw(Box::new(PwPath(generate(kind, seed, &params)?)));
        Ok(PwStatus::Ok)
    })
}

/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_path_free(path: *mut PwPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of grid points.
///
/// # Safety
/// `path` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_path_len(path: *const PwPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `path` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_path_dim(path: *const PwPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.dim())
}

/// Exact p-variation norm `(sup sum |S_{t_k,t_{k+1}}|^p)^{1/p}` over grid indices `[s, t]`.
///
/// # Safety
/// `path` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_p_variation(path: *const PwPath, p: f64, s: usize, t: usize, out: *mut f64) -> PwStatus {
    let (Some(path), false) = (path.as_ref(), out.is_null()) else {
        return invalid("null pointer");
    };
    guard(|| {
        *out = p_variation(&path.0, p, s, t)?;
        Ok(PwStatus::Ok)
    })
}

/// Ladder with thresholds `2^-n`, `n = from..=to`. `vector_norm` selects
/// crossings of the Euclidean norm instead of merged per-coordinate ones.
///
/// # Safety
/// `path` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_ladder_dyadic(
    path: *const PwPath,
    from: u32,
    to: u32,
    vector_norm: bool,
    out: *mut *mut PwLadder,
) -> PwStatus {
    let (Some(path), false) = (path.as_ref(), out.is_null()) else {
        return invalid("null pointer");
    };
    let mode = if vector_norm {
        LadderMode::VectorNorm
    } else {
        LadderMode::PerCoordinateMerged
    };
    guard(|| {
        *out = Box::into_raw(Box::new(PwLadder(dyadic_ladder(&path.0, from..=to, mode)?)));
        Ok(PwStatus::Ok)
    })
}

/// # Safety
/// `ladder` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_ladder_free(ladder: *mut PwLadder) {
    if !ladder.is_null() {
        drop(Box::from_raw(ladder));
    }
}

/// # Safety
/// `ladder` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_ladder_num_levels(ladder: *const PwLadder) -> usize {
    ladder.as_ref().map_or(0, |l| l.0.num_levels())
}

/// Copies the stop indices of `level` (0-based, coarsest first) into `buf`.
/// `*len` is the number of stops on return; with a null or short `buf` the
/// call returns `PW_STATUS_BUFFER_TOO_SMALL`.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes; `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_ladder_stops(
    ladder: *const PwLadder,
    level: usize,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> PwStatus {
    let (Some(ladder), false) = (ladder.as_ref(), len.is_null()) else {
        return invalid("null pointer");
    };
    guard(|| {
        let stops = &ladder.0.level(level)?.stops;
        *len = stops.len();
        if buf.is_null() || cap < stops.len() {
            set_error("buffer_too_small", "output buffer too small");
            return Ok(PwStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(stops.as_ptr(), buf, stops.len());
        Ok(PwStatus::Ok)
    })
}

fn check_pair(path: &SamplePath, ladder: &PartitionLadder) -> Result<(), Error> {
    if ladder.last != path.last() {
        return Err(Error::GridMismatch("ladder built on a different grid".into()));
    }
    Ok(())
}

/// Discrete quadratic variation of coordinate `coord` along `level` at grid
/// index `t`.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_discrete_qv(
    path: *const PwPath,
    ladder: *const PwLadder,
    level: usize,
    coord: usize,
    t: usize,
    out: *mut f64,
) -> PwStatus {
    let (Some(path), Some(ladder), false) = (path.as_ref(), ladder.as_ref(), out.is_null()) else {
        return invalid("null pointer");
    };
    if coord >= path.0.dim() || t >= path.0.len() {
        return invalid("coordinate or grid index out of range");
    }
    guard(|| {
        check_pair(&path.0, &ladder.0)?;
        let lvl = ladder.0.level(level)?;
        *out = discrete_qv(&path.0, lvl.coordinate_stops(coord), coord, t);
        Ok(PwStatus::Ok)
    })
}

/// `t -> int_0^t S^i dS^j` with left points along `level`, written to `buf`
/// (one value per grid point).
///
/// # Safety
/// Handles must be live and `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn pw_ito_integral(
    path: *const PwPath,
    ladder: *const PwLadder,
    level: usize,
    i: usize,
    j: usize,
    buf: *mut f64,
    cap: usize,
) -> PwStatus {
    let (Some(path), Some(ladder), false) = (path.as_ref(), ladder.as_ref(), buf.is_null()) else {
        return invalid("null pointer");
    };
    let d = path.0.dim();
    if i >= d || j >= d {
        return invalid("coordinate out of range");
    }
    if cap < path.0.len() {
        set_error("buffer_too_small", "output buffer too small");
        return PwStatus::BufferTooSmall;
    }
    guard(|| {
        check_pair(&path.0, &ladder.0)?;
        let stops = partition_points(&ladder.0.level(level)?.stops, path.0.last());
        let curve = MatrixCurve::ito(&path.0, &stops).entry(i, j);
        ptr::copy_nonoverlapping(curve.as_ptr(), buf, curve.len());
        Ok(PwStatus::Ok)
    })
}

/// Itô rough path from the finest level of `ladder`; `max_report_points = 0`
/// selects the default report-grid bound.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_rough_path_build(
    path: *const PwPath,
    ladder: *const PwLadder,
    p: f64,
    max_report_points: usize,
    out: *mut *mut PwRoughPath,
) -> PwStatus {
    let (Some(path), Some(ladder), false) = (path.as_ref(), ladder.as_ref(), out.is_null()) else {
        return invalid("null pointer");
    };
    let max = if max_report_points == 0 {
        DEFAULT_REPORT_POINTS
    } else {
        max_report_points
    };
    guard(|| {
        *out = Box::into_raw(Box::new(PwRoughPath(RoughPath::build(&path.0, &ladder.0, p, max)?)));
        Ok(PwStatus::Ok)
    })
}

/// # Safety
/// `rp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_rough_path_free(rp: *mut PwRoughPath) {
    if !rp.is_null() {
        drop(Box::from_raw(rp));
    }
}

/// `A(s,t)` as a row-major d x d matrix for grid indices `s <= t`.
///
/// # Safety
/// `rp` must be live and `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn pw_rough_path_area(
    rp: *const PwRoughPath,
    s: usize,
    t: usize,
    buf: *mut f64,
    cap: usize,
) -> PwStatus {
    let (Some(rp), false) = (rp.as_ref(), buf.is_null()) else {
        return invalid("null pointer");
    };
    let d = rp.0.dim();
    if s > t || t >= rp.0.path().len() {
        return invalid("need s <= t < len");
    }
    if cap < d * d {
        set_error("buffer_too_small", "output buffer too small");
        return PwStatus::BufferTooSmall;
    }
    guard(|| {
        let a = rp.0.area(s, t);
        ptr::copy_nonoverlapping(a.as_ptr(), buf, a.len());
        Ok(PwStatus::Ok)
    })
}

/// Largest relative Chen residual found on the report grid.
///
/// # Safety
/// `rp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_rough_path_chen_residual(rp: *const PwRoughPath) -> f64 {
    rp.as_ref().map_or(f64::NAN, |r| r.0.chen_residual_max())
}

/// JSON export of the rough path on its report grid; free with
/// `pw_string_free`.
///
/// # Safety
/// `rp` must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_rough_path_to_json(rp: *const PwRoughPath, out: *mut *mut c_char) -> PwStatus {
    let (Some(rp), false) = (rp.as_ref(), out.is_null()) else {
        return invalid("null pointer");
    };
    guard(|| {
        *out = into_c_string(serde_json::to_string(&rp.0.export())?);
        Ok(PwStatus::Ok)
    })
}

/// Runs an experiment (`verb`: generate, integrate, roughpath, verify or
/// study) from a JSON config, writing files into `out_dir`. The summary JSON
/// is returned through `summary` (may be null) and must be freed with
/// `pw_string_free`. Returns `PW_STATUS_CHECK_FAILED` when a requested check
/// did not pass.
///
/// # Safety
/// Strings must be NUL-terminated; `summary` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_run_experiment(
    config_json: *const c_char,
    verb: *const c_char,
    out_dir: *const c_char,
    summary: *mut *mut c_char,
) -> PwStatus {
    let (Some(config), Some(verb), Some(out_dir)) = (str_arg(config_json), str_arg(verb), str_arg(out_dir)) else {
        return invalid("config, verb and out_dir must be UTF-8 strings");
    };
    guard(|| {
        let cfg = ExperimentConfig::from_json(config)?;
        let verb: Verb = verb.parse()?;
        let s = run(&cfg, verb, Path::new(out_dir))?;
        if !summary.is_null() {
            *summary = into_c_string(serde_json::to_string(&s)?);
        }
        Ok(if s.all_pass {
            PwStatus::Ok
        } else {
            set_error("check_failed", "at least one requested check did not pass");
            PwStatus::CheckFailed
        })
    })
}
