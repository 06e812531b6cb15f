//! C ABI for `hardgrid`.
//!
//! Models and graphs are opaque handles owned by the caller and released with
//! the matching `_free` function. Every fallible call returns an [`HgStatus`];
//! on failure, [`hg_last_error_message`] describes the error for the calling
//! thread. Results are written through out-pointers only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hardgrid::config::ModelConfig;
use hardgrid::discretize::{self, export, CanonicalPointSet, PointSet};
use hardgrid::estimate::{self, McmcOptions};
use hardgrid::hardcore::{self, Graph};
use hardgrid::model::ModelSpec;
use hardgrid::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooLarge = 3,
    Io = 4,
    Failed = 5,
    Panic = 6,
}

/// A validated continuous model.
pub struct HgModel(ModelSpec);

/// A weighted hard-core graph.
pub struct HgGraph(Graph);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HgStatus {
    match e {
        Error::InvalidParameter { .. }
        | Error::Unconstrained
        | Error::Precondition(_)
        | Error::Unsorted { .. }
        | Error::Json(_)
        | Error::GraphFormat { .. } => HgStatus::InvalidArgument,
        Error::TooManyVertices { .. } | Error::GraphTooLarge { .. } | Error::OracleTooLarge { .. } => HgStatus::TooLarge,
        Error::Io(_) => HgStatus::Io,
        _ => HgStatus::Failed,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (HgStatus, String)>) -> HgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            HgStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            HgStatus::Panic
        }
    }
}

fn lib<T>(r: hardgrid::Result<T>) -> Result<T, (HgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (HgStatus, String) {
    (HgStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (HgStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (HgStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (HgStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next `hg_` call on the same thread.
#[no_mangle]
pub extern "C" fn hg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON model configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_model_from_json(json: *const c_char, out: *mut *mut HgModel) -> HgStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        let model = lib(ModelConfig::from_json(text).and_then(|c| c.to_model()))?;
        *out = Box::into_raw(Box::new(HgModel(model)));
        Ok(())
    })
}

/// Single-type hard spheres of radius `radius` in `[0, side_length]^dimension`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_model_hard_sphere(
    dimension: usize,
    side_length: f64,
    radius: f64,
    fugacity: f64,
    out: *mut *mut HgModel,
) -> HgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let model = lib(ModelSpec::hard_sphere(dimension, side_length, radius, fugacity))?;
        *out = Box::into_raw(Box::new(HgModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hg_model_free(model: *mut HgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Builds the hard-core graph on the smallest grid meeting discretization
/// error `eps_d`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_discretize(model: *const HgModel, eps_d: f64, out: *mut *mut HgGraph) -> HgStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let out = out_arg(out, "out")?;
        let choice = lib(discretize::resolution_for_error_adaptive(model, eps_d))?;
        let grid = lib(CanonicalPointSet::with_cells_per_axis(model.region().clone(), choice.cells_per_axis))?;
        let graph = lib(discretize::build_graph(model, &PointSet::Canonical(grid)))?;
        *out = Box::into_raw(Box::new(HgGraph(graph.to_graph())));
        Ok(())
    })
}

/// Reads a graph written by `hardgrid discretize`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_from_file(path: *const c_char, out: *mut *mut HgGraph) -> HgStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let path = Path::new(path);
        let graph = if export::is_text_graph(path) {
            lib(export::read_text(path))?
        } else {
            lib(export::read_binary(path))?.graph
        };
        *out = Box::into_raw(Box::new(HgGraph(graph)));
        Ok(())
    })
}

/// Graph on `num_vertices` vertices with the given weights and `num_edges`
/// edges stored as consecutive endpoint pairs in `edges`.
///
/// # Safety
/// `weights` must hold `num_vertices` values, `edges` `2 * num_edges` values
/// (either may be null when its length is zero), and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_from_edges(
    num_vertices: usize,
    weights: *const f64,
    num_edges: usize,
    edges: *const u32,
    out: *mut *mut HgGraph,
) -> HgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let weights = slice(weights, num_vertices, "weights")?;
        let flat = slice(edges, 2 * num_edges, "edges")?;
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0] as usize, p[1] as usize)).collect();
        let graph = lib(Graph::from_edges(weights.to_vec(), &pairs))?;
        *out = Box::into_raw(Box::new(HgGraph(graph)));
        Ok(())
    })
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], (HgStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_num_vertices(graph: *const HgGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_vertices())
}

/// # Safety
/// `graph` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_free(graph: *mut HgGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

unsafe fn with_graph(
    graph: *const HgGraph,
    out: *mut f64,
    f: impl FnOnce(&Graph) -> hardgrid::Result<f64>,
) -> HgStatus {
    guard(|| {
        let g = &graph.as_ref().ok_or_else(|| null("graph"))?.0;
        let out = out_arg(out, "out")?;
        *out = lib(f(g))?;
        Ok(())
    })
}

/// Exact `ln Z` by enumeration (at most 30 vertices).
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_exact_log_z(graph: *const HgGraph, out: *mut f64) -> HgStatus {
    with_graph(graph, out, |g| hardcore::exact_log_z(g).map(|z| z.ln()))
}

/// Randomized estimate of `ln Z` within `eps_a` with probability 3/4.
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_estimate_mcmc(graph: *const HgGraph, eps_a: f64, seed: u64, out: *mut f64) -> HgStatus {
    with_graph(graph, out, |g| {
        estimate::estimate_log_z_mcmc(g, eps_a, seed, &McmcOptions::default()).map(|e| e.ln_z.ln())
    })
}

/// Deterministic correlation-decay estimate of `ln Z`.
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_estimate_weitz(graph: *const HgGraph, eps_a: f64, out: *mut f64) -> HgStatus {
    with_graph(graph, out, |g| estimate::estimate_log_z_weitz(g, eps_a).map(|e| e.ln_z.ln()))
}

/// `ln Z` of hard rods of radius `radius` on `[0, side_length]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_tonks_log_z(side_length: f64, radius: f64, fugacity: f64, out: *mut f64) -> HgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = lib(hardgrid::continuous::tonks_log_z(side_length, radius, fugacity))?.ln();
        Ok(())
    })
}
