//! C ABI over the `hyperperc` library.
//!
//! Every fallible function returns an [`HpStatus`]; on failure the message
//! is kept per thread and read with [`hp_last_error`]. Lattices and
//! generators are opaque handles released with their `_free` functions.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hyperperc::hypermap::{builtin, find_self_duality, LatticeSpec, PeriodicMap};
use hyperperc::ncpart::{enumerate_nc, vectors_from_json};
use hyperperc::percsim::{estimate_crossing, scan_rect, BoundaryMode, Direction, Window};
use hyperperc::szgen::{critical_point, Generator};
use hyperperc::Error;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HpStatus {
    HpOk = 0,
    HpNullArgument = 1,
    HpInvalidInput = 2,
    HpCapacity = 3,
    HpNoRoot = 4,
    HpEmbedding = 5,
    HpUnsupportedMode = 6,
    HpIo = 7,
    HpPanic = 8,
}

/// A periodic hyperlattice.
pub struct HpLattice {
    map: PeriodicMap,
}

/// A generator graph with terminals.
pub struct HpGenerator {
    generator: Generator,
}

/// Crossing estimate over independent trials.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HpCrossingStats {
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci95: f64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> HpStatus {
    match e {
        Error::InvalidInput(_) | Error::Json(_) => HpStatus::HpInvalidInput,
        Error::Capacity(_) => HpStatus::HpCapacity,
        Error::Embedding(_) => HpStatus::HpEmbedding,
        Error::UnsupportedMode(_) => HpStatus::HpUnsupportedMode,
        Error::Io(_) => HpStatus::HpIo,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (HpStatus, String)>) -> HpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HpStatus::HpOk
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HpStatus::HpPanic
        }
    }
}

fn lift<T>(r: hyperperc::Result<T>) -> Result<T, (HpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (HpStatus, String) {
    (HpStatus::HpNullArgument, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HpStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (HpStatus::HpInvalidInput, format!("{what} is not UTF-8")))
}

/// Message of the last failure on this thread (empty after a success). The
/// pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of non-crossing partitions of `k` points.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_nc_count(k: usize, out: *mut usize) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let n = lift(enumerate_nc(k))?.len();
        // SAFETY: checked non-null above.
        unsafe { *out = n };
        Ok(())
    })
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    // SAFETY: caller checked `out` is non-null.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Built-in lattice: `tri`, `tri-dual`, `tri-bond` or `hex-bond`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_lattice_builtin(name: *const c_char, out: *mut *mut HpLattice) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = unsafe { read_str(name, "name") }?;
        let map = lift(builtin(name))?;
        unsafe { store(out, HpLattice { map }) };
        Ok(())
    })
}

/// Lattice from the JSON lattice format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_lattice_from_json(json: *const c_char, out: *mut *mut HpLattice) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { read_str(json, "json") }?;
        let map = lift(LatticeSpec::from_json(text).and_then(|s| s.build()))?;
        unsafe { store(out, HpLattice { map }) };
        Ok(())
    })
}

/// The dual lattice.
///
/// # Safety
/// `lattice` must come from this library; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_lattice_dual(lattice: *const HpLattice, out: *mut *mut HpLattice) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller passes a live handle or null.
        let l = unsafe { lattice.as_ref() }.ok_or_else(|| null("lattice"))?;
        unsafe { store(out, HpLattice { map: l.map.compute_dual() }) };
        Ok(())
    })
}

/// Vertices and hyperedges per fundamental domain.
///
/// # Safety
/// `lattice` must come from this library; outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hp_lattice_counts(
    lattice: *const HpLattice,
    vertices: *mut usize,
    hyperedges: *mut usize,
) -> HpStatus {
    guard(|| {
        let l = unsafe { lattice.as_ref() }.ok_or_else(|| null("lattice"))?;
        if vertices.is_null() || hyperedges.is_null() {
            return Err(null("output"));
        }
        let view = l.map.hyper_view();
        unsafe {
            *vertices = view.vertices.len();
            *hyperedges = view.hyperedges.len();
        }
        Ok(())
    })
}

/// Releases a lattice. Null is ignored.
///
/// # Safety
/// `lattice` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hp_lattice_free(lattice: *mut HpLattice) {
    if !lattice.is_null() {
        // SAFETY: the handle was created by Box::into_raw.
        drop(unsafe { Box::from_raw(lattice) });
    }
}

/// Whether the model given by `vectors_json` (one vector or an array by
/// orbit slot) is self-dual on the lattice.
///
/// # Safety
/// Pointers must be valid; `vectors_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hp_lattice_self_dual(
    lattice: *const HpLattice,
    vectors_json: *const c_char,
    out: *mut bool,
) -> HpStatus {
    guard(|| {
        let l = unsafe { lattice.as_ref() }.ok_or_else(|| null("lattice"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let vectors = lift(vectors_from_json(unsafe { read_str(vectors_json, "vectors_json") }?))?;
        let found = lift(find_self_duality(&l.map, &vectors))?.is_some();
        unsafe { *out = found };
        Ok(())
    })
}

/// Horizontal crossing of a square of `size` cells, in an open window with
/// a two-cell margin.
///
/// # Safety
/// Pointers must be valid; `vectors_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hp_estimate_crossing(
    lattice: *const HpLattice,
    vectors_json: *const c_char,
    size: usize,
    trials: u64,
    seed: u64,
    out: *mut HpCrossingStats,
) -> HpStatus {
    guard(|| {
        let l = unsafe { lattice.as_ref() }.ok_or_else(|| null("lattice"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let vectors = lift(vectors_from_json(unsafe { read_str(vectors_json, "vectors_json") }?))?;
        let rect = scan_rect(&l.map, size, 1.0);
        let window = lift(Window::around_rect(&l.map, rect, 2, BoundaryMode::Open))?;
        let s = lift(estimate_crossing(&window, &vectors, rect, Direction::Horizontal, trials, seed))?;
        unsafe {
            *out = HpCrossingStats { trials: s.trials, hits: s.hits, estimate: s.estimate, ci95: s.ci95, seed: s.seed };
        }
        Ok(())
    })
}

/// Built-in generator: `triangle`, `star` or `bond`, with bond probability `p`.
///
/// # Safety
/// `name` must be NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_generator_builtin(name: *const c_char, out: *mut *mut HpGenerator) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let generator = match unsafe { read_str(name, "name") }? {
            "triangle" => Generator::triangle(),
            "star" => Generator::star(),
            "bond" => Generator::single_bond(),
            other => return Err((HpStatus::HpInvalidInput, format!("unknown generator '{other}'"))),
        };
        unsafe { store(out, HpGenerator { generator }) };
        Ok(())
    })
}

/// Generator from the JSON generator format.
///
/// # Safety
/// `json` must be NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_generator_from_json(json: *const c_char, out: *mut *mut HpGenerator) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let generator = lift(Generator::from_json(unsafe { read_str(json, "json") }?))?;
        unsafe { store(out, HpGenerator { generator }) };
        Ok(())
    })
}

/// Releases a generator. Null is ignored.
///
/// # Safety
/// `generator` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hp_generator_free(generator: *mut HpGenerator) {
    if !generator.is_null() {
        // SAFETY: the handle was created by Box::into_raw.
        drop(unsafe { Box::from_raw(generator) });
    }
}

/// First root in (0, 1) of the generator's self-duality equation.
/// Returns `HP_NO_ROOT` (and leaves `root` untouched) if there is none.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hp_generator_critical_point(generator: *const HpGenerator, root: *mut f64) -> HpStatus {
    guard(|| {
        let g = unsafe { generator.as_ref() }.ok_or_else(|| null("generator"))?;
        if root.is_null() {
            return Err(null("root"));
        }
        let report = lift(critical_point(&g.generator))?;
        match report.root() {
            Some(x) => {
                unsafe { *root = x };
                Ok(())
            }
            None => Err((HpStatus::HpNoRoot, "no sign change on (0, 1)".into())),
        }
    })
}

#[doc(hidden)]
pub fn last_error_string() -> String {
    // SAFETY: hp_last_error returns a valid NUL-terminated pointer.
    unsafe { CStr::from_ptr(hp_last_error()) }.to_string_lossy().into_owned()
}
