//! C interface to paracalc.
//!
//! Objects are opaque handles released with their `*_free` function. Every
//! call returns a [`PcStatus`]; on failure the message is available from
//! [`pc_last_error_message`] on the same thread until the next failing call.
//! Panics never cross the boundary and surface as `PC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use paracalc::lab::{run_experiment, ExperimentConfig};
use paracalc::operators::ApplyPlan;
use paracalc::spectral::sobolev_norm;
use paracalc::symbols::build_symbol;
use paracalc::{Error, Field, FilterBank, Grid, GridSpec, SharedSymbol, C64};

/// Result codes. The nonzero values below 10 match the exit codes of the
/// `paracalc` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    /// Configuration, input, capability or class error.
    Config = 2,
    /// Numerical contract failure.
    Numerical = 3,
    /// Hypothesis gate rejected the request.
    Hypothesis = 4,
    /// A required pointer argument was null.
    NullPointer = 10,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 11,
    /// Internal panic; the library state is still usable.
    Panic = 12,
}

/// Periodic sampling grid.
pub struct PcGrid(Arc<Grid>);

/// Complex field sampled on a grid.
pub struct PcField(Field);

/// Catalogue symbol bound to a grid.
pub struct PcSymbol(SharedSymbol);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            let status = match e.exit_code() {
                3 => PcStatus::Numerical,
                4 => PcStatus::Hypothesis,
                _ => PcStatus::Config,
            };
            set_error(e.to_string());
            status
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PcStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            PcStatus::InvalidUtf8
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

/// Message of the last failing call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Creates a grid of `n_pts` points per axis in dimension 1 or 2. A period
/// `<= 0` selects the default period of the dimension.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pc_grid_new(dim: u32, n_pts: u64, period: f64, out: *mut *mut PcGrid) -> PcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec = if period > 0.0 {
            GridSpec::new(dim as usize, n_pts as usize, period)
        } else {
            GridSpec::with_default_period(dim as usize, n_pts as usize)
        };
        let grid = Grid::new(spec)?;
        *out = Box::into_raw(Box::new(PcGrid(grid)));
        Ok(())
    })
}

/// Total number of samples, `n_pts^dim`; 0 for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn pc_grid_len(grid: *const PcGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// `grid` must be null or a handle from [`pc_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_grid_free(grid: *mut PcGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Max deviation of the Littlewood–Paley partition from 1 on the grid lattice.
///
/// # Safety
/// `grid` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_partition_deviation(grid: *const PcGrid, out: *mut f64) -> PcStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let out = out_ptr(out, "out")?;
        *out = FilterBank::new(g.0.clone())?.partition_deviation();
        Ok(())
    })
}

/// Builds a field from `len` samples in row-major order. `im` may be null for a
/// real field.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_field_from_samples(
    grid: *const PcGrid,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut PcField,
) -> PcStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let out = out_ptr(out, "out")?;
        if re.is_null() {
            return Err(Fail::Null("re"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let samples: Vec<C64> = if im.is_null() {
            re.iter().map(|&x| C64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&x, &y)| C64::new(x, y)).collect()
        };
        let field = Field::new(g.0.clone(), samples)?;
        *out = Box::into_raw(Box::new(PcField(field)));
        Ok(())
    })
}

/// Copies the samples of `field` into `re` and `im` (either may be null).
/// `len` must equal the grid size.
///
/// # Safety
/// Non-null `re`/`im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_field_samples(field: *const PcField, re: *mut f64, im: *mut f64, len: usize) -> PcStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let s = f.0.samples();
        if len != s.len() {
            return Err(Error::Input(format!("buffer holds {len} samples, field has {}", s.len())).into());
        }
        if !re.is_null() {
            let re = std::slice::from_raw_parts_mut(re, len);
            for (r, z) in re.iter_mut().zip(s) {
                *r = z.re;
            }
        }
        if !im.is_null() {
            let im = std::slice::from_raw_parts_mut(im, len);
            for (i, z) in im.iter_mut().zip(s) {
                *i = z.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn pc_field_free(field: *mut PcField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// `H^s` norm of a field.
///
/// # Safety
/// `field` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_sobolev_norm(field: *const PcField, s: f64, out: *mut f64) -> PcStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let out = out_ptr(out, "out")?;
        *out = sobolev_norm(&f.0, s);
        Ok(())
    })
}

/// Builds a symbol from a catalogue id such as `japanese:m=1.5` or `dn`.
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_symbol_from_catalogue(
    grid: *const PcGrid,
    id: *const c_char,
    out: *mut *mut PcSymbol,
) -> PcStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let id = text(id, "id")?;
        let out = out_ptr(out, "out")?;
        let sym = build_symbol(&g.0, id)?;
        *out = Box::into_raw(Box::new(PcSymbol(sym)));
        Ok(())
    })
}

/// # Safety
/// `symbol` must be null or a live symbol handle.
#[no_mangle]
pub unsafe extern "C" fn pc_symbol_free(symbol: *mut PcSymbol) {
    if !symbol.is_null() {
        drop(Box::from_raw(symbol));
    }
}

/// Applies `Op(σ)` to `u` with the automatically chosen method. The result is a
/// new field handle.
///
/// # Safety
/// `symbol` and `u` must be live handles on the same grid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_op_apply(symbol: *const PcSymbol, u: *const PcField, out: *mut *mut PcField) -> PcStatus {
    guard(|| {
        let sym = deref(symbol, "symbol")?;
        let u = deref(u, "u")?;
        let out = out_ptr(out, "out")?;
        let v = ApplyPlan::auto(sym.0.clone())?.apply(&u.0)?;
        *out = Box::into_raw(Box::new(PcField(v)));
        Ok(())
    })
}

/// Runs one experiment described by a JSON object and returns the report as
/// JSON in `*out`, to be released with [`pc_string_free`]. A report whose pass
/// flag is false still returns `PC_STATUS_OK`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_experiment_json(config_json: *const c_char, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let json = text(config_json, "config_json")?;
        let out = out_ptr(out, "out")?;
        let cfg: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("malformed experiment: {e}")))?;
        let report = run_experiment(&cfg)?;
        let body = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        let c = CString::new(body).map_err(|e| Error::Numerical(e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
