//! C interface to `sca_noise`.
//!
//! Every fallible call returns a [`ScaStatus`]; on failure the message is kept
//! per thread and can be read with [`sca_last_error_message`]. Handles are
//! opaque and owned by the caller, who frees them with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sca_noise::allocators::{SolveOptions, Solver};
use sca_noise::channel::{NoiseAllocation, SubchannelSet};
use sca_noise::convexity::convexity_boundary;
use sca_noise::error::Error;
use sca_noise::leakage::evaluate;
use sca_noise::mmse::{InputModel, TabulatedMmse};

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownSolver = 3,
    UnknownModel = 4,
    /// A solver or integral did not converge, or the instance is not convex.
    Numeric = 5,
    /// A file could not be read or parsed.
    Input = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A set of leakage points with their signal power and physical noise.
pub struct ScaChannels(SubchannelSet);

/// An input model for the leaked symbol.
pub struct ScaModel(InputModel);

/// Artificial noise per point, with the dual level of the solve.
pub struct ScaAllocation(NoiseAllocation);

/// Aggregate leakage of an allocation, in nats.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScaLeakage {
    pub total_mi: f64,
    pub max_mi: f64,
    pub average_mi: f64,
    /// Fano lower bound on the error probability of a 256-ary key guess.
    pub fano_pe_lower: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg).unwrap_or_else(|e| {
        let bytes: Vec<u8> = e.into_vec().into_iter().filter(|&b| b != 0).collect();
        CString::new(bytes).unwrap_or_default()
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

struct Failure(ScaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Unsupported { .. } => {
                ScaStatus::InvalidArgument
            }
            Error::BisectionFailed { .. }
            | Error::QuadratureFailed { .. }
            | Error::NonConvex(_)
            | Error::Extrapolation { .. }
            | Error::TargetUnreachable { .. } => ScaStatus::Numeric,
            Error::Parse { .. } | Error::Io { .. } => ScaStatus::Input,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: ScaStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, recording any error or panic for `sca_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ScaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ScaStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(ScaStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ScaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => Err(fail(ScaStatus::NullPointer, format!("{what} is null"))),
        (false, n) => Ok(std::slice::from_raw_parts(p, n)),
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(ScaStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(ScaStatus::NullPointer, format!("{what} is null")))
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sca_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a channel set from `len` powers and physical noise variances.
///
/// # Safety
/// `power` and `noise` must each point to `len` readable doubles, and `out`
/// to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sca_channels_new(
    power: *const f64,
    noise: *const f64,
    len: usize,
    out: *mut *mut ScaChannels,
) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let power = slice_arg(power, len, "power")?.to_vec();
        let noise = slice_arg(noise, len, "noise")?.to_vec();
        let set = SubchannelSet::new(power, noise)?;
        *out = Box::into_raw(Box::new(ScaChannels(set)));
        Ok(())
    })
}

/// Reads a channel set from an `index,P,Z` CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sca_channels_load(path: *const c_char, out: *mut *mut ScaChannels) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let set = SubchannelSet::load(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(ScaChannels(set)));
        Ok(())
    })
}

/// Number of points in the set; 0 for NULL.
///
/// # Safety
/// `channels` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sca_channels_len(channels: *const ScaChannels) -> usize {
    channels.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `channels` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sca_channels_free(channels: *mut ScaChannels) {
    if !channels.is_null() {
        drop(Box::from_raw(channels));
    }
}

/// Builds an input model by name: `gaussian`, `binary`, `exponential`, or
/// `tabulated` with `table_path` naming an `rho,mmse` CSV. `table_path` is
/// ignored by the other models and may be NULL.
///
/// # Safety
/// `name` must be a NUL-terminated string, `table_path` NULL or one, and
/// `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sca_model_new(
    name: *const c_char,
    table_path: *const c_char,
    out: *mut *mut ScaModel,
) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let model = match name {
            "tabulated" => {
                if table_path.is_null() {
                    return Err(fail(ScaStatus::InvalidArgument, "model tabulated needs a table path"));
                }
                InputModel::Tabulated(TabulatedMmse::load(str_arg(table_path, "table_path")?)?)
            }
            _ => InputModel::from_name(name)
                .ok_or_else(|| fail(ScaStatus::UnknownModel, format!("unknown input model `{name}`")))?,
        };
        *out = Box::into_raw(Box::new(ScaModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sca_model_free(model: *mut ScaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// MMSE of estimating the symbol at SNR `rho`.
///
/// # Safety
/// `model` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn sca_mmse(model: *const ScaModel, rho: f64, out: *mut f64) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ref_arg(model, "model")?.0.mmse(rho)?;
        Ok(())
    })
}

/// Mutual information `I(rho)` in nats.
///
/// # Safety
/// `model` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn sca_mutual_info(model: *const ScaModel, rho: f64, out: *mut f64) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ref_arg(model, "model")?.0.mutual_info(rho)?;
        Ok(())
    })
}

/// Smallest SNR in `[rho_lo, rho_hi]` past which the model fails the
/// convexity certificate. Writes 0 to `found` and leaves `out` alone when the
/// whole range is certified.
///
/// # Safety
/// `model` must be a live handle; `out` and `found` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sca_convexity_boundary(
    model: *const ScaModel,
    rho_lo: f64,
    rho_hi: f64,
    out: *mut f64,
    found: *mut bool,
) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let found = out_arg(found, "found")?;
        match convexity_boundary(&ref_arg(model, "model")?.0, rho_lo, rho_hi)? {
            Some(b) => {
                *out = b;
                *found = true;
            }
            None => *found = false,
        }
        Ok(())
    })
}

/// Spends `budget` of artificial noise with the named solver: `uniform`,
/// `gaussian_total`, `sibson` (needs `alpha`), `minimax` or `arbitrary`.
/// `alpha` is ignored by the other solvers. `model` is only read by
/// `arbitrary`; NULL means the Gaussian model.
///
/// # Safety
/// `channels` must be a live handle, `model` NULL or a live handle, `solver`
/// a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sca_allocate(
    channels: *const ScaChannels,
    model: *const ScaModel,
    solver: *const c_char,
    alpha: f64,
    budget: f64,
    out: *mut *mut ScaAllocation,
) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let channels = &ref_arg(channels, "channels")?.0;
        let name = str_arg(solver, "solver")?;
        let alpha = (name == "sibson").then_some(alpha);
        let solver = match Solver::from_name(name, alpha) {
            None => return Err(fail(ScaStatus::UnknownSolver, format!("unknown solver `{name}`"))),
            Some(s) => s?,
        };
        let gaussian = InputModel::Gaussian;
        let model = model.as_ref().map_or(&gaussian, |m| &m.0);
        let alloc = solver.solve(channels, model, &SolveOptions::new(budget)?)?;
        *out = Box::into_raw(Box::new(ScaAllocation(alloc)));
        Ok(())
    })
}

/// Number of points in the allocation; 0 for NULL.
///
/// # Safety
/// `alloc` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sca_allocation_len(alloc: *const ScaAllocation) -> usize {
    alloc.as_ref().map_or(0, |a| a.0.len())
}

/// Copies the noise variances into `buf`, which holds `cap` doubles.
///
/// # Safety
/// `alloc` must be a live handle and `buf` must hold `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sca_allocation_noise(alloc: *const ScaAllocation, buf: *mut f64, cap: usize) -> ScaStatus {
    guard(|| {
        let noise = ref_arg(alloc, "alloc")?.0.noise();
        if cap < noise.len() {
            return Err(fail(
                ScaStatus::BufferTooSmall,
                format!("buffer holds {cap} values, allocation has {}", noise.len()),
            ));
        }
        if !noise.is_empty() {
            let buf = out_arg(buf, "buf")?;
            ptr::copy_nonoverlapping(noise.as_ptr(), buf, noise.len());
        }
        Ok(())
    })
}

/// Dual level of the solve; NaN for NULL.
///
/// # Safety
/// `alloc` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sca_allocation_dual(alloc: *const ScaAllocation) -> f64 {
    alloc.as_ref().map_or(f64::NAN, |a| a.0.dual)
}

/// True when the solve is only known to be stationary, not optimal.
///
/// # Safety
/// `alloc` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sca_allocation_stationary_only(alloc: *const ScaAllocation) -> bool {
    alloc.as_ref().is_some_and(|a| a.0.stationary_only)
}

/// # Safety
/// `alloc` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sca_allocation_free(alloc: *mut ScaAllocation) {
    if !alloc.is_null() {
        drop(Box::from_raw(alloc));
    }
}

/// Leakage left by `alloc` on `channels` under `model`.
///
/// # Safety
/// `channels`, `alloc` and `model` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sca_evaluate(
    channels: *const ScaChannels,
    alloc: *const ScaAllocation,
    model: *const ScaModel,
    out: *mut ScaLeakage,
) -> ScaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let report = evaluate(
            &ref_arg(channels, "channels")?.0,
            &ref_arg(alloc, "alloc")?.0,
            &ref_arg(model, "model")?.0,
        )?;
        *out = ScaLeakage {
            total_mi: report.total_mi,
            max_mi: report.max_mi,
            average_mi: report.average_mi(),
            fano_pe_lower: report.fano_pe_lower,
        };
        Ok(())
    })
}
