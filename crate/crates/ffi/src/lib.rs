//! C ABI over `msfa_demosaic`.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `*_new`/`*_read`/operation function and released by the matching
//! `*_free`. Fallible functions return an [`MsfaStatus`] and write their
//! result through an out-pointer; on failure a message is available from
//! [`msfa_last_error_message`] on the same thread. Panics never unwind
//! into C: they are reported as `MSFA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use msfa_demosaic::classic::{bilinear_demosaic, ppi_demosaic};
use msfa_demosaic::io::{read_checkpoint, read_cube, read_pattern, write_cube, write_pattern, Checkpoint};
use msfa_demosaic::metrics::psnr;
use msfa_demosaic::net::{init_params, network_forward, NetworkConfig};
use msfa_demosaic::{apply_msfa, Error, MosaicImage, MsfaPattern as CorePattern, SpectralCube};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsfaStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A non-pointer argument was out of range or not valid UTF-8.
    InvalidArgument = 2,
    Shape = 3,
    Bounds = 4,
    Config = 5,
    DegeneratePattern = 6,
    Unsupported = 7,
    /// Malformed file contents.
    Format = 8,
    Io = 9,
    /// An internal panic was caught at the boundary.
    Panic = 10,
}

/// Spectral cube, `height × width × bands` of 32-bit floats.
pub struct MsfaCube(SpectralCube<f32>);

/// Periodic filter-array layout.
pub struct MsfaPattern(CorePattern);

/// Single-plane filter-array capture together with its pattern.
pub struct MsfaMosaic(MosaicImage<f32>);

/// Network configuration and parameters.
pub struct MsfaModel {
    config: NetworkConfig,
    params: msfa_demosaic::net::NetworkParams<f32>,
}

struct Failure(MsfaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Bounds(_) => MsfaStatus::Bounds,
            Error::Shape(_) => MsfaStatus::Shape,
            Error::Config(_) => MsfaStatus::Config,
            Error::DegeneratePattern { .. } => MsfaStatus::DegeneratePattern,
            Error::Unsupported(_) => MsfaStatus::Unsupported,
            Error::InvalidValue(_) => MsfaStatus::InvalidArgument,
            Error::Format { .. } => MsfaStatus::Format,
            Error::Io { .. } => MsfaStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("interior nul removed"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MsfaStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(MsfaStatus::Panic, format!("internal panic: {msg}")))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            MsfaStatus::Ok
        }
        Err(Failure(status, msg)) => {
            set_last_error(Some(msg));
            status
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MsfaStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure(MsfaStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message describing the last failure on this thread, or null after a
/// successful call. Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn msfa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a cube from `height·width·bands` band-major floats.
///
/// # Safety
/// `data` must point to that many readable floats; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_cube_new(
    height: usize,
    width: usize,
    bands: usize,
    data: *const f32,
    out: *mut *mut MsfaCube,
) -> MsfaStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let n = height
            .checked_mul(width)
            .and_then(|v| v.checked_mul(bands))
            .ok_or_else(|| Failure(MsfaStatus::InvalidArgument, "cube size overflows".into()))?;
        let values = std::slice::from_raw_parts(data, n).to_vec();
        emit(out, MsfaCube(SpectralCube::from_vec(height, width, bands, values)?))
    })
}

/// # Safety
/// `cube` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msfa_cube_free(cube: *mut MsfaCube) {
    release(cube)
}

/// # Safety
/// `cube` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_cube_dims(
    cube: *const MsfaCube,
    height: *mut usize,
    width: *mut usize,
    bands: *mut usize,
) -> MsfaStatus {
    guard(|| {
        let c = &borrow(cube, "cube")?.0;
        if height.is_null() || width.is_null() || bands.is_null() {
            return Err(null("dimension out-pointer"));
        }
        *height = c.height();
        *width = c.width();
        *bands = c.bands();
        Ok(())
    })
}

/// Copies the band-major values into `dst`, which must hold exactly
/// `height·width·bands` floats (`len`).
///
/// # Safety
/// `dst` must point to `len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn msfa_cube_copy_data(cube: *const MsfaCube, dst: *mut f32, len: usize) -> MsfaStatus {
    guard(|| {
        let c = &borrow(cube, "cube")?.0;
        if dst.is_null() {
            return Err(null("dst"));
        }
        if len != c.data().len() {
            return Err(Failure(
                MsfaStatus::Shape,
                format!("buffer holds {len} values, cube has {}", c.data().len()),
            ));
        }
        ptr::copy_nonoverlapping(c.data().as_ptr(), dst, len);
        Ok(())
    })
}

/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_cube_read(path: *const c_char, out: *mut *mut MsfaCube) -> MsfaStatus {
    guard(|| emit(out, MsfaCube(read_cube(path_arg(path)?)?)))
}

/// # Safety
/// `cube` must be a live handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn msfa_cube_write(cube: *const MsfaCube, path: *const c_char) -> MsfaStatus {
    guard(|| Ok(write_cube(path_arg(path)?, &borrow(cube, "cube")?.0)?))
}

/// The 4×4 layout with sixteen bands, one per cell in row-major order.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_pattern_default(out: *mut *mut MsfaPattern) -> MsfaStatus {
    guard(|| emit(out, MsfaPattern(CorePattern::default_16band())))
}

/// Pattern with `period × period` row-major cell bands.
///
/// # Safety
/// `cells` must point to `period·period` readable values.
#[no_mangle]
pub unsafe extern "C" fn msfa_pattern_new(
    period: usize,
    band_count: usize,
    cells: *const u32,
    out: *mut *mut MsfaPattern,
) -> MsfaStatus {
    guard(|| {
        if cells.is_null() {
            return Err(null("cells"));
        }
        let n = period
            .checked_mul(period)
            .ok_or_else(|| Failure(MsfaStatus::InvalidArgument, "period overflows".into()))?;
        let cells = std::slice::from_raw_parts(cells, n).iter().map(|&c| c as usize).collect();
        emit(out, MsfaPattern(CorePattern::new(period, band_count, cells)?))
    })
}

/// # Safety
/// `pattern` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msfa_pattern_free(pattern: *mut MsfaPattern) {
    release(pattern)
}

/// Reads a pattern sidecar file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_pattern_read(path: *const c_char, out: *mut *mut MsfaPattern) -> MsfaStatus {
    guard(|| emit(out, MsfaPattern(read_pattern(path_arg(path)?)?)))
}

/// # Safety
/// `pattern` must be a live handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn msfa_pattern_write(pattern: *const MsfaPattern, path: *const c_char) -> MsfaStatus {
    guard(|| Ok(write_pattern(path_arg(path)?, &borrow(pattern, "pattern")?.0)?))
}

/// Simulates capture of `cube` through `pattern`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_mosaic_apply(
    cube: *const MsfaCube,
    pattern: *const MsfaPattern,
    out: *mut *mut MsfaMosaic,
) -> MsfaStatus {
    guard(|| {
        let m = apply_msfa(&borrow(cube, "cube")?.0, &borrow(pattern, "pattern")?.0)?;
        emit(out, MsfaMosaic(m))
    })
}

/// Wraps a one-band cube holding raw mosaic samples.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_mosaic_from_plane(
    plane: *const MsfaCube,
    pattern: *const MsfaPattern,
    out: *mut *mut MsfaMosaic,
) -> MsfaStatus {
    guard(|| {
        let m = MosaicImage::from_plane(&borrow(plane, "plane")?.0, borrow(pattern, "pattern")?.0.clone())?;
        emit(out, MsfaMosaic(m))
    })
}

/// The mosaic samples as a one-band cube.
///
/// # Safety
/// `mosaic` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_mosaic_to_plane(mosaic: *const MsfaMosaic, out: *mut *mut MsfaCube) -> MsfaStatus {
    guard(|| emit(out, MsfaCube(borrow(mosaic, "mosaic")?.0.to_plane())))
}

/// # Safety
/// `mosaic` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msfa_mosaic_free(mosaic: *mut MsfaMosaic) {
    release(mosaic)
}

/// # Safety
/// `mosaic` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_demosaic_bilinear(mosaic: *const MsfaMosaic, out: *mut *mut MsfaCube) -> MsfaStatus {
    guard(|| emit(out, MsfaCube(bilinear_demosaic(&borrow(mosaic, "mosaic")?.0)?)))
}

/// Simplified pseudo-panchromatic difference baseline (period 4 only).
///
/// # Safety
/// `mosaic` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_demosaic_ppi(mosaic: *const MsfaMosaic, out: *mut *mut MsfaCube) -> MsfaStatus {
    guard(|| emit(out, MsfaCube(ppi_demosaic(&borrow(mosaic, "mosaic")?.0)?)))
}

/// Bilinear initial cube refined by `model`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_demosaic_net(
    model: *const MsfaModel,
    mosaic: *const MsfaMosaic,
    out: *mut *mut MsfaCube,
) -> MsfaStatus {
    guard(|| {
        let model = borrow(model, "model")?;
        let initial = bilinear_demosaic(&borrow(mosaic, "mosaic")?.0)?;
        let refined = network_forward(&model.config, &model.params, &initial)?.refined;
        emit(out, MsfaCube(refined))
    })
}

/// Untrained default network; refinement is the identity.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_model_init(seed: u64, out: *mut *mut MsfaModel) -> MsfaStatus {
    guard(|| {
        let config = NetworkConfig::default();
        let params = init_params::<f32>(&config, seed)?;
        emit(out, MsfaModel { config, params })
    })
}

/// Loads network config and parameters from a checkpoint; optimizer state
/// is discarded.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_model_read(path: *const c_char, out: *mut *mut MsfaModel) -> MsfaStatus {
    guard(|| {
        let Checkpoint { config, params, .. } = read_checkpoint(path_arg(path)?)?;
        emit(out, MsfaModel { config, params })
    })
}

/// Number of trainable parameters.
///
/// # Safety
/// `model` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn msfa_model_param_count(model: *const MsfaModel) -> usize {
    model.as_ref().map_or(0, |m| m.params.param_count())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msfa_model_free(model: *mut MsfaModel) {
    release(model)
}

/// Whole-cube PSNR with peak 1, in dB; +infinity for identical cubes.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msfa_psnr(reference: *const MsfaCube, test: *const MsfaCube, out: *mut f64) -> MsfaStatus {
    guard(|| {
        let db = psnr(&borrow(reference, "reference")?.0, &borrow(test, "test")?.0)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = db;
        Ok(())
    })
}
