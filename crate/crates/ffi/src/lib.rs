//! C ABI for the nls-lab core: opaque handles, status codes, and a small
//! last-error channel. The header `include/nls_lab.h` is generated by
//! cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use num_complex::Complex64;

use nls_lab::field::{sample, Field, Space};
use nls_lab::grid::Grid;

/// Status code returned by every fallible ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    WrongSpace = 3,
    NonFinite = 4,
    Blowup = 5,
    Io = 6,
    Utf8 = 7,
}

/// Which representation a field handle currently holds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsSpace {
    Physical = 0,
    Spectral = 1,
}

/// Opaque periodic grid handle.
pub struct NlsGrid(Grid);

/// Opaque field handle (one time slice).
pub struct NlsField(Field);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn store_error(status: NlsStatus, err: &nls_lab::Error) -> NlsStatus {
    let msg = CString::new(err.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
    status
}

fn classify(err: nls_lab::Error) -> NlsStatus {
    use nls_lab::Error::*;
    let status = match &err {
        InvalidGrid(_) | InvalidArgument(_) | GridMismatch | Snapshot { .. } => {
            NlsStatus::InvalidArgument
        }
        WrongSpace { .. } => NlsStatus::WrongSpace,
        NonFinite { .. } => NlsStatus::NonFinite,
        Blowup(_) => NlsStatus::Blowup,
        Io(_) => NlsStatus::Io,
    };
    store_error(status, &err)
}

fn invalid(message: &str) -> NlsStatus {
    store_error(
        NlsStatus::InvalidArgument,
        &nls_lab::Error::InvalidArgument(message.to_string()),
    )
}

/// Copies the last error message on this thread into `buf` (NUL
/// terminated, truncated to `len`); returns the full message length.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn nls_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let borrow = slot.borrow();
        let Some(msg) = borrow.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Builds a periodic grid handle; `out` receives ownership on Ok.
///
/// # Safety
/// `out` must be a valid pointer to an `*mut NlsGrid` slot.
#[no_mangle]
pub unsafe extern "C" fn nls_grid_new(
    dim: usize,
    points_per_axis: usize,
    box_length: f64,
    out: *mut *mut NlsGrid,
) -> NlsStatus {
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    match Grid::new(dim, points_per_axis, box_length) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(NlsGrid(g)));
            NlsStatus::Ok
        }
        Err(e) => classify(e),
    }
}

/// Releases a grid handle. Null is a no-op.
///
/// # Safety
/// `grid` must be a handle from this ABI, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nls_grid_free(grid: *mut NlsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Total number of nodes Nᵈ of the grid.
///
/// # Safety
/// `grid` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nls_grid_len(grid: *const NlsGrid) -> usize {
    grid.as_ref().map(|g| g.0.len()).unwrap_or(0)
}

/// Copies the mathematically ordered per-axis wavenumbers (N entries).
///
/// # Safety
/// `grid` must be a live handle and `out` point to `len` writable f64s.
#[no_mangle]
pub unsafe extern "C" fn nls_grid_wavenumbers(
    grid: *const NlsGrid,
    out: *mut f64,
    len: usize,
) -> NlsStatus {
    let Some(g) = grid.as_ref() else {
        return NlsStatus::NullPointer;
    };
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    let k = g.0.wavenumbers();
    if len < k.len() {
        return invalid("wavenumber buffer too small");
    }
    std::ptr::copy_nonoverlapping(k.as_ptr(), out, k.len());
    NlsStatus::Ok
}

/// Builds a field from interleaved (re, im) values of length 2·Nᵈ.
///
/// # Safety
/// `grid` must be live; `values` must point to `2 * value_count` f64s;
/// `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nls_field_from_values(
    grid: *const NlsGrid,
    values: *const f64,
    value_count: usize,
    space: NlsSpace,
    out: *mut *mut NlsField,
) -> NlsStatus {
    let Some(g) = grid.as_ref() else {
        return NlsStatus::NullPointer;
    };
    if values.is_null() || out.is_null() {
        return NlsStatus::NullPointer;
    }
    let raw = std::slice::from_raw_parts(values, 2 * value_count);
    let complex: Vec<Complex64> = raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    let space = match space {
        NlsSpace::Physical => Space::Physical,
        NlsSpace::Spectral => Space::Spectral,
    };
    match Field::new(g.0, space, complex) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(NlsField(f)));
            NlsStatus::Ok
        }
        Err(e) => classify(e),
    }
}

/// Samples amplitude·exp(-|x-center|²/(2·width²)) on the grid.
///
/// # Safety
/// `grid` must be live; `center` must point to `dim` f64s or be null
/// (origin); `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nls_field_gaussian(
    grid: *const NlsGrid,
    amplitude: f64,
    width: f64,
    center: *const f64,
    out: *mut *mut NlsField,
) -> NlsStatus {
    let Some(g) = grid.as_ref() else {
        return NlsStatus::NullPointer;
    };
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    if !(width > 0.0) {
        return invalid("gaussian width must be positive");
    }
    let c: Vec<f64> = if center.is_null() {
        vec![0.0; g.0.dim()]
    } else {
        std::slice::from_raw_parts(center, g.0.dim()).to_vec()
    };
    match sample(&g.0, move |x| {
        let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        Complex64::new(amplitude * (-r2 / (2.0 * width * width)).exp(), 0.0)
    }) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(NlsField(f)));
            NlsStatus::Ok
        }
        Err(e) => classify(e),
    }
}

/// Releases a field handle. Null is a no-op.
///
/// # Safety
/// `field` must be a handle from this ABI, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nls_field_free(field: *mut NlsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of complex values stored in the field.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nls_field_len(field: *const NlsField) -> usize {
    field.as_ref().map(|f| f.0.values().len()).unwrap_or(0)
}

/// Current representation of the field.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nls_field_space(field: *const NlsField) -> NlsSpace {
    match field.as_ref().map(|f| f.0.space()) {
        Some(Space::Spectral) => NlsSpace::Spectral,
        _ => NlsSpace::Physical,
    }
}

/// Copies interleaved (re, im) values; `len` counts f64 slots (2·Nᵈ).
///
/// # Safety
/// `field` must be live and `out` point to `len` writable f64s.
#[no_mangle]
pub unsafe extern "C" fn nls_field_values(
    field: *const NlsField,
    out: *mut f64,
    len: usize,
) -> NlsStatus {
    let Some(f) = field.as_ref() else {
        return NlsStatus::NullPointer;
    };
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    let values = f.0.values();
    if len < 2 * values.len() {
        return invalid("value buffer too small");
    }
    for (i, v) in values.iter().enumerate() {
        *out.add(2 * i) = v.re;
        *out.add(2 * i + 1) = v.im;
    }
    NlsStatus::Ok
}

unsafe fn field_op(
    field: *const NlsField,
    out: *mut *mut NlsField,
    op: impl FnOnce(&Field) -> nls_lab::Result<Field>,
) -> NlsStatus {
    let Some(f) = field.as_ref() else {
        return NlsStatus::NullPointer;
    };
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    match op(&f.0) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(NlsField(result)));
            NlsStatus::Ok
        }
        Err(e) => classify(e),
    }
}

/// Unitary forward transform (physical → spectral).
///
/// # Safety
/// `field` must be live; `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nls_fft(field: *const NlsField, out: *mut *mut NlsField) -> NlsStatus {
    field_op(field, out, nls_lab::fft::fft)
}

/// Unitary inverse transform (spectral → physical).
///
/// # Safety
/// `field` must be live; `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nls_ifft(field: *const NlsField, out: *mut *mut NlsField) -> NlsStatus {
    field_op(field, out, nls_lab::fft::ifft)
}

/// Free Schrödinger evolution e^{itΔ} of a physical field.
///
/// # Safety
/// `field` must be live; `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nls_free_propagate(
    field: *const NlsField,
    t: f64,
    out: *mut *mut NlsField,
) -> NlsStatus {
    field_op(field, out, |f| nls_lab::propagator::free_propagate(f, t))
}

/// One full Strang evolution over [0, t_final]; writes the final state.
///
/// # Safety
/// `field` must be live; `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nls_strang_evolve(
    field: *const NlsField,
    lambda: f64,
    p: f64,
    t_final: f64,
    dt: f64,
    blowup_threshold: f64,
    out: *mut *mut NlsField,
) -> NlsStatus {
    field_op(field, out, |f| {
        let mut cfg = nls_lab::solver::SolverConfig::new(lambda, p, t_final, dt, f.grid().dim())?;
        cfg.blowup_threshold = blowup_threshold;
        cfg.validate()?;
        let run = nls_lab::solver::evolve(f, &cfg)?;
        Ok(run
            .trajectory
            .slices()
            .last()
            .expect("trajectory has slices")
            .clone())
    })
}

unsafe fn scalar_op(
    field: *const NlsField,
    out: *mut f64,
    op: impl FnOnce(&Field) -> nls_lab::Result<f64>,
) -> NlsStatus {
    let Some(f) = field.as_ref() else {
        return NlsStatus::NullPointer;
    };
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    match op(&f.0) {
        Ok(v) => {
            *out = v;
            NlsStatus::Ok
        }
        Err(e) => classify(e),
    }
}

/// Discrete Lᵖ norm; pass `p = INFINITY` for the grid maximum.
///
/// # Safety
/// `field` must be live; `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn nls_lp_norm(
    field: *const NlsField,
    p: f64,
    out: *mut f64,
) -> NlsStatus {
    scalar_op(field, out, |f| nls_lab::functionals::lp_norm(f, p))
}

/// Spectral Sobolev norm of integer order k.
///
/// # Safety
/// `field` must be live; `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn nls_hk_norm(
    field: *const NlsField,
    k: u32,
    out: *mut f64,
) -> NlsStatus {
    scalar_op(field, out, |f| nls_lab::functionals::hk_norm(f, k))
}

/// Mass ‖u‖²_{L²}.
///
/// # Safety
/// `field` must be live; `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn nls_mass(field: *const NlsField, out: *mut f64) -> NlsStatus {
    scalar_op(field, out, nls_lab::functionals::mass)
}

/// Energy ∫|∇u|² + (λ/(p+2))∫|u|^{p+2}.
///
/// # Safety
/// `field` must be live; `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn nls_energy(
    field: *const NlsField,
    lambda: f64,
    p: f64,
    out: *mut f64,
) -> NlsStatus {
    scalar_op(field, out, |f| nls_lab::functionals::energy(f, lambda, p))
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, NlsStatus> {
    if ptr.is_null() {
        return Err(NlsStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(NlsStatus::Utf8),
    }
}

/// Writes the field in the NLSF snapshot format.
///
/// # Safety
/// `field` must be live; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn nls_field_write_snapshot(
    field: *const NlsField,
    path: *const c_char,
) -> NlsStatus {
    let Some(f) = field.as_ref() else {
        return NlsStatus::NullPointer;
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match f.0.write_snapshot(path) {
        Ok(()) => NlsStatus::Ok,
        Err(e) => classify(e),
    }
}

/// Reads a field back from a NLSF snapshot.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nls_field_read_snapshot(
    path: *const c_char,
    out: *mut *mut NlsField,
) -> NlsStatus {
    if out.is_null() {
        return NlsStatus::NullPointer;
    }
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match Field::read_snapshot(path) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(NlsField(f)));
            NlsStatus::Ok
        }
        Err(e) => classify(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_field_round_trip_through_the_abi() {
        unsafe {
            let mut grid: *mut NlsGrid = std::ptr::null_mut();
            assert_eq!(nls_grid_new(1, 8, 4.0, &mut grid), NlsStatus::Ok);
            assert_eq!(nls_grid_len(grid), 8);

            let mut k = vec![0.0f64; 8];
            assert_eq!(nls_grid_wavenumbers(grid, k.as_mut_ptr(), 8), NlsStatus::Ok);
            assert!(k.windows(2).all(|w| w[0] < w[1]));

            let mut field: *mut NlsField = std::ptr::null_mut();
            assert_eq!(
                nls_field_gaussian(grid, 1.0, 1.0, std::ptr::null(), &mut field),
                NlsStatus::Ok
            );
            let mut m = 0.0;
            assert_eq!(nls_mass(field, &mut m), NlsStatus::Ok);
            assert!(m > 0.0);

            let mut hat: *mut NlsField = std::ptr::null_mut();
            assert_eq!(nls_fft(field, &mut hat), NlsStatus::Ok);
            assert_eq!(nls_field_space(hat), NlsSpace::Spectral);
            // fft of a spectral field reports the wrong-space contract.
            let mut bad: *mut NlsField = std::ptr::null_mut();
            assert_eq!(nls_fft(hat, &mut bad), NlsStatus::WrongSpace);
            let mut msg = vec![0i8; 128];
            let n = nls_last_error_message(msg.as_mut_ptr() as *mut c_char, msg.len());
            assert!(n > 0);

            nls_field_free(hat);
            nls_field_free(field);
            nls_grid_free(grid);
        }
    }

    #[test]
    fn invalid_grid_reports_status() {
        unsafe {
            let mut grid: *mut NlsGrid = std::ptr::null_mut();
            assert_eq!(
                nls_grid_new(1, 5, 4.0, &mut grid),
                NlsStatus::InvalidArgument
            );
            assert_eq!(nls_grid_new(1, 8, 4.0, std::ptr::null_mut()), NlsStatus::NullPointer);
        }
    }

    #[test]
    fn strang_evolution_through_the_abi_preserves_mass() {
        unsafe {
            let mut grid: *mut NlsGrid = std::ptr::null_mut();
            assert_eq!(nls_grid_new(2, 16, 10.0, &mut grid), NlsStatus::Ok);
            let mut field: *mut NlsField = std::ptr::null_mut();
            assert_eq!(
                nls_field_gaussian(grid, 1.0, 1.0, std::ptr::null(), &mut field),
                NlsStatus::Ok
            );
            let mut m0 = 0.0;
            assert_eq!(nls_mass(field, &mut m0), NlsStatus::Ok);
            let mut evolved: *mut NlsField = std::ptr::null_mut();
            assert_eq!(
                nls_strang_evolve(field, 1.0, 2.0, 0.1, 1e-3, 1e3, &mut evolved),
                NlsStatus::Ok
            );
            let mut m1 = 0.0;
            assert_eq!(nls_mass(evolved, &mut m1), NlsStatus::Ok);
            assert!((m1 - m0).abs() <= 1e-12 * m0);
            nls_field_free(evolved);
            nls_field_free(field);
            nls_grid_free(grid);
        }
    }
}
