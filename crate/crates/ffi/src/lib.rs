//! C ABI over `sympred`.
//!
//! Models and bases are opaque handles created by `*_new`/`*_generate` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`SympredStatus`]; the message of the last failure on the calling thread
//! is available through [`sympred_last_error`]. Matrices cross the boundary
//! as column-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sympred::basis::{BasisMethod, PreparedBasis};
use sympred::integrator::{solve_full, TimeGrid};
use sympred::models::{
    CantileverLattice, Constants, ForcingKind, ForcingProfile, LatticeGeometry, Param, ParameterDomain,
};
use sympred::rom::{
    hamiltonian_drift, hamiltonian_scale, projection_error, solve_reduced, ProjectionMode, ReducedOperators,
};
use sympred::symplectic::ReducedBasis;
use sympred::{Error, Matrix, Vector};

pub const SYMPRED_METHOD_POD_FULL: u32 = 0;
pub const SYMPRED_METHOD_POD_SEPARATE: u32 = 1;
pub const SYMPRED_METHOD_PSD_COTANGENT_LIFT: u32 = 2;
pub const SYMPRED_METHOD_PSD_COMPLEX_SVD: u32 = 3;
pub const SYMPRED_METHOD_POD_OF_YS: u32 = 4;
pub const SYMPRED_METHOD_PSD_GREEDY: u32 = 5;
pub const SYMPRED_METHOD_PSD_SVD_LIKE: u32 = 6;

pub const SYMPRED_FORCING_NONE: u32 = 0;
pub const SYMPRED_FORCING_CONSTANT_TIP: u32 = 1;
pub const SYMPRED_FORCING_SINUSOIDAL_TIP: u32 = 2;

/// Basis kind codes reported by `sympred_basis_kind`.
pub const SYMPRED_KIND_ORTHONORMAL_SYMPLECTIC: u32 = 0;
pub const SYMPRED_KIND_SYMPLECTIC_NONORTHONORMAL: u32 = 1;
pub const SYMPRED_KIND_ORTHONORMAL_NONSYMPLECTIC: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SympredStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Dimension = 4,
    Numerical = 5,
    NoSpectralGap = 6,
    Io = 7,
    Panic = 8,
}

/// Lattice cantilever model.
pub struct SympredModel {
    lattice: CantileverLattice,
}

/// Reduced-order basis.
pub struct SympredBasis {
    basis: ReducedBasis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> SympredStatus {
    match e {
        Error::Dimension(_) => SympredStatus::Dimension,
        Error::NoSpectralGap { .. } => SympredStatus::NoSpectralGap,
        Error::Config(_) | Error::Parameter { .. } | Error::Size(_) | Error::Mode(_) => SympredStatus::InvalidArgument,
        Error::Io(_) | Error::Format(_) => SympredStatus::Io,
        _ => SympredStatus::Numerical,
    }
}

struct Fail(SympredStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SympredStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SympredStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SympredStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(SympredStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(SympredStatus::InvalidArgument, msg.into())
}

unsafe fn matrix_from(data: *const f64, rows: usize, cols: usize) -> Result<Matrix, Fail> {
    non_null(data, "data")?;
    let len = rows.checked_mul(cols).ok_or_else(|| invalid("matrix size overflows"))?;
    let slice = std::slice::from_raw_parts(data, len);
    Ok(Matrix::from_column_slice(rows, cols, slice))
}

unsafe fn copy_out(m: &Matrix, out: *mut f64, len: usize) -> Result<(), Fail> {
    non_null(out, "out")?;
    if len < m.len() {
        return Err(Fail(
            SympredStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", m.len()),
        ));
    }
    ptr::copy_nonoverlapping(m.as_slice().as_ptr(), out, m.len());
    Ok(())
}

fn method_of(code: u32) -> Result<BasisMethod, Fail> {
    let idx = usize::try_from(code).ok();
    idx.and_then(|i| BasisMethod::ALL.get(i).copied())
        .ok_or_else(|| invalid(format!("unknown method code {code}")))
}

fn forcing_of(code: u32, amplitude: f64, frequency: f64) -> Result<ForcingProfile, Fail> {
    let kind = match code {
        SYMPRED_FORCING_NONE => ForcingKind::None,
        SYMPRED_FORCING_CONSTANT_TIP => ForcingKind::ConstantTip,
        SYMPRED_FORCING_SINUSOIDAL_TIP => ForcingKind::SinusoidalTip,
        _ => return Err(invalid(format!("unknown forcing code {code}"))),
    };
    Ok(ForcingProfile::new(kind, amplitude, frequency)?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length without the NUL.
/// Returns 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sympred_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Lattice with `nx x ny` cells and default geometry, constants and
/// parameter domain.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sympred_model_new(nx: usize, ny: usize, out: *mut *mut SympredModel) -> SympredStatus {
    guard(|| {
        non_null(out, "out")?;
        let geometry = LatticeGeometry {
            nx,
            ny,
            ..LatticeGeometry::default()
        };
        let lattice = CantileverLattice::new(geometry, Constants::default(), ParameterDomain::default())?;
        *out = Box::into_raw(Box::new(SympredModel { lattice }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from `sympred_model_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sympred_model_free(model: *mut SympredModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Phase-space dimension `2n`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_model_dim(model: *const SympredModel, out: *mut usize) -> SympredStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = 2 * (*model).lattice.n();
        Ok(())
    })
}

/// Nondimensional beam weight, the default load amplitude.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_model_weight(model: *const SympredModel, out: *mut f64) -> SympredStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = (*model).lattice.weight();
        Ok(())
    })
}

/// Full-order trajectory from rest on `[0, t_end]` with `nt` samples
/// (nondimensional time). Writes `2n x nt` values to `out`.
///
/// # Safety
/// `model` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sympred_model_solve(
    model: *const SympredModel,
    lambda: f64,
    mu: f64,
    forcing: u32,
    amplitude: f64,
    frequency: f64,
    t_end: f64,
    nt: usize,
    out: *mut f64,
    out_len: usize,
) -> SympredStatus {
    guard(|| {
        non_null(model, "model")?;
        let lattice = &(*model).lattice;
        let profile = forcing_of(forcing, amplitude, frequency)?;
        let grid = TimeGrid::new(0.0, t_end, nt)?;
        let traj = solve_full(lattice, Param::new(lambda, mu), profile, &grid)?;
        copy_out(&traj.states, out, out_len)
    })
}

/// Builds a basis of `size` columns from the `rows x cols` snapshot matrix.
///
/// # Safety
/// `data` must hold `rows * cols` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_generate(
    method: u32,
    data: *const f64,
    rows: usize,
    cols: usize,
    size: usize,
    out: *mut *mut SympredBasis,
) -> SympredStatus {
    guard(|| {
        non_null(out, "out")?;
        let method = method_of(method)?;
        let x = matrix_from(data, rows, cols)?;
        let outcome = PreparedBasis::new(method, &x, size)?.basis(size)?;
        *out = Box::into_raw(Box::new(SympredBasis { basis: outcome.basis }));
        Ok(())
    })
}

/// Wraps caller-provided columns; the kind is inferred from the measures.
///
/// # Safety
/// `data` must hold `rows * cols` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_from_columns(
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut SympredBasis,
) -> SympredStatus {
    guard(|| {
        non_null(out, "out")?;
        let basis = ReducedBasis::classify(matrix_from(data, rows, cols)?)?;
        *out = Box::into_raw(Box::new(SympredBasis { basis }));
        Ok(())
    })
}

/// # Safety
/// `basis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_free(basis: *mut SympredBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// # Safety
/// `basis` must be a live handle; `rows` and `cols` writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_dims(
    basis: *const SympredBasis,
    rows: *mut usize,
    cols: *mut usize,
) -> SympredStatus {
    guard(|| {
        non_null(basis, "basis")?;
        non_null(rows, "rows")?;
        non_null(cols, "cols")?;
        let m = (*basis).basis.matrix();
        *rows = m.nrows();
        *cols = m.ncols();
        Ok(())
    })
}

/// One of the `SYMPRED_KIND_*` codes.
///
/// # Safety
/// `basis` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_kind(basis: *const SympredBasis, out: *mut u32) -> SympredStatus {
    guard(|| {
        non_null(basis, "basis")?;
        non_null(out, "out")?;
        *out = (*basis).basis.kind().code();
        Ok(())
    })
}

/// # Safety
/// `basis` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_copy(
    basis: *const SympredBasis,
    out: *mut f64,
    out_len: usize,
) -> SympredStatus {
    guard(|| {
        non_null(basis, "basis")?;
        copy_out((*basis).basis.matrix(), out, out_len)
    })
}

/// `||V^T V - I||_F` and `||V^+ V - I||_F`.
///
/// # Safety
/// `basis` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_measures(
    basis: *const SympredBasis,
    orthonormality: *mut f64,
    symplecticity: *mut f64,
) -> SympredStatus {
    guard(|| {
        non_null(basis, "basis")?;
        non_null(orthonormality, "orthonormality")?;
        non_null(symplecticity, "symplecticity")?;
        *orthonormality = (*basis).basis.orthonormality();
        *symplecticity = (*basis).basis.symplecticity();
        Ok(())
    })
}

/// Squared Frobenius projection error of the snapshots: symplectic
/// projection for symplectic bases, orthogonal projection otherwise.
///
/// # Safety
/// `basis` must be a live handle, `data` must hold `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn sympred_basis_projection_error(
    basis: *const SympredBasis,
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> SympredStatus {
    guard(|| {
        non_null(basis, "basis")?;
        non_null(out, "out")?;
        let x = matrix_from(data, rows, cols)?;
        *out = projection_error(&(*basis).basis, &x)?;
        Ok(())
    })
}

/// Reduced solve from rest on `[0, t_end]` with `nt` samples. Writes the
/// lifted states `V x_hat` (`2n x nt`) to `out` and, when `drift` is not
/// null, the largest Hamiltonian drift relative to the full solution's
/// energy scale.
///
/// # Safety
/// Handles must be live, `out` must hold `out_len` doubles, `drift` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn sympred_rom_solve(
    model: *const SympredModel,
    basis: *const SympredBasis,
    lambda: f64,
    mu: f64,
    forcing: u32,
    amplitude: f64,
    frequency: f64,
    t_end: f64,
    nt: usize,
    out: *mut f64,
    out_len: usize,
    drift: *mut f64,
) -> SympredStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(basis, "basis")?;
        let lattice = &(*model).lattice;
        let v = &(*basis).basis;
        let p = Param::new(lambda, mu);
        let profile = forcing_of(forcing, amplitude, frequency)?;
        let grid = TimeGrid::new(0.0, t_end, nt)?;
        let ops = ReducedOperators::new(lattice, v, ProjectionMode::for_basis(v))?;
        let red = ops.system(lattice, p, profile, &Vector::zeros(2 * lattice.n()))?;
        let sol = solve_reduced(&red, &grid)?;
        let lifted = v.matrix() * &sol.trajectory.states;
        copy_out(&lifted, out, out_len)?;
        if !drift.is_null() {
            let sys = lattice.system(p, profile)?;
            let full = solve_full(lattice, p, profile, &grid)?;
            let h_rel = hamiltonian_scale(&sys, &full)?;
            *drift = hamiltonian_drift(&sol.hamiltonian, h_rel)?.max_relative;
        }
        Ok(())
    })
}
