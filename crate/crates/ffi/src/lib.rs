// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over `kraus_landscape`.
//!
//! Complex matrices cross the boundary as row-major arrays of interleaved
//! `(re, im)` doubles, so an `n×n` matrix occupies `2n²` doubles. Every
//! fallible function returns a [`KlStatus`]; on failure a description is
//! available from [`kl_last_error_message`] on the same thread. Objects are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kraus_landscape::dynamics::{
    build_model, field_gradient, lie_algebra_rank, objective, thermal_state, ControlField, EnvironmentSpec,
    SpinBathModel,
};
use kraus_landscape::kraus::{apply_kraus, kraus_from_unitary};
use kraus_landscape::landscape::{ascend, descend, riemannian_gradient, value_unitary, KinematicLandscape};
use kraus_landscape::qmath::{c, diag_real, haar_unitary};
use kraus_landscape::topology::{count_pure_env, count_tables, gaussian_count_estimate, hessian_count_global};
use kraus_landscape::{ComplexMatrix, DensityOperator, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotHermitian = 4,
    NotUnitary = 5,
    InvalidDensity = 6,
    AccidentalDegeneracy = 7,
    MarginalMismatch = 8,
    EnumerationCap = 9,
    NotCritical = 10,
    Overflow = 11,
    Panic = 99,
}

/// Environment kinds accepted by [`kl_spin_bath_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlEnvironmentKind {
    Spin = 0,
    Oscillator = 1,
    OscillatorPair = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> KlStatus {
    match e {
        Error::DimensionMismatch(_) => KlStatus::DimensionMismatch,
        Error::NotHermitian(_) => KlStatus::NotHermitian,
        Error::NotUnitary(_) => KlStatus::NotUnitary,
        Error::InvalidDensity(_) => KlStatus::InvalidDensity,
        Error::AccidentalDegeneracy(_) => KlStatus::AccidentalDegeneracy,
        Error::MarginalMismatch(_) => KlStatus::MarginalMismatch,
        Error::EnumerationCap(_) => KlStatus::EnumerationCap,
        Error::NotCritical(_) => KlStatus::NotCritical,
        Error::InvalidArgument(_) => KlStatus::InvalidArgument,
    }
}

struct Failure(KlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(KlStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            KlStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn read_matrix(p: *const f64, n: usize, name: &str) -> Result<ComplexMatrix, Failure> {
    let data = slice(p, 2 * n * n, name)?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        c(data[k], data[k + 1])
    }))
}

unsafe fn write_matrix(m: &ComplexMatrix, p: *mut f64, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    let n = m.nrows();
    let data = std::slice::from_raw_parts_mut(p, 2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let k = 2 * (i * n + j);
            data[k] = m[(i, j)].re;
            data[k + 1] = m[(i, j)].im;
        }
    }
    Ok(())
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Opaque kinematic landscape `J(U) = Tr(U (ρ⊗ϱ) U† (θ⊗I))`.
pub struct KlLandscape {
    inner: KinematicLandscape,
}

/// Builds a landscape from diagonal states (`sys_pops`, `env_pops`) and a
/// Hermitian `n_sys×n_sys` observable.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_landscape_new(
    sys_pops: *const f64,
    n_sys: usize,
    env_pops: *const f64,
    n_env: usize,
    theta: *const f64,
    out: *mut *mut KlLandscape,
) -> KlStatus {
    guard(|| {
        let target = self::out(out, "out")?;
        *target = ptr::null_mut();
        let rho = DensityOperator::from_populations(slice(sys_pops, n_sys, "sys_pops")?)?;
        let env = DensityOperator::from_populations(slice(env_pops, n_env, "env_pops")?)?;
        let theta = read_matrix(theta, n_sys, "theta")?;
        let inner = KinematicLandscape::new(&rho, &env, &theta)?;
        *target = Box::into_raw(Box::new(KlLandscape { inner }));
        Ok(())
    })
}

/// # Safety
/// `l` must come from [`kl_landscape_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kl_landscape_free(l: *mut KlLandscape) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Composite dimension `λN`, or 0 for a null handle.
///
/// # Safety
/// `l` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kl_landscape_dim(l: *const KlLandscape) -> usize {
    l.as_ref().map_or(0, |l| l.inner.dim())
}

/// # Safety
/// `u` must hold `2·dim²` doubles.
#[no_mangle]
pub unsafe extern "C" fn kl_landscape_value(
    l: *const KlLandscape,
    u: *const f64,
    dim: usize,
    value: *mut f64,
) -> KlStatus {
    guard(|| {
        let l = l.as_ref().ok_or_else(|| null("landscape"))?;
        let u = read_matrix(u, dim, "u")?;
        *out(value, "value")? = value_unitary(&l.inner, &u)?;
        Ok(())
    })
}

/// Writes the gradient `G` (anti-Hermitian, `2·dim²` doubles) at `u`.
///
/// # Safety
/// `u` and `gradient` must hold `2·dim²` doubles.
#[no_mangle]
pub unsafe extern "C" fn kl_landscape_gradient(
    l: *const KlLandscape,
    u: *const f64,
    dim: usize,
    gradient: *mut f64,
) -> KlStatus {
    guard(|| {
        let l = l.as_ref().ok_or_else(|| null("landscape"))?;
        let u = read_matrix(u, dim, "u")?;
        write_matrix(&riemannian_gradient(&l.inner, &u)?, gradient, "gradient")
    })
}

/// # Safety
/// `l` must be live; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_landscape_range(l: *const KlLandscape, j_min: *mut f64, j_max: *mut f64) -> KlStatus {
    guard(|| {
        let l = l.as_ref().ok_or_else(|| null("landscape"))?;
        let (lo, hi) = l.inner.dynamical_range();
        *out(j_min, "j_min")? = lo;
        *out(j_max, "j_max")? = hi;
        Ok(())
    })
}

/// Gradient search from the Haar-random unitary drawn with `seed`; ascends
/// when `ascend` is nonzero, descends otherwise.
///
/// # Safety
/// `l` must be live; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_landscape_search(
    l: *const KlLandscape,
    seed: u64,
    ascend_flag: i32,
    max_iters: usize,
    grad_tol: f64,
    final_value: *mut f64,
    iterations: *mut usize,
) -> KlStatus {
    guard(|| {
        let l = l.as_ref().ok_or_else(|| null("landscape"))?;
        let u0 = haar_unitary(l.inner.dim(), seed);
        let r = if ascend_flag != 0 {
            ascend(&l.inner, &u0, max_iters, grad_tol)?
        } else {
            descend(&l.inner, &u0, max_iters, grad_tol)?
        };
        *out(final_value, "final_value")? = r.final_value();
        *out(iterations, "iterations")? = r.iterations;
        Ok(())
    })
}

/// Applies the channel induced by `u` on `n_sys⊗n_env` with diagonal
/// environment state `env_pops` to the density matrix `rho`.
///
/// # Safety
/// `u` holds `2(n_sys·n_env)²` doubles; `rho` and `result` hold `2·n_sys²`.
#[no_mangle]
pub unsafe extern "C" fn kl_apply_kraus_channel(
    u: *const f64,
    n_sys: usize,
    n_env: usize,
    env_pops: *const f64,
    rho: *const f64,
    result: *mut f64,
) -> KlStatus {
    guard(|| {
        let u = read_matrix(u, n_sys * n_env, "u")?;
        let env = DensityOperator::from_populations(slice(env_pops, n_env, "env_pops")?)?;
        let rho = DensityOperator::new(read_matrix(rho, n_sys, "rho")?)?;
        let k = kraus_from_unitary(&u, &env)?;
        write_matrix(apply_kraus(&k, &rho)?.matrix(), result, "result")
    })
}

/// Number of non-negative integer tables with the given margins.
///
/// # Safety
/// `rows` and `cols` hold `n_rows` and `n_cols` entries.
#[no_mangle]
pub unsafe extern "C" fn kl_count_tables(
    rows: *const usize,
    n_rows: usize,
    cols: *const usize,
    n_cols: usize,
    cap: usize,
    count: *mut u64,
) -> KlStatus {
    guard(|| {
        let n = count_tables(slice(rows, n_rows, "rows")?, slice(cols, n_cols, "cols")?, cap)?;
        *out(count, "count")? = n as u64;
        Ok(())
    })
}

/// Closed-form table count for a pure environment.
///
/// # Safety
/// `mults` holds `n` entries.
#[no_mangle]
pub unsafe extern "C" fn kl_count_pure_env(mults: *const usize, n: usize, s: usize, count: *mut u64) -> KlStatus {
    guard(|| {
        let v = count_pure_env(slice(mults, n, "mults")?, s)?;
        *out(count, "count")? =
            u64::try_from(v).map_err(|_| Failure(KlStatus::Overflow, format!("count {v} exceeds 64 bits")))?;
        Ok(())
    })
}

/// `2N²(N−d_r)(N−e₁)`.
///
/// # Safety
/// `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_hessian_count_global(n_sys: usize, d_r: usize, e1: usize, count: *mut u64) -> KlStatus {
    guard(|| {
        *out(count, "count")? = hessian_count_global(n_sys, d_r, e1)?;
        Ok(())
    })
}

/// # Safety
/// `rows` and `cols` hold `n_rows` and `n_cols` entries.
#[no_mangle]
pub unsafe extern "C" fn kl_gaussian_count_estimate(
    rows: *const usize,
    n_rows: usize,
    cols: *const usize,
    n_cols: usize,
    estimate: *mut f64,
) -> KlStatus {
    guard(|| {
        *out(estimate, "estimate")? = gaussian_count_estimate(slice(rows, n_rows, "rows")?, slice(cols, n_cols, "cols")?)?;
        Ok(())
    })
}

/// Opaque driven spin-1/2 plus bath model.
pub struct KlSpinBath {
    inner: SpinBathModel,
}

/// `size` is the spin dimension λ for [`KlEnvironmentKind::Spin`] and the
/// per-mode truncation for oscillator kinds. `kind` takes the values of
/// [`KlEnvironmentKind`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_spin_bath_new(
    kind: u32,
    size: usize,
    omega0: f64,
    omega_e: f64,
    gamma: f64,
    out: *mut *mut KlSpinBath,
) -> KlStatus {
    guard(|| {
        let target = self::out(out, "out")?;
        *target = ptr::null_mut();
        let env = match kind {
            0 => EnvironmentSpec::spin(size, omega_e),
            1 => EnvironmentSpec::oscillator(size, omega_e),
            2 => EnvironmentSpec::oscillator_pair(size, omega_e),
            k => return Err(Failure(KlStatus::InvalidArgument, format!("unknown environment kind {k}"))),
        };
        let inner = build_model(omega0, gamma, &env)?;
        *target = Box::into_raw(Box::new(KlSpinBath { inner }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`kl_spin_bath_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kl_spin_bath_free(m: *mut KlSpinBath) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Composite dimension `2λ`, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kl_spin_bath_dim(m: *const KlSpinBath) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// # Safety
/// `m` must be live; `rank` writable.
#[no_mangle]
pub unsafe extern "C" fn kl_spin_bath_lie_rank(m: *const KlSpinBath, tol: f64, rank: *mut usize) -> KlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        *out(rank, "rank")? = lie_algebra_rank(&m.inner.h0, &m.inner.hc, tol)?;
        Ok(())
    })
}

struct DriveArgs {
    field: ControlField,
    rho: DensityOperator,
    env: DensityOperator,
    theta: ComplexMatrix,
}

unsafe fn drive_args(
    m: &SpinBathModel,
    amplitudes: *const f64,
    n_slices: usize,
    t_final: f64,
    sys_pops: *const f64,
    theta_diag: *const f64,
    temperature: f64,
) -> Result<DriveArgs, Failure> {
    Ok(DriveArgs {
        field: ControlField::new(t_final, slice(amplitudes, n_slices, "amplitudes")?.to_vec())?,
        rho: DensityOperator::from_populations(slice(sys_pops, 2, "sys_pops")?)?,
        env: thermal_state(&m.h_env, temperature)?.state,
        theta: diag_real(slice(theta_diag, 2, "theta_diag")?),
    })
}

/// Objective and reduced-state entropy for a piecewise-constant field, with
/// the bath in its Gibbs state at `temperature` (`INFINITY` allowed).
///
/// # Safety
/// `amplitudes` holds `n_slices` doubles; `sys_pops` and `theta_diag` hold 2.
#[no_mangle]
pub unsafe extern "C" fn kl_spin_bath_objective(
    m: *const KlSpinBath,
    amplitudes: *const f64,
    n_slices: usize,
    t_final: f64,
    sys_pops: *const f64,
    theta_diag: *const f64,
    temperature: f64,
    value: *mut f64,
    entropy: *mut f64,
) -> KlStatus {
    guard(|| {
        let m = &m.as_ref().ok_or_else(|| null("model"))?.inner;
        let a = drive_args(m, amplitudes, n_slices, t_final, sys_pops, theta_diag, temperature)?;
        let o = objective(m, &a.field, &a.rho, &a.env, &a.theta)?;
        *out(value, "value")? = o.j;
        *out(entropy, "entropy")? = o.entropy;
        Ok(())
    })
}

/// Exact derivative of the objective with respect to each slice amplitude.
///
/// # Safety
/// As for [`kl_spin_bath_objective`]; `gradient` holds `n_slices` doubles.
#[no_mangle]
pub unsafe extern "C" fn kl_spin_bath_gradient(
    m: *const KlSpinBath,
    amplitudes: *const f64,
    n_slices: usize,
    t_final: f64,
    sys_pops: *const f64,
    theta_diag: *const f64,
    temperature: f64,
    gradient: *mut f64,
) -> KlStatus {
    guard(|| {
        let m = &m.as_ref().ok_or_else(|| null("model"))?.inner;
        let a = drive_args(m, amplitudes, n_slices, t_final, sys_pops, theta_diag, temperature)?;
        let g = field_gradient(m, &a.field, &a.rho, &a.env, &a.theta)?;
        if gradient.is_null() {
            return Err(null("gradient"));
        }
        std::slice::from_raw_parts_mut(gradient, n_slices).copy_from_slice(&g);
        Ok(())
    })
}
