//! C ABI over `epw-core`.
//!
//! Every function returns an [`EpwStatus`]; results are written through out
//! pointers. Objects are opaque handles created by `*_new`/`*_generate`/`*_run`
//! functions and released with the matching `*_free`. The message of the most
//! recent error on the calling thread is available from [`epw_last_error`].

use epw_core::basis::{spherical_wave_eval, BasisContext};
use epw_core::sampling::{self, NodeSet, Strategy};
use epw_core::scenarios::build_set;
use epw_core::solver::{boundary_rule, SampledSystem};
use epw_core::specfun;
use epw_core::sphquad::{direction_set, Geometry, Spacing};
use epw_core::EpwError;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpwStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Shape = 3,
    NotFundamental = 4,
    Positivity = 5,
    Convergence = 6,
    Parse = 7,
    Io = 8,
    Config = 9,
    Numeric = 10,
    Unsupported = 11,
    Panic = 12,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &EpwError) -> EpwStatus {
    match e {
        EpwError::Domain(_) => EpwStatus::Domain,
        EpwError::Shape(_) => EpwStatus::Shape,
        EpwError::NotFundamental(_) => EpwStatus::NotFundamental,
        EpwError::Positivity { .. } => EpwStatus::Positivity,
        EpwError::Convergence(_) => EpwStatus::Convergence,
        EpwError::Parse { .. } => EpwStatus::Parse,
        EpwError::Validation(_) => EpwStatus::Domain,
        EpwError::Config(_) => EpwStatus::Config,
        EpwError::Numeric(_) => EpwStatus::Numeric,
        EpwError::Unsupported(_) => EpwStatus::Unsupported,
        EpwError::Io(_) => EpwStatus::Io,
    }
}

fn guard<F>(f: F) -> EpwStatus
where
    F: FnOnce() -> Result<(), EpwStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EpwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("panic inside epw".into());
            EpwStatus::Panic
        }
    }
}

fn lift<T>(r: epw_core::Result<T>) -> Result<T, EpwStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_last_error(e.to_string());
        s
    })
}

fn null_error() -> EpwStatus {
    set_last_error("null pointer argument".into());
    EpwStatus::NullPointer
}

fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, EpwStatus> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(null_error)
}

fn in_ref<'a, T>(p: *const T) -> Result<&'a T, EpwStatus> {
    // SAFETY: callers pass either null or a handle obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(null_error)
}

fn parse_strategy(code: c_char) -> Result<Option<Strategy>, EpwStatus> {
    match code as u8 {
        0 => Ok(None),
        b'a' | b'A' => Ok(Some(Strategy::A)),
        b'b' | b'B' => Ok(Some(Strategy::B)),
        b'c' | b'C' => Ok(Some(Strategy::C)),
        b'd' | b'D' => Ok(Some(Strategy::D)),
        b'e' | b'E' => Ok(Some(Strategy::E)),
        other => {
            set_last_error(format!("unknown strategy code {other}"));
            Err(EpwStatus::Config)
        }
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes) and returns the full message length. Returns 0
/// when no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn epw_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: `buf` holds at least `len > n` bytes.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Spherical Bessel function `j_ell(r)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn epw_spherical_bessel_j(ell: u32, r: f64, out: *mut f64) -> EpwStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = lift(specfun::spherical_bessel_j(ell as usize, r))?;
        Ok(())
    })
}

/// Approximate CDF of the evanescence parameter, `Upsilon_N(zeta)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn epw_upsilon_hat(zeta: f64, kappa: f64, l_max: u32, out: *mut f64) -> EpwStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = lift(sampling::upsilon_hat(zeta, kappa, l_max as usize))?;
        Ok(())
    })
}

/// Per-degree basis constants for one wavenumber.
pub struct EpwBasis {
    inner: BasisContext,
}

/// Builds the basis constants for degrees `0..=l_max`.
///
/// # Safety
/// `out` must be null or valid for writes. The handle must be released with
/// [`epw_basis_free`].
#[no_mangle]
pub unsafe extern "C" fn epw_basis_new(kappa: f64, l_max: u32, out: *mut *mut EpwBasis) -> EpwStatus {
    guard(|| {
        let out = out_ref(out)?;
        let inner = lift(BasisContext::new(kappa, l_max as usize))?;
        *out = Box::into_raw(Box::new(EpwBasis { inner }));
        Ok(())
    })
}

/// Releases a basis handle; null is ignored.
///
/// # Safety
/// `basis` must be null or a handle from [`epw_basis_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epw_basis_free(basis: *mut EpwBasis) {
    if !basis.is_null() {
        // SAFETY: the handle was created by `Box::into_raw` in `epw_basis_new`.
        drop(unsafe { Box::from_raw(basis) });
    }
}

fn basis_degree(b: &EpwBasis, ell: u32) -> Result<usize, EpwStatus> {
    let l = ell as usize;
    if l > b.inner.lmax {
        set_last_error(format!("degree {l} exceeds basis degree {}", b.inner.lmax));
        return Err(EpwStatus::Domain);
    }
    Ok(l)
}

/// `ln beta_ell`.
///
/// # Safety
/// `basis` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn epw_basis_log_beta(basis: *const EpwBasis, ell: u32, out: *mut f64) -> EpwStatus {
    guard(|| {
        let b = in_ref(basis)?;
        let out = out_ref(out)?;
        *out = b.inner.log_beta[basis_degree(b, ell)?];
        Ok(())
    })
}

/// `ln alpha_ell` (approximation).
///
/// # Safety
/// `basis` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn epw_basis_log_alpha(basis: *const EpwBasis, ell: u32, out: *mut f64) -> EpwStatus {
    guard(|| {
        let b = in_ref(basis)?;
        let out = out_ref(out)?;
        *out = b.inner.log_alpha[basis_degree(b, ell)?];
        Ok(())
    })
}

/// `|tau_ell|`.
///
/// # Safety
/// `basis` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn epw_basis_tau_abs(basis: *const EpwBasis, ell: u32, out: *mut f64) -> EpwStatus {
    guard(|| {
        let b = in_ref(basis)?;
        let out = out_ref(out)?;
        *out = b.inner.tau_abs[basis_degree(b, ell)?];
        Ok(())
    })
}

/// Evanescent parameter nodes.
pub struct EpwNodeSet {
    inner: NodeSet,
}

/// Generates nodes with strategy `'a'..'e'`. Strategies `'d'` and `'e'` use
/// the built-in direction set of the rounded size.
///
/// # Safety
/// `out` must be null or valid for writes. The handle must be released with
/// [`epw_nodeset_free`].
#[no_mangle]
pub unsafe extern "C" fn epw_nodeset_generate(
    strategy: c_char,
    l_max: u32,
    p: u32,
    kappa: f64,
    seed: u64,
    out: *mut *mut EpwNodeSet,
) -> EpwStatus {
    guard(|| {
        let out = out_ref(out)?;
        let Some(s) = parse_strategy(strategy)? else {
            set_last_error("node generation needs a strategy".into());
            return Err(EpwStatus::Config);
        };
        let p = p as usize;
        let dirs = if s.needs_directions() { Some(lift(direction_set(s.rounded_size(p)))?) } else { None };
        let inner = lift(sampling::generate_nodes(s, l_max as usize, p, kappa, seed, dirs.as_deref()))?;
        *out = Box::into_raw(Box::new(EpwNodeSet { inner }));
        Ok(())
    })
}

/// Releases a node-set handle; null is ignored.
///
/// # Safety
/// `nodes` must be null or a handle from [`epw_nodeset_generate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epw_nodeset_free(nodes: *mut EpwNodeSet) {
    if !nodes.is_null() {
        // SAFETY: the handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(nodes) });
    }
}

/// Number of nodes.
///
/// # Safety
/// `nodes` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn epw_nodeset_len(nodes: *const EpwNodeSet, out: *mut usize) -> EpwStatus {
    guard(|| {
        let n = in_ref(nodes)?;
        *out_ref(out)? = n.inner.len();
        Ok(())
    })
}

/// Node `index` as `theta1, theta2, theta3, zeta` (in `out[0..4]`) and its
/// normalization `sqrt(mu_N / P)` (in `out[4]`).
///
/// # Safety
/// `nodes` must be a live handle; `out` must be null or point to 5 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn epw_nodeset_get(nodes: *const EpwNodeSet, index: usize, out: *mut f64) -> EpwStatus {
    guard(|| {
        let n = in_ref(nodes)?;
        if out.is_null() {
            return Err(null_error());
        }
        let Some(y) = n.inner.nodes.get(index) else {
            set_last_error(format!("node index {index} out of range {}", n.inner.len()));
            return Err(EpwStatus::Shape);
        };
        let vals = [y.theta1, y.theta2, y.theta3, y.zeta, n.inner.ln_norms[index].exp()];
        // SAFETY: `out` points to 5 writable doubles.
        unsafe { ptr::copy_nonoverlapping(vals.as_ptr(), out, 5) };
        Ok(())
    })
}

/// Result of a regularized approximation of one spherical wave.
pub struct EpwSolveReport {
    s: usize,
    p: usize,
    eps_rank: usize,
    residual: f64,
    coeff_norm: f64,
    singular_values: Vec<f64>,
}

/// Approximates `b_ell^m` on the unit sphere with a propagative set
/// (`strategy == 0`) or an evanescent set (`'a'..'e'`, truncation `l_max`) of
/// about `p` waves, `S = ceil(sqrt(oversample P))^2` samples and threshold `epsilon`.
///
/// # Safety
/// `out` must be null or valid for writes. The handle must be released with
/// [`epw_report_free`].
#[no_mangle]
pub unsafe extern "C" fn epw_approximate_mode(
    kappa: f64,
    strategy: c_char,
    l_max: u32,
    p: u32,
    ell: u32,
    m: i32,
    epsilon: f64,
    oversample: f64,
    seed: u64,
    out: *mut *mut EpwSolveReport,
) -> EpwStatus {
    guard(|| {
        let out = out_ref(out)?;
        let strategy = parse_strategy(strategy)?;
        lift(specfun::ModeIndex::new(ell as usize, m as i64))?;
        let set = lift(build_set(kappa, strategy, l_max as usize, p as usize, seed))?;
        let rule = lift(boundary_rule(Geometry::Sphere, Spacing::Equispaced, set.len(), oversample))?;
        let system = lift(SampledSystem::new(&set, rule, epsilon))?;
        let b = lift(
            system
                .rule
                .points
                .iter()
                .zip(&system.rule.weights)
                .map(|(x, w)| Ok(spherical_wave_eval(ell as usize, m as i64, kappa, *x)? * w.sqrt()))
                .collect::<epw_core::Result<Vec<_>>>(),
        )?;
        let r = lift(system.solve_rhs(&b))?;
        *out = Box::into_raw(Box::new(EpwSolveReport {
            s: r.s,
            p: r.p,
            eps_rank: r.eps_rank,
            residual: r.residual,
            coeff_norm: r.coeff_norm,
            singular_values: r.singular_values,
        }));
        Ok(())
    })
}

/// Releases a report handle; null is ignored.
///
/// # Safety
/// `report` must be null or a handle from [`epw_approximate_mode`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epw_report_free(report: *mut EpwSolveReport) {
    if !report.is_null() {
        // SAFETY: the handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Relative residual, coefficient norm, eps-rank, sample count and set size.
///
/// # Safety
/// `report` must be a live handle; each out pointer must be null (skipped) or valid.
#[no_mangle]
pub unsafe extern "C" fn epw_report_summary(
    report: *const EpwSolveReport,
    residual: *mut f64,
    coeff_norm: *mut f64,
    eps_rank: *mut usize,
    s: *mut usize,
    p: *mut usize,
) -> EpwStatus {
    guard(|| {
        let r = in_ref(report)?;
        // SAFETY: each pointer is null or valid for writes.
        unsafe {
            if let Some(v) = residual.as_mut() {
                *v = r.residual;
            }
            if let Some(v) = coeff_norm.as_mut() {
                *v = r.coeff_norm;
            }
            if let Some(v) = eps_rank.as_mut() {
                *v = r.eps_rank;
            }
            if let Some(v) = s.as_mut() {
                *v = r.s;
            }
            if let Some(v) = p.as_mut() {
                *v = r.p;
            }
        }
        Ok(())
    })
}

/// Copies up to `len` singular values (descending) into `buf` and writes the
/// total count to `count`.
///
/// # Safety
/// `report` must be a live handle; `buf` must be null or hold `len` doubles;
/// `count` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn epw_report_singular_values(
    report: *const EpwSolveReport,
    buf: *mut f64,
    len: usize,
    count: *mut usize,
) -> EpwStatus {
    guard(|| {
        let r = in_ref(report)?;
        if !buf.is_null() {
            let n = len.min(r.singular_values.len());
            // SAFETY: `buf` holds at least `len >= n` doubles.
            unsafe { ptr::copy_nonoverlapping(r.singular_values.as_ptr(), buf, n) };
        }
        // SAFETY: `count` is null or valid for writes.
        if let Some(c) = unsafe { count.as_mut() } {
            *c = r.singular_values.len();
        }
        Ok(())
    })
}
