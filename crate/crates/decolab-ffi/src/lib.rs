//! C ABI over the decolab entropy-production library.
//!
//! Conventions:
//!
//! * Every fallible call returns a [`DecolabStatus`]; `DECOLAB_STATUS_OK`
//!   is zero. The most recent failure message is retrievable per thread
//!   through [`decolab_last_error_message`].
//! * Channel sets and correlation kernels are opaque handles created and
//!   released through their `_new` / `_free` pairs. All other data crosses
//!   the boundary as plain C structs of doubles.
//! * The generated header lives at `include/decolab.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};

use num_complex::Complex64 as C64;

use decolab::channels::{
    channels_to_diffusion, entropy_production_closed, entropy_production_quadrature,
    DiffusionCoefficients, LindbladChannel, LindbladChannelSet,
};
use decolab::correlated::{
    correlation, decoherence_g, entropy_production_correlated, long_correlation_map,
    short_correlation_limit, spectral_width, CorrelatedQuadSpec, CorrelationKernel,
    GaussianKernel, TabulatedSpectrum,
};
use decolab::error::Error;
use decolab::oscillator::{
    gaussian_moments, make_state, FockTruncation, OscillatorParams, SqueezedCoherentParams,
};
use decolab::sieve::{sieve_quadratic, SieveGrid};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn record_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Outcome of a decolab call; zero means success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecolabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConditionViolated = 3,
    UnderResolved = 4,
    IntegrationFailure = 5,
    IoFailure = 6,
}

fn status_of(err: &Error) -> DecolabStatus {
    match err {
        Error::InvalidParameter(_)
        | Error::InvalidTruncation(_)
        | Error::DimensionMismatch { .. }
        | Error::SpectrumTruncated(_)
        | Error::SpectrumFormat(_) => DecolabStatus::InvalidArgument,
        Error::ConditionViolated(_) => DecolabStatus::ConditionViolated,
        Error::UnderResolved { .. } => DecolabStatus::UnderResolved,
        Error::IntegrationQuality(_) => DecolabStatus::IntegrationFailure,
        Error::Io(_) => DecolabStatus::IoFailure,
    }
}

fn fail(err: Error) -> DecolabStatus {
    let status = status_of(&err);
    record_error(err.to_string());
    status
}

fn fail_null(what: &str) -> DecolabStatus {
    record_error(format!("null pointer: {what}"));
    DecolabStatus::NullPointer
}

/// Oscillator parameters: mass, angular frequency, quantum of action.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DecolabOscillator {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl DecolabOscillator {
    fn to_params(self) -> Result<OscillatorParams, Error> {
        OscillatorParams::new(self.mass, self.omega, self.hbar)
    }
}

/// Squeezed coherent state coordinates: displacement `alpha`, squeeze
/// magnitude `s` (>= 0), squeeze phase `theta`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DecolabState {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub s: f64,
    pub theta: f64,
}

impl DecolabState {
    fn to_params(self) -> Result<SqueezedCoherentParams, Error> {
        SqueezedCoherentParams::new(C64::new(self.alpha_re, self.alpha_im), self.s, self.theta)
    }
}

/// Diffusion coefficients of the quadratic-channel family.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DecolabDiffusion {
    pub d_qq: f64,
    pub d_pp: f64,
    pub d_pq: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl DecolabDiffusion {
    fn to_coefficients(self) -> Result<DiffusionCoefficients, Error> {
        DiffusionCoefficients::new(self.d_qq, self.d_pp, self.d_pq, self.lambda, self.mu)
    }

    fn from_coefficients(d: &DiffusionCoefficients) -> Self {
        Self { d_qq: d.d_qq, d_pp: d.d_pp, d_pq: d.d_pq, lambda: d.lambda, mu: d.mu }
    }
}

/// Sieve search controls; pass zeros to take the defaults
/// (s_max 2, 48 x 64 grid, refinement tolerance 1e-9).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DecolabSieveGrid {
    pub s_max: f64,
    pub n_s: usize,
    pub n_theta: usize,
    pub refinement_tol: f64,
    pub refinement_max_iter: usize,
}

impl DecolabSieveGrid {
    fn to_grid(self) -> Result<SieveGrid, Error> {
        let d = SieveGrid::default();
        SieveGrid::new(
            if self.s_max > 0.0 { self.s_max } else { d.s_max },
            if self.n_s > 0 { self.n_s } else { d.n_s },
            if self.n_theta > 0 { self.n_theta } else { d.n_theta },
            if self.refinement_tol > 0.0 { self.refinement_tol } else { d.refinement_tol },
            if self.refinement_max_iter > 0 { self.refinement_max_iter } else { d.refinement_max_iter },
        )
    }
}

/// Sieve outcome. When `flat_objective` is nonzero the objective had no
/// gradable minimum and the starred fields are meaningless.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DecolabSieveResult {
    pub s_star: f64,
    pub theta_star: f64,
    pub delta_sigma_star: f64,
    pub flat_objective: i32,
    /// Nonzero when `stationarity_residual` is populated.
    pub has_stationarity_residual: i32,
    pub stationarity_residual: f64,
}

/// Opaque set of Lindblad channels linear in position and momentum.
pub struct DecolabChannelSet {
    inner: LindbladChannelSet,
}

/// Opaque spatial correlation kernel (Gaussian or tabulated spectrum).
pub struct DecolabKernel {
    inner: CorrelationKernel,
}

/// Copies the most recent error message on this thread into `buffer`
/// (nul-terminated, truncated to `capacity`). Returns the full message
/// length in bytes, or 0 when no error has been recorded.
///
/// # Safety
/// `buffer` must point to at least `capacity` writable bytes, or be null
/// (in which case only the length is reported).
#[no_mangle]
pub unsafe extern "C" fn decolab_last_error_message(
    buffer: *mut c_char,
    capacity: usize,
) -> usize {
    LAST_ERROR.with(|slot| {
        let borrow = slot.borrow();
        let Some(message) = borrow.as_ref() else {
            return 0;
        };
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buffer.cast(), n);
            // Guarantee termination even when truncated.
            *buffer.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Creates an empty channel set with friction coefficient `mu`.
/// Returns null when `mu` is not finite.
#[no_mangle]
pub extern "C" fn decolab_channel_set_new(mu: f64) -> *mut DecolabChannelSet {
    match LindbladChannelSet::new(Vec::new(), mu) {
        Ok(inner) => Box::into_raw(Box::new(DecolabChannelSet { inner })),
        Err(err) => {
            let _ = fail(err);
            std::ptr::null_mut()
        }
    }
}

/// Appends a channel `V = a p + b x` with complex coefficients.
///
/// # Safety
/// `set` must be a live handle from [`decolab_channel_set_new`].
#[no_mangle]
pub unsafe extern "C" fn decolab_channel_set_push(
    set: *mut DecolabChannelSet,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
) -> DecolabStatus {
    let Some(set) = set.as_mut() else {
        return fail_null("channel set");
    };
    let channel = LindbladChannel { a: C64::new(a_re, a_im), b: C64::new(b_re, b_im) };
    if !channel.a.is_finite() || !channel.b.is_finite() {
        return fail(Error::InvalidParameter("channel coefficients must be finite".to_string()));
    }
    set.inner.channels.push(channel);
    DecolabStatus::Ok
}

/// Releases a channel set. Null is ignored.
///
/// # Safety
/// `set` must be a handle from [`decolab_channel_set_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn decolab_channel_set_free(set: *mut DecolabChannelSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Maps the channel coefficients onto diffusion coefficients
/// `(D_qq, D_pp, D_pq, lambda, mu)`.
///
/// # Safety
/// `set` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_channels_to_diffusion(
    set: *const DecolabChannelSet,
    hbar: f64,
    out: *mut DecolabDiffusion,
) -> DecolabStatus {
    let Some(set) = set.as_ref() else {
        return fail_null("channel set");
    };
    let Some(out) = out.as_mut() else {
        return fail_null("output");
    };
    if !(hbar > 0.0) {
        return fail(Error::InvalidParameter(format!("hbar must be > 0, got {hbar}")));
    }
    *out = DecolabDiffusion::from_coefficients(&channels_to_diffusion(&set.inner, hbar));
    DecolabStatus::Ok
}

/// Closed-form first-order entropy production of a squeezed coherent state
/// at time `t` (requires `D_pq = 0`).
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_entropy_closed(
    osc: DecolabOscillator,
    state: DecolabState,
    diffusion: DecolabDiffusion,
    t: f64,
    out: *mut f64,
) -> DecolabStatus {
    let Some(out) = out.as_mut() else {
        return fail_null("output");
    };
    let result = (|| {
        let osc = osc.to_params()?;
        let params = state.to_params()?;
        let d = diffusion.to_coefficients()?;
        entropy_production_closed(&gaussian_moments(&params, &osc), &d, &osc, t)
    })();
    match result {
        Ok(v) => {
            *out = v;
            DecolabStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Time-quadrature of the defining entropy-production integral for the
/// squeezed coherent state built on `fock_dim` levels. Works for any
/// channel set, including `D_pq != 0`. `converged` (optional) reports the
/// quadrature convergence flag.
///
/// # Safety
/// `set` must be a live handle; `out` must point to writable storage;
/// `converged` may be null.
#[no_mangle]
pub unsafe extern "C" fn decolab_entropy_quadrature(
    osc: DecolabOscillator,
    state: DecolabState,
    set: *const DecolabChannelSet,
    t: f64,
    fock_dim: usize,
    out: *mut f64,
    converged: *mut i32,
) -> DecolabStatus {
    let Some(set) = set.as_ref() else {
        return fail_null("channel set");
    };
    let Some(out) = out.as_mut() else {
        return fail_null("output");
    };
    let result = (|| {
        let osc = osc.to_params()?;
        let params = state.to_params()?;
        let trunc = FockTruncation::with_default_tol(fock_dim)?;
        let psi = make_state(&params, &trunc)?;
        entropy_production_quadrature(&psi, &set.inner, &osc, t, 64)
    })();
    match result {
        Ok(v) => {
            *out = v.delta_sigma;
            if let Some(flag) = converged.as_mut() {
                *flag = v.diagnostics.converged as i32;
            }
            DecolabStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Minimizes the closed-form entropy production over squeezed coherent
/// states at time `t` (`D_pq = 0`, `t > 0`).
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_sieve_quadratic(
    osc: DecolabOscillator,
    diffusion: DecolabDiffusion,
    t: f64,
    grid: DecolabSieveGrid,
    out: *mut DecolabSieveResult,
) -> DecolabStatus {
    let Some(out) = out.as_mut() else {
        return fail_null("output");
    };
    let result = (|| {
        let osc = osc.to_params()?;
        let d = diffusion.to_coefficients()?;
        let grid = grid.to_grid()?;
        sieve_quadratic(&d, &osc, t, &grid)
    })();
    match result {
        Ok(r) => {
            *out = DecolabSieveResult {
                s_star: r.s_star.unwrap_or(f64::NAN),
                theta_star: r.theta_star.unwrap_or(f64::NAN),
                delta_sigma_star: r.delta_sigma_star,
                flat_objective: r.flat_objective as i32,
                has_stationarity_residual: r.stationarity_residual.is_some() as i32,
                stationarity_residual: r.stationarity_residual.unwrap_or(f64::NAN),
            };
            DecolabStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Creates a Gaussian correlation kernel `c(r) = c0 exp(-(r/sigma)^2)`.
/// Returns null (with a recorded error) on invalid parameters.
#[no_mangle]
pub extern "C" fn decolab_kernel_gaussian_new(c0: f64, sigma: f64) -> *mut DecolabKernel {
    match GaussianKernel::new(c0, sigma) {
        Ok(g) => Box::into_raw(Box::new(DecolabKernel { inner: CorrelationKernel::Gaussian(g) })),
        Err(err) => {
            let _ = fail(err);
            std::ptr::null_mut()
        }
    }
}

/// Creates a tabulated spectral-density kernel from `len` samples of a
/// symmetric wavenumber grid and nonnegative weights. Returns null (with a
/// recorded error) on invalid data.
///
/// # Safety
/// `k` and `weight` must point to at least `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn decolab_kernel_tabulated_new(
    k: *const f64,
    weight: *const f64,
    len: usize,
) -> *mut DecolabKernel {
    if k.is_null() || weight.is_null() {
        let _ = fail_null("spectrum arrays");
        return std::ptr::null_mut();
    }
    let ks = std::slice::from_raw_parts(k, len).to_vec();
    let ws = std::slice::from_raw_parts(weight, len).to_vec();
    match TabulatedSpectrum::new(ks, ws) {
        Ok(tab) => {
            Box::into_raw(Box::new(DecolabKernel { inner: CorrelationKernel::Tabulated(tab) }))
        }
        Err(err) => {
            let _ = fail(err);
            std::ptr::null_mut()
        }
    }
}

/// Releases a kernel. Null is ignored.
///
/// # Safety
/// `kernel` must be a handle from one of the kernel constructors, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn decolab_kernel_free(kernel: *mut DecolabKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

unsafe fn with_kernel<F: FnOnce(&CorrelationKernel) -> f64>(
    kernel: *const DecolabKernel,
    out: *mut f64,
    f: F,
) -> DecolabStatus {
    let Some(kernel) = kernel.as_ref() else {
        return fail_null("kernel");
    };
    let Some(out) = out.as_mut() else {
        return fail_null("output");
    };
    *out = f(&kernel.inner);
    DecolabStatus::Ok
}

/// Spatial correlation `c(r)`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_correlation(
    kernel: *const DecolabKernel,
    hbar: f64,
    r: f64,
    out: *mut f64,
) -> DecolabStatus {
    with_kernel(kernel, out, |k| correlation(k, hbar, r))
}

/// Decoherence rate `g(r) = (2/hbar^2)(c(0) - c(r))`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_decoherence_g(
    kernel: *const DecolabKernel,
    hbar: f64,
    r: f64,
    out: *mut f64,
) -> DecolabStatus {
    with_kernel(kernel, out, |k| decoherence_g(k, hbar, r))
}

/// Universal short-correlation entropy-production ceiling `2 c(0) t / hbar^2`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_short_correlation_limit(
    kernel: *const DecolabKernel,
    hbar: f64,
    t: f64,
    out: *mut f64,
) -> DecolabStatus {
    with_kernel(kernel, out, |k| short_correlation_limit(k, hbar, t))
}

/// Spread (standard deviation) of the normalized spectral density.
///
/// # Safety
/// `kernel` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_spectral_width(
    kernel: *const DecolabKernel,
    out: *mut f64,
) -> DecolabStatus {
    with_kernel(kernel, out, spectral_width)
}

/// Effective pure-position-decoherence coefficients of the wide-kernel
/// regime.
///
/// # Safety
/// `kernel` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn decolab_long_correlation_map(
    kernel: *const DecolabKernel,
    hbar: f64,
    out: *mut DecolabDiffusion,
) -> DecolabStatus {
    let Some(kernel) = kernel.as_ref() else {
        return fail_null("kernel");
    };
    let Some(out) = out.as_mut() else {
        return fail_null("output");
    };
    if !(hbar > 0.0) {
        return fail(Error::InvalidParameter(format!("hbar must be > 0, got {hbar}")));
    }
    *out = DecolabDiffusion::from_coefficients(&long_correlation_map(&kernel.inner, hbar));
    DecolabStatus::Ok
}

/// Entropy production of a squeezed coherent state under correlated noise
/// at time `t`. `converged` (optional) reports the quadrature flag.
///
/// # Safety
/// `kernel` must be a live handle; `out` must point to writable storage;
/// `converged` may be null.
#[no_mangle]
pub unsafe extern "C" fn decolab_entropy_correlated(
    osc: DecolabOscillator,
    state: DecolabState,
    kernel: *const DecolabKernel,
    t: f64,
    out: *mut f64,
    converged: *mut i32,
) -> DecolabStatus {
    let Some(kernel) = kernel.as_ref() else {
        return fail_null("kernel");
    };
    let Some(out) = out.as_mut() else {
        return fail_null("output");
    };
    let result = (|| {
        let osc = osc.to_params()?;
        let params = state.to_params()?;
        entropy_production_correlated(&params, &kernel.inner, &osc, t, &CorrelatedQuadSpec::default())
    })();
    match result {
        Ok(v) => {
            *out = v.delta_sigma;
            if let Some(flag) = converged.as_mut() {
                *flag = v.diagnostics.converged as i32;
            }
            DecolabStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Oscillation period `2 pi / omega`, or NaN for invalid parameters.
#[no_mangle]
pub extern "C" fn decolab_oscillator_period(osc: DecolabOscillator) -> f64 {
    match osc.to_params() {
        Ok(p) => p.period(),
        Err(err) => {
            let _ = fail(err);
            f64::NAN
        }
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn decolab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
