//! Exercises the C ABI from Rust: handle lifecycles, status codes, error
//! messages, and numeric agreement with the core library.

use decolab_ffi::*;
use std::f64::consts::TAU;

const NATURAL: DecolabOscillator = DecolabOscillator { mass: 1.0, omega: 1.0, hbar: 1.0 };
const VACUUM: DecolabState = DecolabState { alpha_re: 0.0, alpha_im: 0.0, s: 0.0, theta: 0.0 };

fn last_error() -> String {
    let mut buf = vec![0i8; 256];
    let n = unsafe { decolab_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take_while(|&&c| c != 0).map(|&c| c as u8).collect();
    assert!(n > 0);
    String::from_utf8(bytes).unwrap()
}

#[test]
fn closed_form_benchmark_through_ffi() {
    let diffusion =
        DecolabDiffusion { d_qq: 0.01, d_pp: 0.01, d_pq: 0.0, lambda: 0.0, mu: 0.0 };
    let mut out = 0.0;
    let status =
        unsafe { decolab_entropy_closed(NATURAL, VACUUM, diffusion, 1.0, &mut out) };
    assert_eq!(status, DecolabStatus::Ok);
    assert!((out - 0.04).abs() < 1e-12, "got {out}");
}

#[test]
fn channel_set_roundtrip_and_quadrature() {
    let set = decolab_channel_set_new(0.0);
    assert!(!set.is_null());
    unsafe {
        assert_eq!(
            decolab_channel_set_push(set, 2.0_f64.sqrt() * 0.1, 0.0, 0.0, 0.0),
            DecolabStatus::Ok
        );
        assert_eq!(
            decolab_channel_set_push(set, 0.0, 0.0, 2.0_f64.sqrt() * 0.1, 0.0),
            DecolabStatus::Ok
        );

        let mut diffusion = DecolabDiffusion { d_qq: 0.0, d_pp: 0.0, d_pq: 0.0, lambda: 0.0, mu: 0.0 };
        assert_eq!(decolab_channels_to_diffusion(set, 1.0, &mut diffusion), DecolabStatus::Ok);
        assert!((diffusion.d_qq - 0.01).abs() < 1e-15);
        assert!((diffusion.d_pp - 0.01).abs() < 1e-15);
        assert_eq!(diffusion.d_pq, 0.0);

        // Quadrature and closed form agree through the ABI as well.
        let mut closed = 0.0;
        assert_eq!(
            decolab_entropy_closed(NATURAL, VACUUM, diffusion, 1.0, &mut closed),
            DecolabStatus::Ok
        );
        let mut quad = 0.0;
        let mut converged = 0;
        assert_eq!(
            decolab_entropy_quadrature(NATURAL, VACUUM, set, 1.0, 48, &mut quad, &mut converged),
            DecolabStatus::Ok
        );
        assert_eq!(converged, 1);
        assert!((closed - quad).abs() < 1e-8, "closed {closed} vs quadrature {quad}");

        decolab_channel_set_free(set);
    }
}

#[test]
fn status_codes_and_error_messages() {
    // Invalid oscillator.
    let bad_osc = DecolabOscillator { mass: -1.0, omega: 1.0, hbar: 1.0 };
    let d = DecolabDiffusion { d_qq: 0.01, d_pp: 0.01, d_pq: 0.0, lambda: 0.0, mu: 0.0 };
    let mut out = 0.0;
    let status = unsafe { decolab_entropy_closed(bad_osc, VACUUM, d, 1.0, &mut out) };
    assert_eq!(status, DecolabStatus::InvalidArgument);
    assert!(last_error().contains("mass"));

    // The thermal-equilibrium condition.
    let dpq = DecolabDiffusion { d_qq: 0.02, d_pp: 0.02, d_pq: 0.01, lambda: 0.0, mu: 0.0 };
    let status = unsafe { decolab_entropy_closed(NATURAL, VACUUM, dpq, 1.0, &mut out) };
    assert_eq!(status, DecolabStatus::ConditionViolated);

    // Null pointers.
    let status = unsafe {
        decolab_entropy_closed(NATURAL, VACUUM, d, 1.0, std::ptr::null_mut())
    };
    assert_eq!(status, DecolabStatus::NullPointer);

    // Under-resolved truncation.
    let set = decolab_channel_set_new(0.0);
    unsafe {
        decolab_channel_set_push(set, 1.0, 0.0, 0.0, 0.0);
        let far = DecolabState { alpha_re: 4.0, alpha_im: 0.0, s: 0.0, theta: 0.0 };
        let status = decolab_entropy_quadrature(NATURAL, far, set, 1.0, 10, &mut out, std::ptr::null_mut());
        assert_eq!(status, DecolabStatus::UnderResolved);
        decolab_channel_set_free(set);
    }
}

#[test]
fn kernel_handles_and_limits() {
    let kern = decolab_kernel_gaussian_new(1.0, 1.0);
    assert!(!kern.is_null());
    unsafe {
        let mut c0 = 0.0;
        assert_eq!(decolab_correlation(kern, 1.0, 0.0, &mut c0), DecolabStatus::Ok);
        assert!((c0 - 1.0).abs() < 1e-15);

        let mut g1 = 0.0;
        assert_eq!(decolab_decoherence_g(kern, 1.0, 1.0, &mut g1), DecolabStatus::Ok);
        assert!((g1 - 2.0 * (1.0 - (-1.0_f64).exp())).abs() < 1e-12);

        let mut ceiling = 0.0;
        assert_eq!(decolab_short_correlation_limit(kern, 1.0, 2.0, &mut ceiling), DecolabStatus::Ok);
        assert!((ceiling - 4.0).abs() < 1e-12);

        let mut width = 0.0;
        assert_eq!(decolab_spectral_width(kern, &mut width), DecolabStatus::Ok);
        assert!((width - std::f64::consts::SQRT_2).abs() < 1e-12);

        let mut mapped = DecolabDiffusion { d_qq: 1.0, d_pp: 0.0, d_pq: 1.0, lambda: 1.0, mu: 1.0 };
        assert_eq!(decolab_long_correlation_map(kern, 1.0, &mut mapped), DecolabStatus::Ok);
        assert!((mapped.d_pp - 1.0).abs() < 1e-12, "D_pp = c0/sigma^2 = {}", mapped.d_pp);
        assert_eq!(mapped.d_qq, 0.0);

        let mut ds = 0.0;
        let status = decolab_entropy_correlated(NATURAL, VACUUM, kern, 1.0, &mut ds, std::ptr::null_mut());
        assert_eq!(status, DecolabStatus::Ok);
        assert!(ds > 0.0 && ds <= ceiling);

        decolab_kernel_free(kern);
    }

    // Invalid kernels return null and record a message.
    assert!(decolab_kernel_gaussian_new(-1.0, 1.0).is_null());
    assert!(last_error().contains("c0"));

    let k = [-1.0, 0.0, 1.0];
    let w = [0.5, 1.0, 0.4]; // not even in k
    let bad = unsafe { decolab_kernel_tabulated_new(k.as_ptr(), w.as_ptr(), 3) };
    assert!(bad.is_null());
}

#[test]
fn tabulated_kernel_through_ffi() {
    // Uniform grid sampling exp(-k^2/2): a resolved symmetric spectrum.
    let n = 201;
    let k_max = 8.0;
    let k: Vec<f64> = (0..n).map(|i| -k_max + 2.0 * k_max * i as f64 / (n - 1) as f64).collect();
    let w: Vec<f64> = k.iter().map(|&kk| (-0.5 * kk * kk).exp()).collect();
    let kern = unsafe { decolab_kernel_tabulated_new(k.as_ptr(), w.as_ptr(), n) };
    assert!(!kern.is_null());
    unsafe {
        let mut width = 0.0;
        assert_eq!(decolab_spectral_width(kern, &mut width), DecolabStatus::Ok);
        assert!((width - 1.0).abs() < 1e-6, "unit-variance spectrum, got {width}");
        decolab_kernel_free(kern);
    }
}

#[test]
fn sieve_through_ffi() {
    let d = DecolabDiffusion { d_qq: 0.02, d_pp: 0.005, d_pq: 0.0, lambda: 0.0, mu: 0.0 };
    let grid = DecolabSieveGrid {
        s_max: 0.0,
        n_s: 24,
        n_theta: 24,
        refinement_tol: 0.0,
        refinement_max_iter: 0,
    };
    let mut out = DecolabSieveResult {
        s_star: 0.0,
        theta_star: 0.0,
        delta_sigma_star: 0.0,
        flat_objective: 0,
        has_stationarity_residual: 0,
        stationarity_residual: 0.0,
    };
    let status = unsafe { decolab_sieve_quadratic(NATURAL, d, 20.0 * TAU / 2.0, grid, &mut out) };
    assert_eq!(status, DecolabStatus::Ok);
    assert_eq!(out.flat_objective, 0);
    assert!(out.s_star <= 0.02, "long-time argmin unsqueezed, s* = {}", out.s_star);

    // t = 0 violates the sieve precondition.
    let status = unsafe { decolab_sieve_quadratic(NATURAL, d, 0.0, grid, &mut out) };
    assert_eq!(status, DecolabStatus::InvalidArgument);
}

#[test]
fn version_and_period() {
    let version = unsafe { std::ffi::CStr::from_ptr(decolab_version()) };
    assert!(!version.to_str().unwrap().is_empty());
    assert!((decolab_oscillator_period(NATURAL) - TAU).abs() < 1e-15);
}
