//! Environments with a finite spatial correlation length.
//!
//! The noise is a classical fluctuating potential, delta-correlated in time,
//! with spatial autocorrelation `c(r)`. Its Fourier partner is the spectral
//! density `|a(k)|^2` of plane-wave channels `a(k) exp(i k x)`:
//!
//! ```text
//! c(r) = (hbar / 2) Int |a(k)|^2 exp(i k r) dk
//! ```
//!
//! First-order entropy production of a pure state is
//!
//! ```text
//! dsigma(t) = (1/hbar) Int_0^t Int |a(k)|^2 (1 - |<exp(i k x(tau))>|^2) dk dtau
//! ```
//!
//! evaluated here by nested Gauss-Legendre / trapezoid quadrature. Two
//! limits bracket the physics: a kernel much wider than the state reduces to
//! pure position decoherence (a `D_pp`-only quadratic channel), while a very
//! narrow kernel mixes every state at the universal rate `2 c(0) / hbar^2`.
//!
//! Only one spatial dimension and homogeneous, isotropic kernels are
//! supported.

use num_complex::Complex64 as C64;

use crate::channels::{DiffusionCoefficients, QuadratureOutcome};
use crate::error::{Error, Result};
use crate::oscillator::{
    gaussian_moments, GaussianMoments, OscillatorParams, SqueezedCoherentParams, TruncatedState,
    DEFAULT_TAIL_TOL,
};
use crate::quadrature::{refine_to_convergence, GaussLegendre, QuadDiagnostics};

/// `c(r) = c0 exp(-(r/sigma)^2)`: correlation amplitude `c0` at zero
/// separation, correlation length `sigma`. The exponent decays; a growing
/// exponent would not be a correlation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    pub c0: f64,
    pub sigma: f64,
}

impl GaussianKernel {
    pub fn new(c0: f64, sigma: f64) -> Result<Self> {
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(Error::InvalidParameter(format!("c0 must be > 0, got {c0}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self { c0, sigma })
    }

    /// Spectral density `|a(k)|^2 = (c0 sigma / hbar sqrt(pi)) exp(-sigma^2 k^2 / 4)`.
    pub fn density(&self, hbar: f64, k: f64) -> f64 {
        let peak = self.c0 * self.sigma / (hbar * std::f64::consts::PI.sqrt());
        peak * (-0.25 * self.sigma * self.sigma * k * k).exp()
    }

    /// Wavenumber beyond which the density has fallen below `1e-13` of peak.
    pub fn k_support(&self) -> f64 {
        2.0 * (1e13_f64.ln()).sqrt() / self.sigma
    }
}

/// Spectral density sampled on a symmetric wavenumber grid; integrals over
/// tabulated spectra use the trapezoid rule on that grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    k: Vec<f64>,
    weight: Vec<f64>,
}

impl TabulatedSpectrum {
    pub fn new(k: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        if k.len() != weight.len() {
            return Err(Error::DimensionMismatch { expected: k.len(), actual: weight.len() });
        }
        if k.len() < 3 {
            return Err(Error::SpectrumFormat(format!(
                "need at least 3 grid points, got {}",
                k.len()
            )));
        }
        for pair in k.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::SpectrumFormat(
                    "wavenumber grid must be strictly increasing".to_string(),
                ));
            }
        }
        let k_max = k.last().unwrap().abs().max(k[0].abs());
        let w_max = weight.iter().cloned().fold(0.0_f64, f64::max);
        let n = k.len();
        for i in 0..n {
            if !(weight[i] >= 0.0) || !weight[i].is_finite() {
                return Err(Error::SpectrumFormat(format!(
                    "weights must be finite and >= 0, got {} at k = {}",
                    weight[i], k[i]
                )));
            }
            let j = n - 1 - i;
            if (k[i] + k[j]).abs() > 1e-8 * k_max.max(1e-300) {
                return Err(Error::SpectrumFormat(format!(
                    "grid is not symmetric: k[{i}] = {} vs k[{j}] = {}",
                    k[i], k[j]
                )));
            }
            if (weight[i] - weight[j]).abs() > 1e-8 * w_max.max(1e-300) {
                return Err(Error::SpectrumFormat(format!(
                    "weights are not even in k: w({}) = {} vs w({}) = {}",
                    k[i], weight[i], k[j], weight[j]
                )));
            }
        }
        Ok(Self { k, weight })
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// Trapezoid integral of `f(k, |a(k)|^2)` over the grid.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = 0.0;
        let mut prev = f(self.k[0], self.weight[0]);
        for i in 1..self.k.len() {
            let cur = f(self.k[i], self.weight[i]);
            acc += 0.5 * (prev + cur) * (self.k[i] - self.k[i - 1]);
            prev = cur;
        }
        acc
    }

    /// Returns a copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { k: self.k.clone(), weight: self.weight.iter().map(|w| w * factor).collect() }
    }
}

/// Environment spatial correlation, either in closed Gaussian form or as a
/// tabulated spectral density.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationKernel {
    Gaussian(GaussianKernel),
    Tabulated(TabulatedSpectrum),
}

impl CorrelationKernel {
    pub fn gaussian(c0: f64, sigma: f64) -> Result<Self> {
        Ok(Self::Gaussian(GaussianKernel::new(c0, sigma)?))
    }
}

/// Spatial correlation `c(r)`; for tabulated spectra this is the (cosine)
/// Fourier integral over the grid.
pub fn correlation(kern: &CorrelationKernel, hbar: f64, r: f64) -> f64 {
    match kern {
        CorrelationKernel::Gaussian(g) => {
            g.c0 * (-(r / g.sigma) * (r / g.sigma)).exp()
        }
        CorrelationKernel::Tabulated(tab) => {
            0.5 * hbar * tab.integrate(|k, w| w * (k * r).cos())
        }
    }
}

/// Decoherence rate at separation `r`: `g(r) = (2 / hbar^2)(c(0) - c(r))`.
/// Vanishes at `r = 0`, saturates at `2 c(0) / hbar^2` for separations well
/// beyond the correlation length, and is even in `r`.
pub fn decoherence_g(kern: &CorrelationKernel, hbar: f64, r: f64) -> f64 {
    2.0 / (hbar * hbar) * (correlation(kern, hbar, 0.0) - correlation(kern, hbar, r))
}

/// Spread of the normalized spectral density, defined as its standard
/// deviation in `k` (the mean vanishes by symmetry). For the Gaussian kernel
/// this is `sqrt(2) / sigma`.
pub fn spectral_width(kern: &CorrelationKernel) -> f64 {
    match kern {
        CorrelationKernel::Gaussian(g) => std::f64::consts::SQRT_2 / g.sigma,
        CorrelationKernel::Tabulated(tab) => {
            let norm = tab.integrate(|_, w| w);
            let second = tab.integrate(|k, w| k * k * w);
            (second / norm).sqrt()
        }
    }
}

/// Tabulates the spectral density of a Gaussian kernel on a uniform
/// symmetric grid of `n_k` points over `[-k_max, k_max]`. Errors when the
/// cutoff truncates more than `1e-12` of the peak density.
pub fn kernel_to_spectrum(
    kern: &GaussianKernel,
    hbar: f64,
    k_max: f64,
    n_k: usize,
) -> Result<TabulatedSpectrum> {
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Err(Error::InvalidParameter(format!("k_max must be > 0, got {k_max}")));
    }
    if n_k < 3 {
        return Err(Error::InvalidParameter(format!("n_k must be at least 3, got {n_k}")));
    }
    let rel_at_cutoff = kern.density(hbar, k_max) / kern.density(hbar, 0.0);
    if rel_at_cutoff >= 1e-12 {
        return Err(Error::SpectrumTruncated(format!(
            "density at k_max is {rel_at_cutoff:.3e} of peak; require < 1e-12 \
             (k_max >= {:.6} for this kernel)",
            kern.k_support()
        )));
    }
    let step = 2.0 * k_max / (n_k - 1) as f64;
    let k: Vec<f64> = (0..n_k).map(|i| -k_max + i as f64 * step).collect();
    let weight: Vec<f64> = k.iter().map(|&kk| kern.density(hbar, kk)).collect();
    TabulatedSpectrum::new(k, weight)
}

/// Variance of `x(tau) = x cos(w tau) + (p / m w) sin(w tau)` under the
/// given second moments.
pub(crate) fn var_x_at(mom: &GaussianMoments, osc: &OscillatorParams, tau: f64) -> f64 {
    let (s, c) = (osc.omega * tau).sin_cos();
    let mw = osc.mass * osc.omega;
    c * c * mom.var_x + s * s * mom.var_p / (mw * mw) + 2.0 * s * c * mom.cov_xp / mw
}

fn mean_x_at(mom: &GaussianMoments, osc: &OscillatorParams, tau: f64) -> f64 {
    let (s, c) = (osc.omega * tau).sin_cos();
    c * mom.mean_x + s * mom.mean_p / (osc.mass * osc.omega)
}

/// Characteristic function `<exp(i k x(tau))>` for a squeezed coherent state:
/// `exp(i k <x(tau)> - k^2 Var x(tau) / 2)`. Displacement contributes a pure
/// phase, so the magnitude is displacement-invariant.
pub fn char_function(
    params: &SqueezedCoherentParams,
    osc: &OscillatorParams,
    k: f64,
    tau: f64,
) -> C64 {
    let mom = gaussian_moments(params, osc);
    let vx = var_x_at(&mom, osc, tau);
    let mx = mean_x_at(&mom, osc, tau);
    (C64::new(0.0, k * mx) - C64::new(0.5 * k * k * vx, 0.0)).exp()
}

/// Characteristic function of an arbitrary truncated state, evaluated as a
/// Fock-space inner product: the free evolution puts phases
/// `exp(-i n omega tau)` on the amplitudes, and `exp(i k x)` is applied
/// through the eigendecomposition of `x`. Errors when the shifted state is
/// under-resolved by the truncation.
pub fn char_function_fock(
    state: &TruncatedState,
    osc: &OscillatorParams,
    k: f64,
    tau: f64,
) -> Result<C64> {
    let eval = FockCharEvaluator::new(state, osc)?;
    eval.check_resolved(k)?;
    Ok(eval.eval(k, tau))
}

/// Shared machinery for repeated Fock-path characteristic-function
/// evaluations: one Hermitian eigendecomposition of `x` serves every `(k,
/// tau)` pair, since `exp(i k x)` is diagonal in the position-like basis and
/// the free evolution only rotates amplitude phases.
struct FockCharEvaluator {
    /// Eigenvalues of the truncated `x`.
    x_eigs: Vec<f64>,
    /// `V^dag |psi>` recomputable per tau: store V^dag and the amplitudes.
    vdag: nalgebra::DMatrix<C64>,
    amps: Vec<C64>,
    omega: f64,
}

impl FockCharEvaluator {
    fn new(state: &TruncatedState, osc: &OscillatorParams) -> Result<Self> {
        let n = state.dim();
        let (x, _) = crate::oscillator::build_xp(osc, n)?;
        let eig = x.symmetric_eigen();
        Ok(Self {
            x_eigs: eig.eigenvalues.iter().cloned().collect(),
            vdag: eig.eigenvectors.adjoint(),
            amps: state.amplitudes().iter().cloned().collect(),
            omega: osc.omega,
        })
    }

    /// Rotated amplitudes in the x-eigenbasis at time `tau`.
    fn rotated(&self, tau: f64) -> Vec<C64> {
        let n = self.amps.len();
        let mut phased = vec![C64::new(0.0, 0.0); n];
        for m in 0..n {
            let phase = C64::from_polar(1.0, -(m as f64) * self.omega * tau);
            phased[m] = self.amps[m] * phase;
        }
        let v = nalgebra::DVector::from_vec(phased);
        (&self.vdag * v).iter().cloned().collect()
    }

    fn eval_with(&self, k: f64, psi: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, amp) in psi.iter().enumerate() {
            acc += C64::from_polar(amp.norm_sqr(), k * self.x_eigs[j]);
        }
        acc
    }

    fn eval(&self, k: f64, tau: f64) -> C64 {
        self.eval_with(k, &self.rotated(tau))
    }

    /// The displaced state must still fit in the truncation: apply the
    /// largest phase twist and inspect the top-level population.
    fn check_resolved(&self, k: f64) -> Result<()> {
        let n = self.amps.len();
        let psi0 = self.rotated(0.0);
        let mut shifted = nalgebra::DVector::from_vec(
            psi0.iter()
                .zip(&self.x_eigs)
                .map(|(amp, &x)| amp * C64::from_polar(1.0, k * x))
                .collect::<Vec<_>>(),
        );
        shifted = &self.vdag.adjoint() * shifted;
        let population = shifted[n - 1].norm_sqr();
        if population > DEFAULT_TAIL_TOL.max(1e3 * self.amps[n - 1].norm_sqr()) {
            return Err(Error::UnderResolved {
                what: "char_function_fock",
                population,
                tolerance: DEFAULT_TAIL_TOL,
            });
        }
        Ok(())
    }
}

/// Quadrature controls for the `(k, tau)` double integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatedQuadSpec {
    /// Initial Gauss-Legendre panels over the positive-`k` half axis.
    pub k_panels: usize,
    /// Initial panels per oscillator period in `tau` (16 nodes per panel).
    pub tau_panels_per_period: usize,
    pub rel_tol: f64,
    pub max_refinements: u32,
}

impl Default for CorrelatedQuadSpec {
    fn default() -> Self {
        Self { k_panels: 8, tau_panels_per_period: 4, rel_tol: 1e-8, max_refinements: 8 }
    }
}

fn correlated_integral<F: Fn(f64) -> f64>(
    kern: &CorrelationKernel,
    hbar: f64,
    t: f64,
    quad: &CorrelatedQuadSpec,
    period: f64,
    var_at: F,
) -> (f64, QuadDiagnostics) {
    let gl = GaussLegendre::new(16);
    let periods = (t / period).ceil().max(1.0) as usize;
    let tau_base = (quad.tau_panels_per_period * periods).max(1);
    let eval = |mult: usize| -> f64 {
        let tau_panels = tau_base * mult;
        gl.integrate(0.0, t, tau_panels, |tau| {
            let vx = var_at(tau);
            match kern {
                CorrelationKernel::Gaussian(g) => {
                    let k_max = g.k_support();
                    2.0 * gl.integrate(0.0, k_max, quad.k_panels * mult, |k| {
                        g.density(hbar, k) * (-(-(k * k * vx)).exp_m1())
                    })
                }
                CorrelationKernel::Tabulated(tab) => {
                    tab.integrate(|k, w| w * (-(-(k * k * vx)).exp_m1()))
                }
            }
        })
    };
    // The multiplier doubles each refinement; for tabulated spectra only the
    // tau resolution grows (the k grid is fixed data).
    refine_to_convergence(1, quad.rel_tol, 1e-300, quad.max_refinements, eval)
}

/// Entropy production under correlated noise for a squeezed coherent state,
/// using the analytic Gaussian characteristic function:
///
/// ```text
/// (1/hbar) Int_0^t Int |a(k)|^2 (1 - exp(-k^2 Var x(tau))) dk dtau
/// ```
///
/// Nonnegative, nondecreasing in `t`, displacement-invariant, and bounded by
/// the short-correlation ceiling `2 c(0) t / hbar^2`.
pub fn entropy_production_correlated(
    params: &SqueezedCoherentParams,
    kern: &CorrelationKernel,
    osc: &OscillatorParams,
    t: f64,
    quad: &CorrelatedQuadSpec,
) -> Result<QuadratureOutcome> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(QuadratureOutcome {
            delta_sigma: 0.0,
            diagnostics: QuadDiagnostics { converged: true, refinements: 0, last_rel_delta: 0.0 },
        });
    }
    let mom = gaussian_moments(params, osc);
    let (integral, diagnostics) =
        correlated_integral(kern, osc.hbar, t, quad, osc.period(), |tau| var_x_at(&mom, osc, tau));
    Ok(QuadratureOutcome { delta_sigma: integral / osc.hbar, diagnostics })
}

/// Entropy production under correlated noise for an arbitrary truncated
/// state, with `|<exp(i k x(tau))>|^2` evaluated on the Fock space. The
/// Gaussian-state path and this one are cross-checked on squeezed coherent
/// states in the tests.
pub fn entropy_production_correlated_fock(
    state: &TruncatedState,
    kern: &CorrelationKernel,
    osc: &OscillatorParams,
    t: f64,
    quad: &CorrelatedQuadSpec,
) -> Result<QuadratureOutcome> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    state.check_resolved(DEFAULT_TAIL_TOL)?;
    if t == 0.0 {
        return Ok(QuadratureOutcome {
            delta_sigma: 0.0,
            diagnostics: QuadDiagnostics { converged: true, refinements: 0, last_rel_delta: 0.0 },
        });
    }
    let eval = FockCharEvaluator::new(state, osc)?;
    let k_top = match kern {
        CorrelationKernel::Gaussian(g) => g.k_support(),
        CorrelationKernel::Tabulated(tab) => tab.k_grid().last().copied().unwrap_or(0.0),
    };
    eval.check_resolved(k_top)?;

    let gl = GaussLegendre::new(16);
    let periods = (t / osc.period()).ceil().max(1.0) as usize;
    let tau_base = (quad.tau_panels_per_period * periods).max(1);
    let hbar = osc.hbar;
    let run = |mult: usize| -> f64 {
        let tau_panels = tau_base * mult;
        gl.integrate(0.0, t, tau_panels, |tau| {
            let psi = eval.rotated(tau);
            match kern {
                CorrelationKernel::Gaussian(g) => {
                    let k_max = g.k_support();
                    2.0 * gl.integrate(0.0, k_max, quad.k_panels * mult, |k| {
                        g.density(hbar, k) * (1.0 - eval.eval_with(k, &psi).norm_sqr())
                    })
                }
                CorrelationKernel::Tabulated(tab) => {
                    tab.integrate(|k, w| w * (1.0 - eval.eval_with(k, &psi).norm_sqr()))
                }
            }
        })
    };
    let (integral, diagnostics) =
        refine_to_convergence(1, quad.rel_tol, 1e-300, quad.max_refinements, run);
    Ok(QuadratureOutcome { delta_sigma: integral / hbar, diagnostics })
}

/// The state-independent short-correlation ceiling `2 c(0) t / hbar^2`,
/// which is also the fastest off-diagonal decay rate times `t`.
pub fn short_correlation_limit(kern: &CorrelationKernel, hbar: f64, t: f64) -> f64 {
    2.0 * correlation(kern, hbar, 0.0) * t / (hbar * hbar)
}

/// Effective quadratic-channel coefficients in the long-correlation regime:
/// expanding `exp(i k x)` to first order leaves pure position decoherence
/// with
///
/// ```text
/// D_pp = (hbar / 4) Int k^2 |a(k)|^2 dk
/// ```
///
/// the coefficient for which the closed form reproduces the correlated-noise
/// quadrature as the kernel becomes much wider than the state (the
/// regime-equivalence tests pin the normalization). Validity is the caller's
/// business via [`width_condition`].
pub fn long_correlation_map(kern: &CorrelationKernel, hbar: f64) -> DiffusionCoefficients {
    let second_moment = match kern {
        // Int k^2 |a(k)|^2 dk = 4 c0 / (hbar sigma^2) in closed form.
        CorrelationKernel::Gaussian(g) => 4.0 * g.c0 / (hbar * g.sigma * g.sigma),
        CorrelationKernel::Tabulated(tab) => tab.integrate(|k, w| k * k * w),
    };
    DiffusionCoefficients::position_decoherence(0.25 * hbar * second_moment)
}

const WIDTH_RATIO_THRESHOLD: f64 = 0.1;

/// Outcome of the kernel-width validity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthCondition {
    pub satisfied: bool,
    /// `delta_k` over the tighter of the two state-width bounds; small means
    /// deep inside the long-correlation regime.
    pub margin: f64,
}

/// Checks `delta_k << (m omega / hbar) dx` and `delta_k << dp / hbar`,
/// declaring the condition satisfied when `delta_k` sits below a tenth of
/// the tighter bound.
pub fn width_condition(
    mom: &GaussianMoments,
    delta_k: f64,
    osc: &OscillatorParams,
) -> WidthCondition {
    let bound_x = osc.mass * osc.omega / osc.hbar * mom.var_x.sqrt();
    let bound_p = mom.var_p.sqrt() / osc.hbar;
    let margin = delta_k / bound_x.min(bound_p);
    WidthCondition { satisfied: margin <= WIDTH_RATIO_THRESHOLD, margin }
}

/// Parses the two-column spectrum format: `k weight` per line, whitespace
/// separated, `#` starts a comment line.
pub fn parse_spectrum(text: &str) -> Result<TabulatedSpectrum> {
    let mut k = Vec::new();
    let mut weight = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(ks), Some(ws)) = (fields.next(), fields.next()) else {
            return Err(Error::SpectrumFormat(format!(
                "line {}: expected two columns, got {trimmed:?}",
                lineno + 1
            )));
        };
        if fields.next().is_some() {
            return Err(Error::SpectrumFormat(format!(
                "line {}: expected two columns, got {trimmed:?}",
                lineno + 1
            )));
        }
        let kv: f64 = ks.parse().map_err(|_| {
            Error::SpectrumFormat(format!("line {}: bad wavenumber {ks:?}", lineno + 1))
        })?;
        let wv: f64 = ws.parse().map_err(|_| {
            Error::SpectrumFormat(format!("line {}: bad weight {ws:?}", lineno + 1))
        })?;
        k.push(kv);
        weight.push(wv);
    }
    let mut order: Vec<usize> = (0..k.len()).collect();
    order.sort_by(|&i, &j| k[i].total_cmp(&k[j]));
    let k_sorted: Vec<f64> = order.iter().map(|&i| k[i]).collect();
    let w_sorted: Vec<f64> = order.iter().map(|&i| weight[i]).collect();
    TabulatedSpectrum::new(k_sorted, w_sorted)
}

/// Reads a spectrum file in the two-column format.
pub fn load_spectrum(path: &std::path::Path) -> Result<TabulatedSpectrum> {
    let text = std::fs::read_to_string(path)?;
    parse_spectrum(&text)
}

/// Serializes a spectrum in the importable two-column format.
pub fn format_spectrum(spectrum: &TabulatedSpectrum) -> String {
    let mut out = String::from("# k weight\n");
    for (k, w) in spectrum.k_grid().iter().zip(spectrum.weights()) {
        out.push_str(&format!("{k:.17e} {w:.17e}\n"));
    }
    out
}
