//! Lindblad channels at most linear in position and momentum.
//!
//! A channel is `V_j = a_j p + b_j x`, optionally accompanied by a friction
//! term `(mu/2){x,p}` in the Hamiltonian. The channel coefficients map onto
//! diffusion coefficients
//!
//! ```text
//! D_qq = (hbar/2) sum |a_j|^2        D_pp = (hbar/2) sum |b_j|^2
//! D_pq = -(hbar/2) sum Re(a_j conj(b_j))   lambda = sum Im(a_j conj(b_j))
//! ```
//!
//! and, for `D_pq = 0`, the first-order entropy production of a pure state
//! has the closed form `f1 E + f2 Delta + f3 C - 2 lambda t` evaluated here.
//! The module also integrates the defining variance integral directly on the
//! truncated Fock space; the two routes are held against each other in tests
//! and in the acceptance suite.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::oscillator::{GaussianMoments, OscillatorParams, TruncatedState, DEFAULT_TAIL_TOL};
use crate::quadrature::{refine_to_convergence, GaussLegendre, QuadDiagnostics};

/// One Lindblad channel `V = a p + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladChannel {
    /// Coefficient of `p`.
    pub a: C64,
    /// Coefficient of `x`.
    pub b: C64,
}

/// A finite set of linear channels plus the friction coefficient `mu`
/// scaling the `{x,p}/2` Hamiltonian perturbation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LindbladChannelSet {
    pub channels: Vec<LindbladChannel>,
    pub mu: f64,
}

impl LindbladChannelSet {
    pub fn new(channels: Vec<LindbladChannel>, mu: f64) -> Result<Self> {
        for (i, ch) in channels.iter().enumerate() {
            if !ch.a.is_finite() || !ch.b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "channel {i} has non-finite coefficients"
                )));
            }
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { channels, mu })
    }

    /// Channel set scaled for a dissipator strength `epsilon`: channel
    /// coefficients pick up `sqrt(epsilon)` (the dissipator is quadratic in
    /// `V`), `mu` picks up `epsilon`.
    pub fn scaled(&self, epsilon: f64) -> Self {
        let root = epsilon.sqrt();
        Self {
            channels: self
                .channels
                .iter()
                .map(|ch| LindbladChannel { a: ch.a * root, b: ch.b * root })
                .collect(),
            mu: self.mu * epsilon,
        }
    }
}

/// Diffusion coefficients `(D_qq, D_pp, D_pq, lambda, mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionCoefficients {
    pub d_qq: f64,
    pub d_pp: f64,
    pub d_pq: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl DiffusionCoefficients {
    pub fn new(d_qq: f64, d_pp: f64, d_pq: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(d_qq >= 0.0) || !(d_pp >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "D_qq and D_pp must be >= 0, got {d_qq}, {d_pp}"
            )));
        }
        let bound = d_qq * d_pp - d_pq * d_pq;
        if bound < -1e-12 * (d_qq * d_pp).max(d_pq * d_pq).max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!(
                "Cauchy-Schwarz violated: D_qq D_pp = {} < D_pq^2 = {}",
                d_qq * d_pp,
                d_pq * d_pq
            )));
        }
        if !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameter(
                "lambda and mu must be finite".to_string(),
            ));
        }
        Ok(Self { d_qq, d_pp, d_pq, lambda, mu })
    }

    /// Pure position decoherence (`D_pp` only).
    pub fn position_decoherence(d_pp: f64) -> Self {
        Self { d_qq: 0.0, d_pp, d_pq: 0.0, lambda: 0.0, mu: 0.0 }
    }
}

/// Maps channel coefficients onto diffusion coefficients; `mu` passes through.
pub fn channels_to_diffusion(set: &LindbladChannelSet, hbar: f64) -> DiffusionCoefficients {
    let mut sum_aa = 0.0;
    let mut sum_bb = 0.0;
    let mut sum_re = 0.0;
    let mut sum_im = 0.0;
    for ch in &set.channels {
        sum_aa += ch.a.norm_sqr();
        sum_bb += ch.b.norm_sqr();
        let ab = ch.a * ch.b.conj();
        sum_re += ab.re;
        sum_im += ab.im;
    }
    DiffusionCoefficients {
        d_qq: 0.5 * hbar * sum_aa,
        d_pp: 0.5 * hbar * sum_bb,
        d_pq: -0.5 * hbar * sum_re,
        lambda: sum_im,
        mu: set.mu,
    }
}

/// The three time-dependent coefficients multiplying the energy, the energy
/// asymmetry and the cross moment in the closed-form entropy production.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FCoefficients {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub t: f64,
}

/// Evaluates `f1, f2, f3` at time `t`. Requires `D_pq = 0`.
///
/// With `c+ = 2 D_qq / hbar^2 + 2 D_pp / (m omega hbar)^2` and `c-` the same
/// difference:
///
/// ```text
/// f1 = 2 m t c+
/// f2 = 2 m (sin(2 omega t) / 2 omega) c-
/// f3 = -2 m (sin^2(omega t) / omega) c-
/// ```
///
/// The `sin^2` prefactor carries `m/omega`, not `1/omega^2`: `f3` multiplies
/// the `omega`-scaled cross moment and must share the `1/energy` dimension of
/// `f1` and `f2`. The truncated-Fock quadrature pins this normalization (see
/// the mixed-units tests).
pub fn f_coefficients(
    t: f64,
    osc: &OscillatorParams,
    d: &DiffusionCoefficients,
) -> Result<FCoefficients> {
    if d.d_pq != 0.0 {
        return Err(Error::ConditionViolated(format!(
            "the closed form requires D_pq = 0 (thermal-equilibrium condition), got D_pq = {}",
            d.d_pq
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let hbar2 = osc.hbar * osc.hbar;
    let mwh = osc.mass * osc.omega * osc.hbar;
    let c_sum = 2.0 * d.d_qq / hbar2 + 2.0 * d.d_pp / (mwh * mwh);
    let c_diff = 2.0 * d.d_qq / hbar2 - 2.0 * d.d_pp / (mwh * mwh);
    // Reduce omega*t modulo pi before the trig calls: both sin(2 w t) and
    // sin^2(w t) have period pi in w t, and fmod is exact, so the oscillatory
    // coefficients vanish identically at integer multiples of the half period.
    let r = (osc.omega * t) % std::f64::consts::PI;
    let sin_2wt = (2.0 * r).sin();
    let sin_sq = r.sin() * r.sin();
    let two_m = 2.0 * osc.mass;
    Ok(FCoefficients {
        f1: two_m * t * c_sum,
        f2: two_m * (sin_2wt / (2.0 * osc.omega)) * c_diff,
        f3: -two_m * (sin_sq / osc.omega) * c_diff,
        t,
    })
}

/// Closed-form first-order entropy production `f1 E + f2 Delta + f3 C -
/// 2 lambda t`, with
///
/// ```text
/// E     = Var(p)/2m + (m omega^2/2) Var(x)
/// Delta = Var(p)/2m - (m omega^2/2) Var(x)
/// C     = omega cov_xp
/// ```
///
/// Only central moments enter, so the result is displacement-invariant and
/// `mu`-independent. Requires `D_pq = 0`.
pub fn entropy_production_closed(
    moments: &GaussianMoments,
    d: &DiffusionCoefficients,
    osc: &OscillatorParams,
    t: f64,
) -> Result<f64> {
    let f = f_coefficients(t, osc, d)?;
    let kinetic = moments.var_p / (2.0 * osc.mass);
    let potential = 0.5 * osc.mass * osc.omega * osc.omega * moments.var_x;
    let energy = kinetic + potential;
    let asymmetry = kinetic - potential;
    let cross = osc.omega * moments.cov_xp;
    Ok(f.f1 * energy + f.f2 * asymmetry + f.f3 * cross - 2.0 * d.lambda * t)
}

/// Quadrature estimate of an entropy production with its convergence record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome {
    pub delta_sigma: f64,
    pub diagnostics: QuadDiagnostics,
}

/// Direct time-quadrature of the defining pure-state entropy production
///
/// ```text
/// (2/hbar) Int_0^t sum_j ( <V_j^dag(tau) V_j(tau)> - |<V_j(tau)>|^2 ) dtau
/// ```
///
/// with `V_j(tau)` assembled from the exactly rotated Heisenberg operators
/// `x(tau) = x cos + (p/m omega) sin`, `p(tau) = p cos - m omega x sin`; no
/// Hamiltonian is ever exponentiated numerically. Works for any pure state
/// and any channel set (including `D_pq != 0`); `mu` never enters.
///
/// `n_steps` (>= 16) sets the initial quadrature resolution; panels are then
/// doubled until two refinements agree to `1e-9` relative. A failure to
/// converge is reported in the diagnostics, not as an error.
pub fn entropy_production_quadrature(
    state: &TruncatedState,
    set: &LindbladChannelSet,
    osc: &OscillatorParams,
    t: f64,
    n_steps: usize,
) -> Result<QuadratureOutcome> {
    if n_steps < 16 {
        return Err(Error::InvalidParameter(format!(
            "n_steps must be at least 16, got {n_steps}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    state.check_resolved(DEFAULT_TAIL_TOL)?;

    if t == 0.0 || set.channels.is_empty() {
        return Ok(QuadratureOutcome {
            delta_sigma: 0.0,
            diagnostics: QuadDiagnostics { converged: true, refinements: 0, last_rel_delta: 0.0 },
        });
    }

    // x|psi> and p|psi> once; V_j(tau)|psi> is a 2-term combination of them.
    let n = state.dim();
    let amp = state.amplitudes();
    let xs = osc.x_scale();
    let ps = osc.p_scale();
    let mut wx = vec![C64::new(0.0, 0.0); n];
    let mut wp = vec![C64::new(0.0, 0.0); n];
    for m in 0..n {
        let up = if m + 1 < n { ((m + 1) as f64).sqrt() * amp[m + 1] } else { C64::new(0.0, 0.0) };
        let down = if m > 0 { (m as f64).sqrt() * amp[m - 1] } else { C64::new(0.0, 0.0) };
        wx[m] = xs * (up + down);
        wp[m] = C64::i() * ps * (down - up);
    }

    let m_omega = osc.mass * osc.omega;
    let integrand = |tau: f64| -> f64 {
        let (sin_wt, cos_wt) = (osc.omega * tau).sin_cos();
        let mut sum = 0.0;
        for ch in &set.channels {
            // V(tau) = cx * x + cp * p with
            // cx = -a m w sin + b cos,  cp = a cos + b sin / (m w).
            let cx = -ch.a * (m_omega * sin_wt) + ch.b * cos_wt;
            let cp = ch.a * cos_wt + ch.b * (sin_wt / m_omega);
            let mut norm_sq = 0.0;
            let mut mean = C64::new(0.0, 0.0);
            for k in 0..n {
                let v = cx * wx[k] + cp * wp[k];
                norm_sq += v.norm_sqr();
                mean += amp[k].conj() * v;
            }
            sum += norm_sq - mean.norm_sqr();
        }
        sum
    };

    let gl = GaussLegendre::new(16);
    let periods = (t / osc.period()).ceil().max(1.0) as usize;
    let initial_panels = (n_steps / 16).max(2 * periods).max(1);
    let (integral, diagnostics) =
        refine_to_convergence(initial_panels, 1e-9, 1e-300, 12, |panels| {
            gl.integrate(0.0, t, panels, integrand)
        });
    Ok(QuadratureOutcome { delta_sigma: 2.0 / osc.hbar * integral, diagnostics })
}
