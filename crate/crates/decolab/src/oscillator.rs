//! Truncated Fock-space representation of harmonic-oscillator states and
//! operators, plus linear entropy and Gaussian second moments.
//!
//! Everything here is exact ladder algebra on the leading `N` number states.
//! The matrix constructions serve as the independent oracle for every closed
//! form in the rest of the crate: analytic moments and entropy productions
//! are always validated against expectation values computed in this basis.
//!
//! Conventions fixed once for the whole crate:
//!
//! * `x = sqrt(hbar / 2 m omega) (a + a^dag)`,
//!   `p = i sqrt(hbar m omega / 2) (a^dag - a)`.
//! * Displacement `D(alpha) = exp(alpha a^dag - conj(alpha) a)`.
//! * Squeeze `S(zeta) = exp((zeta a^dag^2 - conj(zeta) a^2) / 2)` with
//!   `zeta = s exp(i theta)`, so that `S^dag a S = cosh(s) a +
//!   exp(i theta) sinh(s) a^dag`. The sign in the exponent is the one that
//!   realizes this conjugation relation; it is pinned by the Fock oracle
//!   (at `theta = 0` position noise is stretched, `Var x = e^{2s} hbar/2m omega`).
//! * Squeezed coherent states are built squeeze-first: `D(alpha) S(zeta) |0>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default ceiling on the population allowed in the top retained Fock level.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Mass, angular frequency and quantum of action; fixes all unit conversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {mass}")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidParameter(format!("hbar must be > 0, got {hbar}")));
        }
        Ok(Self { mass, omega, hbar })
    }

    /// Natural units `m = omega = hbar = 1`.
    pub fn natural() -> Self {
        Self { mass: 1.0, omega: 1.0, hbar: 1.0 }
    }

    /// Length scale `sqrt(hbar / 2 m omega)` multiplying `a + a^dag` in `x`.
    pub fn x_scale(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }

    /// Momentum scale `sqrt(hbar m omega / 2)` multiplying `i (a^dag - a)` in `p`.
    pub fn p_scale(&self) -> f64 {
        (self.hbar * self.mass * self.omega / 2.0).sqrt()
    }

    /// Oscillation period `2 pi / omega`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }
}

/// Number of retained Fock levels and the tolerated top-level population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockTruncation {
    pub dim: usize,
    pub tail_tol: f64,
}

impl FockTruncation {
    pub fn new(dim: usize, tail_tol: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidTruncation(dim));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail_tol must be > 0, got {tail_tol}"
            )));
        }
        Ok(Self { dim, tail_tol })
    }

    pub fn with_default_tol(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_TAIL_TOL)
    }
}

/// Annihilation and creation matrices on `n` Fock levels.
///
/// `a[(k-1, k)] = sqrt(k)`; the pair satisfies `[a, a^dag] = 1` exactly on the
/// leading `(n-1) x (n-1)` block (the corner entry is a truncation artifact).
pub fn build_ladder(n: usize) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if n < 2 {
        return Err(Error::InvalidTruncation(n));
    }
    let mut a = DMatrix::<C64>::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    Ok((a, adag))
}

/// Position and momentum matrices on `n` Fock levels under the crate's
/// `x`/`p` scaling conventions.
pub fn build_xp(osc: &OscillatorParams, n: usize) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let (a, adag) = build_ladder(n)?;
    let x = (&a + &adag).scale(osc.x_scale());
    let p = (&adag - &a).scale(osc.p_scale()) * C64::i();
    Ok((x, p))
}

/// Exponential of an anti-Hermitian matrix through the Hermitian
/// eigendecomposition of `i K`; the result is unitary to machine precision.
fn exp_anti_hermitian(k: &DMatrix<C64>) -> DMatrix<C64> {
    let herm = k.map(|z| z * C64::i());
    let eig = herm.symmetric_eigen();
    let n = k.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let phase = (-C64::i() * eig.eigenvalues[j]).exp();
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Glauber displacement `D(alpha) = exp(alpha a^dag - conj(alpha) a)` on `n`
/// levels. Errors when the displaced vacuum leaves more than
/// [`DEFAULT_TAIL_TOL`] of population in the top level.
pub fn displacement_matrix(alpha: C64, n: usize) -> Result<DMatrix<C64>> {
    let (a, adag) = build_ladder(n)?;
    let gen = adag * alpha - a * alpha.conj();
    let d = exp_anti_hermitian(&gen);
    let tail = d[(n - 1, 0)].norm_sqr();
    if tail > DEFAULT_TAIL_TOL {
        return Err(Error::UnderResolved {
            what: "displacement_matrix",
            population: tail,
            tolerance: DEFAULT_TAIL_TOL,
        });
    }
    Ok(d)
}

/// Squeeze operator `S(zeta) = exp((zeta a^dag^2 - conj(zeta) a^2) / 2)` with
/// `zeta = s exp(i theta)`. Errors when the squeezed vacuum is under-resolved.
pub fn squeeze_matrix(s: f64, theta: f64, n: usize) -> Result<DMatrix<C64>> {
    if s < 0.0 || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "squeeze magnitude must be >= 0, got {s}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidTruncation(n));
    }
    let zeta = C64::from_polar(s, theta);
    let mut gen = DMatrix::<C64>::zeros(n, n);
    for k in 0..n.saturating_sub(2) {
        let c = (((k + 1) * (k + 2)) as f64).sqrt() * 0.5;
        gen[(k + 2, k)] = zeta * c;
        gen[(k, k + 2)] = -zeta.conj() * c;
    }
    let sq = exp_anti_hermitian(&gen);
    // The squeezed vacuum populates even levels only; inspect the top two.
    let tail = sq[(n - 1, 0)].norm_sqr() + sq[(n - 2, 0)].norm_sqr();
    if tail > DEFAULT_TAIL_TOL {
        return Err(Error::UnderResolved {
            what: "squeeze_matrix",
            population: tail,
            tolerance: DEFAULT_TAIL_TOL,
        });
    }
    Ok(sq)
}

/// Sieve search coordinates: displacement `alpha`, squeeze magnitude `s` and
/// squeeze phase `theta` (normalized into `[0, 2 pi)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedCoherentParams {
    pub alpha: C64,
    pub s: f64,
    pub theta: f64,
}

impl SqueezedCoherentParams {
    pub fn new(alpha: C64, s: f64, theta: f64) -> Result<Self> {
        if s < 0.0 || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squeeze magnitude must be >= 0, got {s}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squeeze phase must be finite, got {theta}"
            )));
        }
        Ok(Self { alpha, s, theta: theta.rem_euclid(std::f64::consts::TAU) })
    }

    /// Coherent state `|alpha>` (no squeezing).
    pub fn coherent(alpha: C64) -> Self {
        Self { alpha, s: 0.0, theta: 0.0 }
    }

    /// The vacuum.
    pub fn vacuum() -> Self {
        Self::coherent(C64::new(0.0, 0.0))
    }
}

/// Pure state as a normalized amplitude vector over Fock levels `0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    amplitudes: DVector<C64>,
}

impl TruncatedState {
    /// Wraps an amplitude vector, requiring unit norm within `1e-12`.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidTruncation(amplitudes.len()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "state norm must be 1 within 1e-12, got {norm}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Fock state `|level>` on `dim` levels.
    pub fn fock(level: usize, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidTruncation(dim));
        }
        if level >= dim {
            return Err(Error::InvalidParameter(format!(
                "Fock level {level} does not fit in {dim} levels"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[level] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Population of the top retained level.
    pub fn top_population(&self) -> f64 {
        self.amplitudes[self.amplitudes.len() - 1].norm_sqr()
    }

    /// Errors unless the top-level population is below `tail_tol`.
    pub fn check_resolved(&self, tail_tol: f64) -> Result<()> {
        let population = self.top_population();
        if population > tail_tol {
            return Err(Error::UnderResolved {
                what: "truncated state",
                population,
                tolerance: tail_tol,
            });
        }
        Ok(())
    }
}

/// Density matrix on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDensity {
    matrix: DMatrix<C64>,
}

impl TruncatedDensity {
    /// Wraps a matrix, requiring Hermiticity within `1e-12`, unit trace within
    /// `1e-10`, and smallest eigenvalue above `-1e-8`.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: matrix.ncols() });
        }
        if n < 2 {
            return Err(Error::InvalidTruncation(n));
        }
        let herm_dev = (&matrix - matrix.adjoint()).camax();
        if herm_dev > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "density matrix must be Hermitian within 1e-12, deviation {herm_dev:.3e}"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace must be 1 within 1e-10, got {trace}"
            )));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < -1e-8 {
            return Err(Error::InvalidParameter(format!(
                "density matrix must be positive within 1e-8, smallest eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Projector `|psi><psi|`.
    pub fn from_pure(state: &TruncatedState) -> Self {
        let v = state.amplitudes();
        Self { matrix: v * v.adjoint() }
    }

    /// `I / n` on `n` levels.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidTruncation(n));
        }
        let matrix = DMatrix::from_diagonal_element(n, n, C64::new(1.0 / n as f64, 0.0));
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_eigenvalue(matrix: &DMatrix<C64>) -> f64 {
    matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &l| acc.min(l))
}

/// Linear entropy `1 - Tr rho^2`; zero for pure states, `1 - 1/N` for the
/// maximally mixed state on `N` levels. For Hermitian `rho`, `Tr rho^2`
/// reduces to the squared Frobenius norm.
pub fn linear_entropy(rho: &TruncatedDensity) -> f64 {
    linear_entropy_raw(rho.matrix())
}

pub(crate) fn linear_entropy_raw(matrix: &DMatrix<C64>) -> f64 {
    let purity: f64 = matrix.iter().map(|z| z.norm_sqr()).sum();
    1.0 - purity
}

/// Builds the squeezed coherent state `D(alpha) S(zeta) |0>` on the given
/// truncation, normalized; errors when the tail population exceeds
/// `trunc.tail_tol`.
pub fn make_state(params: &SqueezedCoherentParams, trunc: &FockTruncation) -> Result<TruncatedState> {
    let n = trunc.dim;
    let squeeze = squeeze_matrix(params.s, params.theta, n)?;
    let disp = displacement_matrix(params.alpha, n)?;
    let mut vacuum = DVector::<C64>::zeros(n);
    vacuum[0] = C64::new(1.0, 0.0);
    let mut amplitudes = disp * (squeeze * vacuum);
    let norm = amplitudes.norm();
    amplitudes.unscale_mut(norm);
    let state = TruncatedState { amplitudes };
    let population = state.top_population();
    if population > trunc.tail_tol {
        return Err(Error::UnderResolved {
            what: "make_state",
            population,
            tolerance: trunc.tail_tol,
        });
    }
    Ok(state)
}

/// First and second moments of `x` and `p`. `cov_xp` is the symmetrized
/// covariance `<{x,p}>/2 - <x><p>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

impl GaussianMoments {
    pub fn new(mean_x: f64, mean_p: f64, var_x: f64, var_p: f64, cov_xp: f64) -> Result<Self> {
        if !(var_x > 0.0) || !(var_p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "variances must be > 0, got var_x = {var_x}, var_p = {var_p}"
            )));
        }
        Ok(Self { mean_x, mean_p, var_x, var_p, cov_xp })
    }
}

/// Closed-form moments of the squeezed coherent state `D(alpha) S(zeta) |0>`.
///
/// With `C = cosh 2s` and `Sh = sinh 2s`:
///
/// * `var_x  = (hbar / 2 m omega) (C + Sh cos theta)`
/// * `var_p  = (hbar m omega / 2) (C - Sh cos theta)`
/// * `cov_xp = (hbar / 2) Sh sin theta`
///
/// and the means follow from `<a> = alpha`. Displacement moves means only;
/// the central moments do not read `alpha` at all.
pub fn gaussian_moments(params: &SqueezedCoherentParams, osc: &OscillatorParams) -> GaussianMoments {
    let ch = (2.0 * params.s).cosh();
    let sh = (2.0 * params.s).sinh();
    let (sin_t, cos_t) = params.theta.sin_cos();
    let xs = osc.x_scale();
    let ps = osc.p_scale();
    GaussianMoments {
        mean_x: 2.0 * xs * params.alpha.re,
        mean_p: 2.0 * ps * params.alpha.im,
        var_x: xs * xs * (ch + sh * cos_t),
        var_p: ps * ps * (ch - sh * cos_t),
        cov_xp: 0.5 * osc.hbar * sh * sin_t,
    }
}

/// Moments of an arbitrary truncated state, computed from ladder-operator
/// expectation values; the oracle against which [`gaussian_moments`] is held.
pub fn moments_of_state(state: &TruncatedState, osc: &OscillatorParams) -> GaussianMoments {
    let c = state.amplitudes();
    let n = c.len();
    let mut mean_a = C64::new(0.0, 0.0);
    let mut mean_a2 = C64::new(0.0, 0.0);
    let mut nbar = 0.0;
    for k in 0..n {
        nbar += k as f64 * c[k].norm_sqr();
        if k + 1 < n {
            mean_a += c[k].conj() * ((k + 1) as f64).sqrt() * c[k + 1];
        }
        if k + 2 < n {
            mean_a2 += c[k].conj() * (((k + 1) * (k + 2)) as f64).sqrt() * c[k + 2];
        }
    }
    let xs = osc.x_scale();
    let ps = osc.p_scale();
    let mean_x = 2.0 * xs * mean_a.re;
    let mean_p = 2.0 * ps * mean_a.im;
    let xx = xs * xs * (2.0 * mean_a2.re + 2.0 * nbar + 1.0);
    let pp = ps * ps * (1.0 + 2.0 * nbar - 2.0 * mean_a2.re);
    let sym_xp = osc.hbar * mean_a2.im;
    GaussianMoments {
        mean_x,
        mean_p,
        var_x: xx - mean_x * mean_x,
        var_p: pp - mean_p * mean_p,
        cov_xp: sym_xp - mean_x * mean_p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ladder_two_levels() {
        let (a, adag) = build_ladder(2).unwrap();
        assert_eq!(a[(0, 1)], c(1.0, 0.0));
        assert_eq!(a[(0, 0)], c(0.0, 0.0));
        assert_eq!(a[(1, 0)], c(0.0, 0.0));
        assert_eq!(a[(1, 1)], c(0.0, 0.0));
        assert_eq!(adag, a.adjoint());
    }

    #[test]
    fn ladder_commutator_is_identity_on_leading_block() {
        let (a, adag) = build_ladder(4).unwrap();
        let comm = &a * &adag - &adag * &a;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm[(i, j)].re, expect, epsilon = 1e-14);
                assert_abs_diff_eq!(comm[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn number_operator_diagonal() {
        let (a, adag) = build_ladder(64).unwrap();
        let num = &adag * &a;
        for k in 0..=62 {
            assert_abs_diff_eq!(num[(k, k)].re, k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn ladder_rejects_tiny_truncation() {
        assert!(matches!(build_ladder(1), Err(Error::InvalidTruncation(1))));
    }

    #[test]
    fn xp_single_entry_natural_units() {
        let osc = OscillatorParams::natural();
        let (x, _) = build_xp(&osc, 2).unwrap();
        assert_abs_diff_eq!(x[(0, 1)].re, 1.0 / 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(x[(1, 0)].re, 1.0 / 2.0_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn xp_vacuum_means_vanish() {
        let osc = OscillatorParams::new(1.3, 0.7, 2.1).unwrap();
        let (x, p) = build_xp(&osc, 20).unwrap();
        assert_abs_diff_eq!(x[(0, 0)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[(0, 0)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn xp_commutator_and_vacuum_variance() {
        let osc = OscillatorParams::natural();
        let (x, p) = build_xp(&osc, 80).unwrap();
        let comm = &x * &p - &p * &x;
        for k in 0..78 {
            assert_abs_diff_eq!(comm[(k, k)].im, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(comm[(k, k)].re, 0.0, epsilon = 1e-12);
        }
        let x2 = &x * &x;
        assert_abs_diff_eq!(x2[(0, 0)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn displacement_zero_is_identity() {
        let d = displacement_matrix(c(0.0, 0.0), 12).unwrap();
        assert!((d - DMatrix::<C64>::identity(12, 12)).camax() < 1e-13);
    }

    #[test]
    fn displacement_vacuum_overlap() {
        let d = displacement_matrix(c(1.0, 0.0), 60).unwrap();
        assert_abs_diff_eq!(d[(0, 0)].norm(), (-0.5_f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn displacement_unitary_roundtrip() {
        let alpha = c(2.0, 1.0);
        let d = displacement_matrix(alpha, 80).unwrap();
        assert_abs_diff_eq!(d.column(0).norm(), 1.0, epsilon = 1e-10);
        let back = displacement_matrix(-alpha, 80).unwrap();
        let id = DMatrix::<C64>::identity(80, 80);
        assert!((d * back - id).camax() < 1e-10);
    }

    #[test]
    fn displacement_flags_under_resolution() {
        assert!(matches!(
            displacement_matrix(c(4.0, 0.0), 10),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn squeeze_zero_is_identity() {
        let sq = squeeze_matrix(0.0, 1.2, 16).unwrap();
        assert!((sq - DMatrix::<C64>::identity(16, 16)).camax() < 1e-13);
    }

    #[test]
    fn squeeze_conjugation_relation() {
        // S^dag a S = cosh(s) a + exp(i theta) sinh(s) a^dag on low levels.
        let (s, theta, n) = (0.6, 1.1, 120);
        let sq = squeeze_matrix(s, theta, n).unwrap();
        let (a, adag) = build_ladder(n).unwrap();
        let conj = sq.adjoint() * &a * &sq;
        let expect = a.scale(s.cosh()) + adag.scale(s.sinh()) * C64::from_polar(1.0, theta);
        let diff = conj - expect;
        for i in 0..12 {
            for j in 0..12 {
                assert!(
                    diff[(i, j)].norm() < 1e-8,
                    "entry ({i},{j}) off by {}",
                    diff[(i, j)].norm()
                );
            }
        }
    }

    #[test]
    fn squeeze_flags_under_resolution() {
        assert!(matches!(squeeze_matrix(2.0, 0.0, 12), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn squeezed_vacuum_variances_match_fock_oracle() {
        let osc = OscillatorParams::natural();
        let trunc = FockTruncation::with_default_tol(100).unwrap();

        let st = make_state(
            &SqueezedCoherentParams::new(c(0.0, 0.0), 0.5, 0.0).unwrap(),
            &trunc,
        )
        .unwrap();
        let m = moments_of_state(&st, &osc);
        assert_relative_eq!(m.var_x, 1.0_f64.exp() / 2.0, epsilon = 1e-10);
        assert_relative_eq!(m.var_p, (-1.0_f64).exp() / 2.0, epsilon = 1e-10);

        let st = make_state(
            &SqueezedCoherentParams::new(c(0.0, 0.0), 0.5, std::f64::consts::FRAC_PI_2).unwrap(),
            &trunc,
        )
        .unwrap();
        let m = moments_of_state(&st, &osc);
        assert_relative_eq!(m.cov_xp, 1.0_f64.sinh() / 2.0, epsilon = 1e-10);
        assert_relative_eq!(m.var_x, 1.0_f64.cosh() / 2.0, epsilon = 1e-10);
        assert_relative_eq!(m.var_p, 1.0_f64.cosh() / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn make_state_identity_case() {
        let trunc = FockTruncation::with_default_tol(8).unwrap();
        let st = make_state(&SqueezedCoherentParams::vacuum(), &trunc).unwrap();
        assert_abs_diff_eq!(st.amplitudes()[0].norm(), 1.0, epsilon = 1e-13);
        for k in 1..8 {
            assert_abs_diff_eq!(st.amplitudes()[k].norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn make_state_mean_position_convention() {
        // The Fock oracle fixes the convention constant:
        // <x> = sqrt(2 hbar / m omega) Re(alpha), sqrt(2) at natural units.
        let osc = OscillatorParams::natural();
        let trunc = FockTruncation::with_default_tol(60).unwrap();
        let st = make_state(&SqueezedCoherentParams::coherent(c(1.0, 0.0)), &trunc).unwrap();
        let m = moments_of_state(&st, &osc);
        assert_relative_eq!(m.mean_x, 2.0_f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(m.mean_p, 0.0, epsilon = 1e-10);
        assert_relative_eq!(
            m.mean_x,
            gaussian_moments(&SqueezedCoherentParams::coherent(c(1.0, 0.0)), &osc).mean_x,
            epsilon = 1e-10
        );
    }

    #[test]
    fn make_state_purity() {
        let trunc = FockTruncation::with_default_tol(60).unwrap();
        let st = make_state(&SqueezedCoherentParams::new(c(0.0, 0.0), 0.3, 1.1).unwrap(), &trunc)
            .unwrap();
        let rho = TruncatedDensity::from_pure(&st);
        assert!(linear_entropy(&rho).abs() < 1e-10);
    }

    #[test]
    fn make_state_rejects_overflowing_tail() {
        let trunc = FockTruncation::new(16, 1e-12).unwrap();
        assert!(matches!(
            make_state(&SqueezedCoherentParams::coherent(c(2.5, 0.0)), &trunc),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn linear_entropy_reference_values() {
        let rho = TruncatedDensity::new(DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0))).unwrap();
        assert_abs_diff_eq!(linear_entropy(&rho), 0.5, epsilon = 1e-15);
        let mixed = TruncatedDensity::maximally_mixed(10).unwrap();
        assert_abs_diff_eq!(linear_entropy(&mixed), 0.9, epsilon = 1e-15);
    }

    #[test]
    fn density_validation_rejects_bad_inputs() {
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 0)] = c(1.0, 0.0);
        m[(0, 1)] = c(0.5, 0.0); // not Hermitian
        assert!(TruncatedDensity::new(m).is_err());

        let m = DMatrix::from_diagonal_element(3, 3, c(0.5, 0.0)); // trace 1.5
        assert!(TruncatedDensity::new(m).is_err());
    }

    #[test]
    fn gaussian_moments_vacuum() {
        let osc = OscillatorParams::natural();
        let m = gaussian_moments(&SqueezedCoherentParams::vacuum(), &osc);
        assert_eq!((m.mean_x, m.mean_p, m.cov_xp), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(m.var_x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.var_p, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_moments_closed_forms() {
        let osc = OscillatorParams::natural();
        let m = gaussian_moments(&SqueezedCoherentParams::new(c(0.0, 0.0), 0.5, 0.0).unwrap(), &osc);
        assert_relative_eq!(m.var_x, 1.0_f64.exp() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(m.var_p, (-1.0_f64).exp() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.cov_xp, 0.0, epsilon = 1e-16);

        let m = gaussian_moments(
            &SqueezedCoherentParams::new(c(0.0, 0.0), 0.5, std::f64::consts::FRAC_PI_2).unwrap(),
            &osc,
        );
        assert_relative_eq!(m.var_x, 1.0_f64.cosh() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(m.var_p, 1.0_f64.cosh() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(m.cov_xp, 1.0_f64.sinh() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn displacement_moves_means_only() {
        let osc = OscillatorParams::new(2.0, 0.7, 1.3).unwrap();
        let a = gaussian_moments(&SqueezedCoherentParams::new(c(0.0, 0.0), 0.4, 2.2).unwrap(), &osc);
        let b = gaussian_moments(&SqueezedCoherentParams::new(c(3.0, 2.0), 0.4, 2.2).unwrap(), &osc);
        assert_eq!(a.var_x, b.var_x);
        assert_eq!(a.var_p, b.var_p);
        assert_eq!(a.cov_xp, b.cov_xp);
        assert!(b.mean_x > 0.0 && b.mean_p > 0.0);
    }

    #[test]
    fn moments_match_fock_oracle_with_displacement_and_squeeze() {
        let osc = OscillatorParams::new(1.7, 0.9, 0.8).unwrap();
        let trunc = FockTruncation::with_default_tol(128).unwrap();
        let params = SqueezedCoherentParams::new(c(0.8, -0.6), 0.7, 2.4).unwrap();
        let closed = gaussian_moments(&params, &osc);
        let st = make_state(&params, &trunc).unwrap();
        let oracle = moments_of_state(&st, &osc);
        assert_abs_diff_eq!(closed.mean_x, oracle.mean_x, epsilon = 1e-8);
        assert_abs_diff_eq!(closed.mean_p, oracle.mean_p, epsilon = 1e-8);
        assert_abs_diff_eq!(closed.var_x, oracle.var_x, epsilon = 1e-8);
        assert_abs_diff_eq!(closed.var_p, oracle.var_p, epsilon = 1e-8);
        assert_abs_diff_eq!(closed.cov_xp, oracle.cov_xp, epsilon = 1e-8);
    }

    #[test]
    fn moments_match_fock_oracle_at_strong_squeezing() {
        let osc = OscillatorParams::natural();
        let trunc = FockTruncation::with_default_tol(256).unwrap();
        let params = SqueezedCoherentParams::new(c(0.0, 0.0), 1.5, 0.9).unwrap();
        let closed = gaussian_moments(&params, &osc);
        let st = make_state(&params, &trunc).unwrap();
        let oracle = moments_of_state(&st, &osc);
        assert_relative_eq!(closed.var_x, oracle.var_x, epsilon = 1e-8);
        assert_relative_eq!(closed.var_p, oracle.var_p, epsilon = 1e-8);
        assert_abs_diff_eq!(closed.cov_xp, oracle.cov_xp, epsilon = 1e-8);
    }

    #[test]
    fn uncertainty_product_is_minimal() {
        let osc = OscillatorParams::new(0.8, 1.9, 1.4).unwrap();
        for &(s, theta) in &[(0.0, 0.0), (0.5, 0.3), (1.2, 4.0), (1.5, 5.9)] {
            let params = SqueezedCoherentParams::new(c(0.3, 0.1), s, theta).unwrap();
            let m = gaussian_moments(&params, &osc);
            let det = m.var_x * m.var_p - m.cov_xp * m.cov_xp;
            assert_relative_eq!(det, osc.hbar * osc.hbar / 4.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn truncated_state_constructors() {
        let st = TruncatedState::fock(1, 4).unwrap();
        assert_eq!(st.amplitudes()[1], c(1.0, 0.0));
        assert!(TruncatedState::fock(5, 4).is_err());
        let bad = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(TruncatedState::new(bad).is_err());
    }
}
