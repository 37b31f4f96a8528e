//! Predictability sieve: minimize first-order entropy production over the
//! squeezed-coherent family to identify the maximal states.
//!
//! The displacement never enters either objective (entropy production
//! depends on central moments, and the correlated-noise characteristic
//! function loses the displacement phase under the modulus), so the search
//! runs over `(s, theta)` only: a coarse grid scan followed by
//! per-coordinate successive quadratic interpolation. The refined minimum
//! never exceeds the coarse one, ties break toward smaller `s` and then
//! smaller `theta`, and an independent dense-grid scan arbitrates the argmin
//! in the tests.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::channels::{entropy_production_closed, f_coefficients, DiffusionCoefficients};
use crate::correlated::{
    entropy_production_correlated, spectral_width, width_condition, CorrelatedQuadSpec,
    CorrelationKernel,
};
use crate::error::{Error, Result};
use crate::oscillator::{gaussian_moments, OscillatorParams, SqueezedCoherentParams};

const TAU: f64 = std::f64::consts::TAU;

/// Coarse-grid resolution and refinement controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SieveGrid {
    pub s_max: f64,
    pub n_s: usize,
    pub n_theta: usize,
    pub refinement_tol: f64,
    pub refinement_max_iter: usize,
}

impl Default for SieveGrid {
    fn default() -> Self {
        Self { s_max: 2.0, n_s: 48, n_theta: 64, refinement_tol: 1e-9, refinement_max_iter: 200 }
    }
}

impl SieveGrid {
    pub fn new(
        s_max: f64,
        n_s: usize,
        n_theta: usize,
        refinement_tol: f64,
        refinement_max_iter: usize,
    ) -> Result<Self> {
        if !(s_max > 0.0) || !s_max.is_finite() {
            return Err(Error::InvalidParameter(format!("s_max must be > 0, got {s_max}")));
        }
        if n_s < 16 || n_theta < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid counts must be at least 16, got n_s = {n_s}, n_theta = {n_theta}"
            )));
        }
        if !(refinement_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "refinement_tol must be > 0, got {refinement_tol}"
            )));
        }
        if refinement_max_iter == 0 {
            return Err(Error::InvalidParameter("refinement_max_iter must be >= 1".to_string()));
        }
        Ok(Self { s_max, n_s, n_theta, refinement_tol, refinement_max_iter })
    }

    fn s_values(&self) -> Vec<f64> {
        (0..self.n_s)
            .map(|i| self.s_max * i as f64 / (self.n_s - 1) as f64)
            .collect()
    }

    fn theta_values(&self) -> Vec<f64> {
        (0..self.n_theta).map(|j| TAU * j as f64 / self.n_theta as f64).collect()
    }
}

/// Sieve outcome. When the objective is flat over the grid no argmin is
/// claimed and the optional fields stay empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveResult {
    pub s_star: Option<f64>,
    pub theta_star: Option<f64>,
    pub delta_sigma_star: f64,
    pub flat_objective: bool,
    /// `|cos theta* - f3/f1|`; populated by the quadratic sieve when the
    /// relation is applicable (non-flat objective, s* > 0.01, |f3/f1| <= 1).
    pub stationarity_residual: Option<f64>,
    /// Coarse-grid argmin indices `(i_s, j_theta)` and value.
    pub coarse_argmin: (usize, usize),
    pub coarse_minimum: f64,
    pub refinement_steps: usize,
    /// Kernel-width margin (correlated sieve only); large values mean the
    /// short-correlation regime where the sieve has nothing to grade.
    pub regime_margin: Option<f64>,
}

struct CoarseScan {
    argmin: (usize, usize),
    minimum: f64,
    maximum: f64,
    s_at_min: f64,
    theta_at_min: f64,
}

fn coarse_scan<F>(objective: &F, grid: &SieveGrid) -> CoarseScan
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let s_vals = grid.s_values();
    let t_vals = grid.theta_values();
    let n_theta = t_vals.len();
    let values: Vec<f64> = (0..s_vals.len() * n_theta)
        .into_par_iter()
        .map(|idx| objective(s_vals[idx / n_theta], t_vals[idx % n_theta]))
        .collect();
    // Strict comparison in index order: ties resolve toward smaller s, then
    // smaller theta.
    let mut best = 0;
    let mut maximum = values[0];
    for (idx, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = idx;
        }
        if v > maximum {
            maximum = v;
        }
    }
    CoarseScan {
        argmin: (best / n_theta, best % n_theta),
        minimum: values[best],
        maximum,
        s_at_min: s_vals[best / n_theta],
        theta_at_min: t_vals[best % n_theta],
    }
}

/// Per-coordinate successive quadratic interpolation, accepting only strict
/// improvements so the refined value can never exceed the coarse minimum.
fn refine<F>(
    objective: &F,
    grid: &SieveGrid,
    start: (f64, f64),
    start_value: f64,
) -> (f64, f64, f64, usize)
where
    F: Fn(f64, f64) -> f64,
{
    let (mut s, mut theta, mut value) = (start.0, start.1, start_value);
    let mut h_s = grid.s_max / (grid.n_s - 1) as f64;
    let mut h_t = TAU / grid.n_theta as f64;
    let clamp_s = |x: f64| x.clamp(0.0, grid.s_max);
    let eval = |s: f64, th: f64| objective(s, th.rem_euclid(TAU));
    let mut steps = 0;

    for _ in 0..grid.refinement_max_iter {
        let value_before = value;

        // s-coordinate.
        let (lo, hi) = (clamp_s(s - h_s), clamp_s(s + h_s));
        let f_lo = eval(lo, theta);
        let f_hi = eval(hi, theta);
        steps += 2;
        let denom = f_hi - 2.0 * value + f_lo;
        let mut candidates = vec![(lo, f_lo), (hi, f_hi)];
        if denom > 0.0 {
            let vertex = clamp_s(s - 0.5 * h_s * (f_hi - f_lo) / denom);
            candidates.push((vertex, eval(vertex, theta)));
            steps += 1;
        }
        for (cs, cf) in candidates {
            if cf < value {
                s = cs;
                value = cf;
            }
        }

        // theta-coordinate (kept on the real line; wrapped at evaluation).
        let f_lo = eval(s, theta - h_t);
        let f_hi = eval(s, theta + h_t);
        steps += 2;
        let denom = f_hi - 2.0 * value + f_lo;
        let mut candidates = vec![(theta - h_t, f_lo), (theta + h_t, f_hi)];
        if denom > 0.0 {
            let vertex = theta - 0.5 * h_t * (f_hi - f_lo) / denom;
            candidates.push((vertex, eval(s, vertex)));
            steps += 1;
        }
        for (ct, cf) in candidates {
            if cf < value {
                theta = ct;
                value = cf;
            }
        }

        if value_before - value < grid.refinement_tol {
            h_s *= 0.5;
            h_t *= 0.5;
            if h_s < 1e-12 && h_t < 1e-12 {
                break;
            }
        }
    }
    (s, theta.rem_euclid(TAU), value, steps)
}

fn run_sieve<F>(
    objective: &F,
    grid: &SieveGrid,
    flat_abs_tol: f64,
    flat_rel_tol: f64,
) -> SieveResult
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let scan = coarse_scan(objective, grid);
    let spread = scan.maximum - scan.minimum;
    let scale = scan.maximum.abs().max(scan.minimum.abs());
    if spread <= flat_abs_tol.max(flat_rel_tol * scale) {
        return SieveResult {
            s_star: None,
            theta_star: None,
            delta_sigma_star: scan.minimum,
            flat_objective: true,
            stationarity_residual: None,
            coarse_argmin: scan.argmin,
            coarse_minimum: scan.minimum,
            refinement_steps: 0,
            regime_margin: None,
        };
    }
    let (s, theta, value, steps) =
        refine(objective, grid, (scan.s_at_min, scan.theta_at_min), scan.minimum);
    SieveResult {
        s_star: Some(s),
        theta_star: Some(theta),
        delta_sigma_star: value,
        flat_objective: false,
        stationarity_residual: None,
        coarse_argmin: scan.argmin,
        coarse_minimum: scan.minimum,
        refinement_steps: steps,
        regime_margin: None,
    }
}

fn quadratic_objective<'a>(
    d: &'a DiffusionCoefficients,
    osc: &'a OscillatorParams,
    t: f64,
) -> impl Fn(f64, f64) -> f64 + Sync + 'a {
    move |s: f64, theta: f64| {
        let params = SqueezedCoherentParams { alpha: C64::new(0.0, 0.0), s, theta };
        let mom = gaussian_moments(&params, osc);
        entropy_production_closed(&mom, d, osc, t)
            .expect("objective preconditions validated before the scan")
    }
}

/// Minimizes the closed-form entropy production over `(s, theta)` at fixed
/// time `t`. The displacement is pinned at zero by translation invariance.
/// Requires `D_pq = 0` and `t > 0`.
pub fn sieve_quadratic(
    d: &DiffusionCoefficients,
    osc: &OscillatorParams,
    t: f64,
    grid: &SieveGrid,
) -> Result<SieveResult> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("sieve time must be > 0, got {t}")));
    }
    // Probe once so precondition violations surface as errors, not panics.
    let probe = SqueezedCoherentParams::vacuum();
    entropy_production_closed(&gaussian_moments(&probe, osc), d, osc, t)?;

    let objective = quadratic_objective(d, osc, t);
    let mut result = run_sieve(&objective, grid, 1e-12, 0.0);

    if let (Some(s_star), Some(theta_star), false) =
        (result.s_star, result.theta_star, result.flat_objective)
    {
        let f = f_coefficients(t, osc, d)?;
        if s_star > 0.01 && f.f1 > 0.0 {
            let ratio = f.f3 / f.f1;
            if ratio.abs() <= 1.0 {
                result.stationarity_residual = Some((theta_star.cos() - ratio).abs());
            }
        }
    }
    Ok(result)
}

/// Minimizes the correlated-noise entropy production (analytic Gaussian
/// characteristic function) over `(s, theta)`. In the short-correlation
/// regime the objective flattens — all states produce essentially the same
/// entropy — and the result reports that instead of an argmin. The flatness
/// cut is a 2% relative spread over the coarse grid: deep in the
/// short-correlation regime (width margin well past 50) the whole family
/// sits within a couple of percent of the universal ceiling, while any
/// gradable kernel spreads the objective by factors of `cosh 2s`.
pub fn sieve_correlated(
    kern: &CorrelationKernel,
    osc: &OscillatorParams,
    t: f64,
    grid: &SieveGrid,
    quad: &CorrelatedQuadSpec,
) -> Result<SieveResult> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("sieve time must be > 0, got {t}")));
    }
    // Probe once; afterwards the same code path cannot fail.
    entropy_production_correlated(&SqueezedCoherentParams::vacuum(), kern, osc, t, quad)?;

    let objective = move |s: f64, theta: f64| {
        let params = SqueezedCoherentParams { alpha: C64::new(0.0, 0.0), s, theta };
        entropy_production_correlated(&params, kern, osc, t, quad)
            .expect("probe evaluation succeeded")
            .delta_sigma
    };
    let mut result = run_sieve(&objective, grid, 1e-300, 0.02);
    let coherent = gaussian_moments(&SqueezedCoherentParams::vacuum(), osc);
    result.regime_margin = Some(width_condition(&coherent, spectral_width(kern), osc).margin);
    Ok(result)
}

/// Advisory check of the squeeze-direction relation `cos(theta*) = f3/f1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeDirectionCheck {
    pub sieve: SieveResult,
    pub f3_over_f1: f64,
    /// `|cos theta* - f3/f1|` when the relation is applicable.
    pub residual: Option<f64>,
    /// The relation carries no information when `f3 = 0`.
    pub degenerate: bool,
    /// False when `|f3/f1| > 1`, the objective is flat, or the argmin sits
    /// at negligible squeezing (theta undefined).
    pub applicable: bool,
}

/// Runs the quadratic sieve and reports the residual of the squeeze-direction
/// relation. The check is advisory: the numeric argmin is authoritative, and
/// a large residual flags the relation, not the minimizer.
pub fn squeeze_direction_check(
    d: &DiffusionCoefficients,
    osc: &OscillatorParams,
    t: f64,
    grid: &SieveGrid,
) -> Result<SqueezeDirectionCheck> {
    let sieve = sieve_quadratic(d, osc, t, grid)?;
    let f = f_coefficients(t, osc, d)?;
    let ratio = if f.f1 > 0.0 { f.f3 / f.f1 } else { f64::NAN };
    let degenerate = f.f3 == 0.0;
    let usable = !sieve.flat_objective
        && !degenerate
        && ratio.is_finite()
        && ratio.abs() <= 1.0
        && sieve.s_star.is_some_and(|s| s > 0.01);
    let residual = if usable {
        sieve.theta_star.map(|th| (th.cos() - ratio).abs())
    } else {
        None
    };
    Ok(SqueezeDirectionCheck { sieve, f3_over_f1: ratio, residual, degenerate, applicable: usable })
}

/// Tracks the optimal squeeze magnitude over a time ladder; flat objectives
/// report zero squeezing (the tie-break answer).
///
/// `t_list` must be strictly increasing and span at least ten periods.
pub fn long_time_squeeze_decay(
    d: &DiffusionCoefficients,
    osc: &OscillatorParams,
    t_list: &[f64],
    grid: &SieveGrid,
) -> Result<Vec<(f64, f64)>> {
    if t_list.len() < 2 {
        return Err(Error::InvalidParameter("t_list needs at least two times".to_string()));
    }
    for pair in t_list.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter("t_list must be strictly increasing".to_string()));
        }
    }
    let span = t_list[t_list.len() - 1] - t_list[0];
    if span < 10.0 * osc.period() * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "t_list must span at least 10 periods ({}), got {span}",
            10.0 * osc.period()
        )));
    }
    t_list
        .iter()
        .map(|&t| {
            let r = sieve_quadratic(d, osc, t, grid)?;
            Ok((t, r.s_star.unwrap_or(0.0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlated::GaussianKernel;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn natural() -> OscillatorParams {
        OscillatorParams::natural()
    }

    fn reference_d() -> DiffusionCoefficients {
        DiffusionCoefficients::new(0.02, 0.005, 0.0, 0.0, 0.0).unwrap()
    }

    /// Independent dense-grid argmin over the same objective.
    fn dense_argmin<F: Fn(f64, f64) -> f64>(objective: &F, s_max: f64, n: usize) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::INFINITY);
        for i in 0..n {
            let s = s_max * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let th = TAU * j as f64 / n as f64;
                let v = objective(s, th);
                if v < best.2 {
                    best = (s, th, v);
                }
            }
        }
        best
    }

    /// Closed-form minimizer: with R = sqrt(f2^2 + f3^2), the optimum is
    /// tanh(2 s*) = R / f1, cos(theta*) = f2 / R, sin(theta*) = -f3 / R.
    fn analytic_argmin(d: &DiffusionCoefficients, osc: &OscillatorParams, t: f64) -> (f64, f64) {
        let f = f_coefficients(t, osc, d).unwrap();
        let r = f.f2.hypot(f.f3);
        if r == 0.0 || r >= f.f1 {
            return (0.0, 0.0);
        }
        let s = 0.5 * (r / f.f1).atanh();
        let theta = (-f.f3).atan2(f.f2).rem_euclid(TAU);
        (s, theta)
    }

    #[test]
    fn long_time_returns_coherent_states() {
        let r = sieve_quadratic(&reference_d(), &natural(), 20.0 * PI, &SieveGrid::default())
            .unwrap();
        assert!(!r.flat_objective);
        assert!(r.s_star.unwrap() <= 0.02, "s* = {:?}", r.s_star);
    }

    #[test]
    fn balanced_coefficients_prefer_zero_squeezing_at_any_time() {
        let d = DiffusionCoefficients::new(0.01, 0.01, 0.0, 0.0, 0.0).unwrap();
        for &t in &[0.4, 1.0, 3.9, 17.0] {
            let r = sieve_quadratic(&d, &natural(), t, &SieveGrid::default()).unwrap();
            assert!(!r.flat_objective);
            assert_eq!(r.s_star.unwrap(), 0.0, "t = {t}");
        }
    }

    #[test]
    fn all_zero_coefficients_flatten_the_objective() {
        let d = DiffusionCoefficients::new(0.0, 0.0, 0.0, 0.3, 0.0).unwrap();
        let r = sieve_quadratic(&d, &natural(), 2.0, &SieveGrid::default()).unwrap();
        assert!(r.flat_objective);
        assert!(r.s_star.is_none());
        assert!(r.theta_star.is_none());
    }

    #[test]
    fn refined_argmin_matches_dense_grid_and_analytic_form() {
        let osc = natural();
        let d = reference_d();
        let t = 0.75 * TAU;
        let grid = SieveGrid::default();
        let r = sieve_quadratic(&d, &osc, t, &grid).unwrap();
        let objective = quadratic_objective(&d, &osc, t);

        let (s_dense, th_dense, v_dense) = dense_argmin(&objective, grid.s_max, 512);
        let cell_s = grid.s_max / (grid.n_s - 1) as f64;
        let cell_t = TAU / grid.n_theta as f64;
        let s_star = r.s_star.unwrap();
        let th_star = r.theta_star.unwrap();
        assert!((s_star - s_dense).abs() <= cell_s, "{s_star} vs dense {s_dense}");
        assert!((th_star - th_dense).abs() <= cell_t, "{th_star} vs dense {th_dense}");
        assert!(r.delta_sigma_star <= v_dense + 1e-12);

        let (s_true, th_true) = analytic_argmin(&d, &osc, t);
        assert_abs_diff_eq!(s_star, s_true, epsilon = 1e-3);
        assert_abs_diff_eq!(th_star, th_true, epsilon = 1e-3);
        assert_relative_eq!(s_true, 0.0639, epsilon = 1e-2);
        assert_relative_eq!(th_true, PI / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn refinement_never_exceeds_coarse_minimum() {
        let osc = natural();
        let cases = [
            (0.02, 0.005, 0.0, 0.7),
            (0.05, 0.001, -0.004, 2.3),
            (0.001, 0.03, 0.002, 9.9),
            (0.04, 0.04, 0.0, 31.0),
        ];
        for &(dq, dp, lambda, t) in &cases {
            let d = DiffusionCoefficients::new(dq, dp, 0.0, lambda, 0.0).unwrap();
            let r = sieve_quadratic(&d, &osc, t, &SieveGrid::default()).unwrap();
            assert!(r.delta_sigma_star <= r.coarse_minimum);
        }
    }

    #[test]
    fn objective_is_periodic_in_theta() {
        let osc = natural();
        let d = reference_d();
        let objective = quadratic_objective(&d, &osc, 1.3);
        for &(s, th) in &[(0.3, 0.7), (1.1, 4.0)] {
            let a = objective(s, th);
            let b = objective(s, (th + TAU).rem_euclid(TAU));
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn squeeze_direction_check_balanced_is_degenerate() {
        let d = DiffusionCoefficients::new(0.01, 0.01, 0.0, 0.0, 0.0).unwrap();
        let chk = squeeze_direction_check(&d, &natural(), 1.7, &SieveGrid::default()).unwrap();
        assert!(chk.degenerate);
        assert!(!chk.applicable);
        assert!(chk.residual.is_none());
    }

    #[test]
    fn squeeze_direction_check_long_time_argmin_unsqueezed() {
        let chk = squeeze_direction_check(&reference_d(), &natural(), 20.0 * PI, &SieveGrid::default())
            .unwrap();
        // Oscillatory coefficients vanish at the full period, the argmin has
        // no squeezing and the relation does not apply.
        assert!(!chk.applicable);
        assert!(chk.sieve.s_star.unwrap() <= 0.02);
    }

    #[test]
    fn squeeze_direction_check_reports_relation_mismatch() {
        // At t = 0.6 periods the numeric argmin disagrees with the printed
        // relation; the dense grid sides with the minimizer.
        let osc = natural();
        let d = reference_d();
        let t = 0.6 * TAU;
        let chk = squeeze_direction_check(&d, &osc, t, &SieveGrid::default()).unwrap();
        assert!(chk.applicable);
        let residual = chk.residual.unwrap();
        assert!(residual > 0.05, "relation unexpectedly satisfied: {residual}");

        let objective = quadratic_objective(&d, &osc, t);
        let (s_dense, th_dense, _) = dense_argmin(&objective, 2.0, 512);
        assert_abs_diff_eq!(chk.sieve.s_star.unwrap(), s_dense, epsilon = 2.0 / 47.0);
        assert_abs_diff_eq!(chk.sieve.theta_star.unwrap(), th_dense, epsilon = TAU / 64.0);
    }

    #[test]
    fn squeeze_decay_envelope_is_monotone_off_half_periods() {
        let osc = natural();
        let d = reference_d();
        // Sample away from multiples of the half period so the oscillatory
        // coefficients stay alive.
        let t_list = [0.6 * TAU, 3.6 * TAU, 10.6 * TAU];
        let out = long_time_squeeze_decay(&d, &osc, &t_list, &SieveGrid::default()).unwrap();
        assert_eq!(out.len(), 3);
        for pair in out.windows(2) {
            assert!(pair[1].1 < pair[0].1, "envelope not decaying: {out:?}");
        }
        // Cross-check each point against the closed-form minimizer.
        for &(t, s_star) in &out {
            let (s_true, _) = analytic_argmin(&d, &osc, t);
            assert_abs_diff_eq!(s_star, s_true, epsilon = 1e-3);
        }
        assert!(out[2].1 <= 0.02);
    }

    #[test]
    fn squeeze_decay_balanced_is_identically_zero() {
        let d = DiffusionCoefficients::new(0.01, 0.01, 0.0, 0.0, 0.0).unwrap();
        let t_list = [TAU, 5.0 * TAU, 11.0 * TAU];
        let out = long_time_squeeze_decay(&d, &natural(), &t_list, &SieveGrid::default()).unwrap();
        for (_, s) in out {
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn squeeze_decay_validates_ladder() {
        let d = reference_d();
        let osc = natural();
        let grid = SieveGrid::default();
        assert!(long_time_squeeze_decay(&d, &osc, &[1.0], &grid).is_err());
        assert!(long_time_squeeze_decay(&d, &osc, &[2.0, 1.0, 80.0], &grid).is_err());
        assert!(long_time_squeeze_decay(&d, &osc, &[1.0, 2.0], &grid).is_err()); // span too short
    }

    #[test]
    fn correlated_sieve_prefers_coherent_states_in_wide_kernel_regime() {
        let osc = natural();
        let delta_k = 0.02 * (osc.mass * osc.omega / (2.0 * osc.hbar)).sqrt();
        let sigma = std::f64::consts::SQRT_2 / delta_k;
        let kern = CorrelationKernel::Gaussian(GaussianKernel::new(0.05, sigma).unwrap());
        let grid = SieveGrid { n_s: 24, n_theta: 24, ..SieveGrid::default() };
        let r = sieve_correlated(&kern, &osc, 10.0 * osc.period(), &grid, &CorrelatedQuadSpec::default())
            .unwrap();
        assert!(!r.flat_objective);
        assert!(r.s_star.unwrap() <= 0.05, "s* = {:?}", r.s_star);
        assert!(r.regime_margin.unwrap() < 0.1);
    }

    #[test]
    fn correlated_sieve_flattens_in_short_kernel_regime() {
        let osc = natural();
        let sigma = 0.02 * osc.x_scale();
        let kern = CorrelationKernel::Gaussian(GaussianKernel::new(0.3, sigma).unwrap());
        let grid = SieveGrid { n_s: 16, n_theta: 16, s_max: 2.0, ..SieveGrid::default() };
        let r = sieve_correlated(&kern, &osc, 1.0, &grid, &CorrelatedQuadSpec::default()).unwrap();
        assert!(r.flat_objective, "spread unexpectedly large: {r:?}");
        assert!(r.s_star.is_none());
        assert!(r.regime_margin.unwrap() > 50.0);
    }

    #[test]
    fn correlated_sieve_argmin_matches_dense_grid_at_short_time() {
        let osc = natural();
        let kern = CorrelationKernel::Gaussian(GaussianKernel::new(0.4, 4.0).unwrap());
        let quad = CorrelatedQuadSpec::default();
        let t = 0.1 * osc.period();
        let grid = SieveGrid { n_s: 16, n_theta: 16, s_max: 1.0, ..SieveGrid::default() };
        let r = sieve_correlated(&kern, &osc, t, &grid, &quad).unwrap();
        let objective = |s: f64, theta: f64| {
            let params = SqueezedCoherentParams { alpha: C64::new(0.0, 0.0), s, theta };
            entropy_production_correlated(&params, &kern, &osc, t, &quad).unwrap().delta_sigma
        };
        let (s_dense, th_dense, _) = dense_argmin(&objective, grid.s_max, 96);
        let cell_s = grid.s_max / (grid.n_s - 1) as f64;
        let cell_t = TAU / grid.n_theta as f64;
        assert!((r.s_star.unwrap() - s_dense).abs() <= cell_s);
        let dth = (r.theta_star.unwrap() - th_dense).abs();
        assert!(dth.min((dth - TAU).abs()) <= cell_t, "theta {:?} vs {th_dense}", r.theta_star);
    }

    #[test]
    fn grid_validation() {
        assert!(SieveGrid::new(0.0, 32, 32, 1e-9, 10).is_err());
        assert!(SieveGrid::new(2.0, 8, 32, 1e-9, 10).is_err());
        assert!(SieveGrid::new(2.0, 32, 32, 0.0, 10).is_err());
        assert!(SieveGrid::new(2.0, 32, 32, 1e-9, 0).is_err());
    }
}
