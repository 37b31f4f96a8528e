//! Command implementations behind the CLI: each produces one (or two) CSV
//! reports from a resolved configuration. Identical configurations produce
//! byte-identical reports.

use crate::channels::{
    channels_to_diffusion, entropy_production_closed, entropy_production_quadrature,
    f_coefficients, DiffusionCoefficients,
};
use crate::config::{ChannelsModel, KernelModel, Model, ResolvedConfig};
use crate::correlated::{
    correlation, decoherence_g, entropy_production_correlated, format_spectrum,
    kernel_to_spectrum, spectral_width, CorrelatedQuadSpec, CorrelationKernel,
};
use crate::error::{Error, Result};
use crate::master::{evolve, EvolutionSpec};
use crate::oscillator::{gaussian_moments, linear_entropy, make_state, TruncatedDensity};
use crate::report::CsvReport;
use crate::sieve::{sieve_correlated, sieve_quadratic};

fn footer_hash(report: &mut CsvReport, cfg: &ResolvedConfig) {
    report.push_footer(format!("config_sha256={}", cfg.config_sha256));
}

fn require_quadratic(cfg: &ResolvedConfig, command: &str) -> Result<DiffusionCoefficients> {
    match &cfg.model {
        Model::Quadratic(d) => Ok(*d),
        other => Err(Error::InvalidParameter(format!(
            "{command} requires a quadratic model block, found {}",
            other.name()
        ))),
    }
}

fn require_channels<'a>(cfg: &'a ResolvedConfig, command: &str) -> Result<&'a ChannelsModel> {
    match &cfg.model {
        Model::Channels(c) => Ok(c),
        other => Err(Error::InvalidParameter(format!(
            "{command} requires a channels model block, found {}",
            other.name()
        ))),
    }
}

fn require_kernel<'a>(cfg: &'a ResolvedConfig, command: &str) -> Result<&'a KernelModel> {
    match &cfg.model {
        Model::Kernel(k) => Ok(k),
        other => Err(Error::InvalidParameter(format!(
            "{command} requires a kernel model block, found {}",
            other.name()
        ))),
    }
}

/// `entropy-quadratic`: closed-form entropy production of the configured
/// state; one row per sample time.
pub fn entropy_quadratic(cfg: &ResolvedConfig) -> Result<CsvReport> {
    let d = require_quadratic(cfg, "entropy-quadratic")?;
    let state = cfg.require_state("entropy-quadratic")?;
    let time = cfg.require_time("entropy-quadratic")?;
    let moments = gaussian_moments(&state, &cfg.osc);

    let mut report = CsvReport::new(vec![
        "t[time]",
        "f1[1/energy]",
        "f2[1/energy]",
        "f3[1/energy]",
        "delta_sigma[dimensionless]",
    ]);
    for t in time.grid() {
        let f = f_coefficients(t, &cfg.osc, &d)?;
        let ds = entropy_production_closed(&moments, &d, &cfg.osc, t)?;
        report.push_row(vec![Some(t), Some(f.f1), Some(f.f2), Some(f.f3), Some(ds)]);
    }
    footer_hash(&mut report, cfg);
    Ok(report)
}

/// `entropy-exact`: brute-force master-equation trajectory of the configured
/// state; emits the sampled entropy curve with quality diagnostics.
pub fn entropy_exact(cfg: &ResolvedConfig) -> Result<CsvReport> {
    let channels = require_channels(cfg, "entropy-exact")?;
    let state = cfg.require_state("entropy-exact")?;
    let time = cfg.require_time("entropy-exact")?;
    let truncation = cfg.require_truncation("entropy-exact")?;

    let spec = EvolutionSpec::new(
        cfg.osc,
        channels.set.clone(),
        channels.epsilon,
        time.t_final,
        cfg.resolved_dt(&time),
        truncation,
        time.samples.max(2),
    )?;
    let psi = make_state(&state, &truncation)?;
    let traj = evolve(&TruncatedDensity::from_pure(&psi), &spec)?;

    let mut report = CsvReport::new(vec![
        "t[time]",
        "sigma[dimensionless]",
        "trace_drift[dimensionless]",
        "min_eigenvalue[dimensionless]",
    ]);
    for i in 0..traj.times.len() {
        report.push_row(vec![
            Some(traj.times[i]),
            Some(traj.entropy[i]),
            Some(traj.trace_drift[i]),
            Some(traj.min_eigenvalue[i]),
        ]);
    }
    footer_hash(&mut report, cfg);
    report.push_footer(format!(
        "max_trace_drift={:.3e}",
        traj.trace_drift.iter().cloned().fold(0.0_f64, f64::max)
    ));
    Ok(report)
}

/// `entropy-correlated`: correlated-noise entropy production of the
/// configured squeezed coherent state; one row per sample time.
pub fn entropy_correlated(cfg: &ResolvedConfig) -> Result<CsvReport> {
    let kernel = require_kernel(cfg, "entropy-correlated")?;
    let state = cfg.require_state("entropy-correlated")?;
    let time = cfg.require_time("entropy-correlated")?;
    let quad = CorrelatedQuadSpec::default();

    let mut report = CsvReport::new(vec!["t[time]", "delta_sigma[dimensionless]"]);
    let mut worst_delta = 0.0_f64;
    let mut converged = true;
    for t in time.grid() {
        let out = entropy_production_correlated(&state, &kernel.kernel, &cfg.osc, t, &quad)?;
        worst_delta = worst_delta.max(out.diagnostics.last_rel_delta);
        converged &= out.diagnostics.converged;
        report.push_row(vec![Some(t), Some(out.delta_sigma)]);
    }
    footer_hash(&mut report, cfg);
    report.push_footer(format!("quadrature_converged={converged} last_rel_delta={worst_delta:.3e}"));
    Ok(report)
}

/// `sieve`: minimum-entropy-production state per sample time. Quadratic
/// and channels models run the closed-form sieve (channels are mapped to
/// diffusion coefficients first); kernel models run the correlated sieve.
pub fn sieve(cfg: &ResolvedConfig) -> Result<CsvReport> {
    let time = cfg.require_time("sieve")?;
    let mut report = CsvReport::new(vec![
        "t[time]",
        "s_star[dimensionless]",
        "theta_star[rad]",
        "delta_sigma_star[dimensionless]",
        "flat_flag[0/1]",
        "stationarity_residual[dimensionless]",
    ]);
    for t in time.grid() {
        let result = match &cfg.model {
            Model::Quadratic(d) => sieve_quadratic(d, &cfg.osc, t, &cfg.sieve)?,
            Model::Channels(c) => {
                let d = channels_to_diffusion(&c.set, cfg.osc.hbar);
                sieve_quadratic(&d, &cfg.osc, t, &cfg.sieve)?
            }
            Model::Kernel(k) => {
                sieve_correlated(&k.kernel, &cfg.osc, t, &cfg.sieve, &CorrelatedQuadSpec::default())?
            }
        };
        report.push_row(vec![
            Some(t),
            result.s_star,
            result.theta_star,
            Some(result.delta_sigma_star),
            Some(if result.flat_objective { 1.0 } else { 0.0 }),
            result.stationarity_residual,
        ]);
    }
    footer_hash(&mut report, cfg);
    Ok(report)
}

/// Outcome of `consistency`: rows computed so far plus the failure that
/// interrupted the ladder, if any (partial rows are still written).
pub struct ConsistencyOutcome {
    pub report: CsvReport,
    pub failure: Option<Error>,
}

/// `consistency`: first-order validity study. For each `eps` in the
/// configured ladder, compares the exact entropy increase against
/// `eps * dsigma_1` and reports the remainder and its ratio to the previous
/// remainder (which approaches 1/4 for halvings in the asymptotic regime).
pub fn consistency(cfg: &ResolvedConfig) -> Result<ConsistencyOutcome> {
    let channels = require_channels(cfg, "consistency")?;
    let eps_list = channels.epsilons.clone().ok_or_else(|| {
        Error::InvalidParameter("consistency requires an epsilons ladder in the channels block".to_string())
    })?;
    let state = cfg.require_state("consistency")?;
    let time = cfg.require_time("consistency")?;
    let truncation = cfg.require_truncation("consistency")?;
    let t = time.t_final;

    let psi = make_state(&state, &truncation)?;
    let first_order =
        entropy_production_quadrature(&psi, &channels.set, &cfg.osc, t, 1024)?.delta_sigma;
    let rho0 = TruncatedDensity::from_pure(&psi);
    let sigma0 = linear_entropy(&rho0);

    let mut report = CsvReport::new(vec![
        "epsilon[dimensionless]",
        "exact_delta_sigma[dimensionless]",
        "first_order[dimensionless]",
        "residual[dimensionless]",
        "ratio_to_previous[dimensionless]",
    ]);
    let mut failure = None;
    let mut prev_residual: Option<f64> = None;
    for &eps in &eps_list {
        let spec = EvolutionSpec::new(
            cfg.osc,
            channels.set.clone(),
            eps,
            t,
            cfg.resolved_dt(&time),
            truncation,
            2,
        )?;
        let traj = match evolve(&rho0, &spec) {
            Ok(traj) => traj,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let exact = traj.entropy.last().copied().unwrap_or(sigma0) - sigma0;
        let linear = eps * first_order;
        let residual = (exact - linear).abs();
        let ratio = match prev_residual {
            Some(prev) if prev > 0.0 => Some(residual / prev),
            _ => None,
        };
        report.push_row(vec![Some(eps), Some(exact), Some(linear), Some(residual), ratio]);
        prev_residual = Some(residual);
    }
    footer_hash(&mut report, cfg);
    Ok(ConsistencyOutcome { report, failure })
}

/// `kernel-table`: kernel and decoherence-rate table plus a second,
/// re-importable spectrum file (two-column text with `#` comments).
pub fn kernel_table(cfg: &ResolvedConfig) -> Result<(CsvReport, String)> {
    let kernel = require_kernel(cfg, "kernel-table")?;
    let hbar = cfg.osc.hbar;
    // Length scale: the Gaussian correlation length, or its equivalent
    // sqrt(2)/delta_k for tabulated spectra.
    let length = match &kernel.kernel {
        CorrelationKernel::Gaussian(g) => g.sigma,
        CorrelationKernel::Tabulated(_) => std::f64::consts::SQRT_2 / spectral_width(&kernel.kernel),
    };
    let r_max = kernel.r_max.unwrap_or(4.0 * length);

    let mut report = CsvReport::new(vec!["r[length]", "c_of_r[energy^2*time]", "g_of_r[1/time]"]);
    for j in 0..kernel.n_r {
        let r = r_max * j as f64 / (kernel.n_r - 1) as f64;
        report.push_row(vec![
            Some(r),
            Some(correlation(&kernel.kernel, hbar, r)),
            Some(decoherence_g(&kernel.kernel, hbar, r)),
        ]);
    }
    footer_hash(&mut report, cfg);

    let spectrum = match &kernel.kernel {
        CorrelationKernel::Gaussian(g) => kernel_to_spectrum(g, hbar, g.k_support(), 257)?,
        CorrelationKernel::Tabulated(tab) => tab.clone(),
    };
    let mut spectrum_text = format_spectrum(&spectrum);
    spectrum_text.push_str(&format!("# config_sha256={}\n", cfg.config_sha256));
    Ok((report, spectrum_text))
}
