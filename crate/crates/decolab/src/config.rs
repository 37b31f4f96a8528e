//! JSON run-configuration: parsing, validation and resolution of defaults.
//!
//! A configuration carries exactly one model block (`quadratic`, `channels`
//! or `kernel`). Oscillator parameters default to natural units; every other
//! physical parameter must be spelled out — there are no silent defaults for
//! physics. Numerical knobs (step sizes, grid counts, tolerances) carry
//! documented defaults.

use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;

use crate::channels::{DiffusionCoefficients, LindbladChannel, LindbladChannelSet};
use crate::correlated::{load_spectrum, CorrelationKernel, GaussianKernel};
use crate::error::{Error, Result};
use crate::oscillator::{FockTruncation, OscillatorParams, SqueezedCoherentParams};
use crate::sieve::SieveGrid;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    oscillator: Option<RawOscillator>,
    model: RawModel,
    state: Option<RawState>,
    time: Option<RawTime>,
    sieve: Option<RawSieve>,
    truncation: Option<RawTruncation>,
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOscillator {
    #[serde(default = "one")]
    m: f64,
    #[serde(default = "one")]
    omega: f64,
    #[serde(default = "one")]
    hbar: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    quadratic: Option<RawQuadratic>,
    channels: Option<RawChannels>,
    kernel: Option<RawKernel>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadratic {
    d_qq: f64,
    d_pp: f64,
    d_pq: f64,
    lambda: f64,
    mu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannels {
    channels: Vec<RawChannel>,
    mu: f64,
    /// Dissipator strength for `entropy-exact`; defaults to 1.
    epsilon: Option<f64>,
    /// Strength ladder for `consistency`.
    epsilons: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    a: [f64; 2],
    b: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    gaussian: Option<RawGaussian>,
    spectrum_file: Option<PathBuf>,
    /// Separation reach of `kernel-table` output (defaults to four
    /// correlation lengths).
    r_max: Option<f64>,
    /// Row count of `kernel-table` output.
    n_r: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaussian {
    c0: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    alpha: [f64; 2],
    s: f64,
    theta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_final: f64,
    samples: usize,
    dt: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSieve {
    s_max: Option<f64>,
    n_s: Option<usize>,
    n_theta: Option<usize>,
    refinement_tol: Option<f64>,
    refinement_max_iter: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruncation {
    n: usize,
    tail_tol: Option<f64>,
}

/// Time grid request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub t_final: f64,
    pub samples: usize,
    pub dt: Option<f64>,
}

impl TimeSpec {
    /// Sample times `t_final * k / samples` for `k = 1..=samples`; a zero
    /// horizon collapses to the single row `t = 0`.
    pub fn grid(&self) -> Vec<f64> {
        if self.t_final == 0.0 {
            return vec![0.0];
        }
        (1..=self.samples)
            .map(|k| self.t_final * k as f64 / self.samples as f64)
            .collect()
    }
}

/// Channels model with its strength controls.
#[derive(Debug, Clone)]
pub struct ChannelsModel {
    pub set: LindbladChannelSet,
    pub epsilon: f64,
    pub epsilons: Option<Vec<f64>>,
}

/// How the kernel was specified, kept for effective-config echoing.
#[derive(Debug, Clone)]
pub enum KernelSource {
    Gaussian { c0: f64, sigma: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct KernelModel {
    pub kernel: CorrelationKernel,
    pub source: KernelSource,
    pub r_max: Option<f64>,
    pub n_r: usize,
}

#[derive(Debug, Clone)]
pub enum Model {
    Quadratic(DiffusionCoefficients),
    Channels(ChannelsModel),
    Kernel(KernelModel),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Quadratic(_) => "quadratic",
            Model::Channels(_) => "channels",
            Model::Kernel(_) => "kernel",
        }
    }
}

/// Fully validated configuration with defaults resolved.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub osc: OscillatorParams,
    pub model: Model,
    pub state: Option<SqueezedCoherentParams>,
    pub time: Option<TimeSpec>,
    pub sieve: SieveGrid,
    pub truncation: Option<FockTruncation>,
    pub output: Option<PathBuf>,
    pub config_sha256: String,
}

impl ResolvedConfig {
    /// The state block, required by state-driven commands.
    pub fn require_state(&self, command: &str) -> Result<SqueezedCoherentParams> {
        self.state.ok_or_else(|| {
            Error::InvalidParameter(format!("{command} requires a state block (alpha, s, theta)"))
        })
    }

    pub fn require_time(&self, command: &str) -> Result<TimeSpec> {
        self.time.ok_or_else(|| {
            Error::InvalidParameter(format!("{command} requires a time block (t_final, samples)"))
        })
    }

    pub fn require_truncation(&self, command: &str) -> Result<FockTruncation> {
        self.truncation.ok_or_else(|| {
            Error::InvalidParameter(format!("{command} requires a truncation block (n)"))
        })
    }

    /// Time step: explicit from the config or one two-thousandth of a period.
    pub fn resolved_dt(&self, time: &TimeSpec) -> f64 {
        time.dt.unwrap_or(self.osc.period() / 2000.0)
    }

    /// Effective configuration (defaults filled in) for reproducibility
    /// echoes on standard error.
    pub fn effective_json(&self) -> serde_json::Value {
        use serde_json::json;
        let model = match &self.model {
            Model::Quadratic(d) => json!({"quadratic": {
                "d_qq": d.d_qq, "d_pp": d.d_pp, "d_pq": d.d_pq,
                "lambda": d.lambda, "mu": d.mu,
            }}),
            Model::Channels(c) => json!({"channels": {
                "channels": c.set.channels.iter().map(|ch| json!({
                    "a": [ch.a.re, ch.a.im], "b": [ch.b.re, ch.b.im],
                })).collect::<Vec<_>>(),
                "mu": c.set.mu,
                "epsilon": c.epsilon,
                "epsilons": c.epsilons,
            }}),
            Model::Kernel(k) => {
                let source = match &k.source {
                    KernelSource::Gaussian { c0, sigma } => {
                        json!({"gaussian": {"c0": c0, "sigma": sigma}})
                    }
                    KernelSource::File(path) => json!({"spectrum_file": path.display().to_string()}),
                };
                json!({"kernel": {
                    "source": source, "r_max": k.r_max, "n_r": k.n_r,
                }})
            }
        };
        json!({
            "oscillator": {"m": self.osc.mass, "omega": self.osc.omega, "hbar": self.osc.hbar},
            "model": model,
            "state": self.state.map(|st| json!({
                "alpha": [st.alpha.re, st.alpha.im], "s": st.s, "theta": st.theta,
            })),
            "time": self.time.map(|t| json!({
                "t_final": t.t_final, "samples": t.samples,
                "dt": t.dt.unwrap_or(self.osc.period() / 2000.0),
            })),
            "sieve": {
                "s_max": self.sieve.s_max, "n_s": self.sieve.n_s,
                "n_theta": self.sieve.n_theta,
                "refinement_tol": self.sieve.refinement_tol,
                "refinement_max_iter": self.sieve.refinement_max_iter,
            },
            "truncation": self.truncation.map(|t| json!({"n": t.dim, "tail_tol": t.tail_tol})),
            "output": self.output.as_ref().map(|p| p.display().to_string()),
            "config_sha256": self.config_sha256,
        })
    }
}

/// Loads and validates a configuration file. Relative spectrum paths are
/// resolved against the configuration file's directory.
pub fn load(path: &Path) -> Result<ResolvedConfig> {
    let bytes = std::fs::read(path).map_err(|e| {
        Error::InvalidParameter(format!("cannot read config {}: {e}", path.display()))
    })?;
    let digest = Sha256::digest(&bytes);
    let mut hash = String::with_capacity(64);
    for byte in digest {
        hash.push_str(&format!("{byte:02x}"));
    }
    let raw: RawConfig = serde_json::from_slice(&bytes)
        .map_err(|e| Error::InvalidParameter(format!("config parse: {e}")))?;
    resolve(raw, hash, path.parent().unwrap_or_else(|| Path::new(".")))
}

/// Parses a configuration from a JSON string (spectrum paths resolve
/// against `base_dir`).
pub fn parse(text: &str, base_dir: &Path) -> Result<ResolvedConfig> {
    let digest = Sha256::digest(text.as_bytes());
    let mut hash = String::with_capacity(64);
    for byte in digest {
        hash.push_str(&format!("{byte:02x}"));
    }
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| Error::InvalidParameter(format!("config parse: {e}")))?;
    resolve(raw, hash, base_dir)
}

fn resolve(raw: RawConfig, config_sha256: String, base_dir: &Path) -> Result<ResolvedConfig> {
    let osc = match raw.oscillator {
        Some(o) => OscillatorParams::new(o.m, o.omega, o.hbar)?,
        None => OscillatorParams::natural(),
    };

    let blocks = [
        raw.model.quadratic.is_some(),
        raw.model.channels.is_some(),
        raw.model.kernel.is_some(),
    ];
    let count = blocks.iter().filter(|&&b| b).count();
    if count != 1 {
        return Err(Error::InvalidParameter(format!(
            "config must contain exactly one model block (quadratic | channels | kernel), found {count}"
        )));
    }

    let model = if let Some(q) = raw.model.quadratic {
        Model::Quadratic(DiffusionCoefficients::new(q.d_qq, q.d_pp, q.d_pq, q.lambda, q.mu)?)
    } else if let Some(c) = raw.model.channels {
        let channels: Vec<LindbladChannel> = c
            .channels
            .iter()
            .map(|ch| LindbladChannel {
                a: C64::new(ch.a[0], ch.a[1]),
                b: C64::new(ch.b[0], ch.b[1]),
            })
            .collect();
        let set = LindbladChannelSet::new(channels, c.mu)?;
        let epsilon = c.epsilon.unwrap_or(1.0);
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if let Some(eps) = &c.epsilons {
            if eps.is_empty() {
                return Err(Error::InvalidParameter("epsilons list must not be empty".to_string()));
            }
        }
        Model::Channels(ChannelsModel { set, epsilon, epsilons: c.epsilons })
    } else {
        let k = raw.model.kernel.expect("model count checked above");
        let kernel_blocks = k.gaussian.is_some() as usize + k.spectrum_file.is_some() as usize;
        if kernel_blocks != 1 {
            return Err(Error::InvalidParameter(
                "kernel block must contain exactly one of gaussian | spectrum_file".to_string(),
            ));
        }
        let (kernel, source) = if let Some(g) = k.gaussian {
            (
                CorrelationKernel::Gaussian(GaussianKernel::new(g.c0, g.sigma)?),
                KernelSource::Gaussian { c0: g.c0, sigma: g.sigma },
            )
        } else {
            let rel = k.spectrum_file.expect("kernel block checked above");
            let path = if rel.is_absolute() { rel.clone() } else { base_dir.join(&rel) };
            (CorrelationKernel::Tabulated(load_spectrum(&path)?), KernelSource::File(path))
        };
        if let Some(r_max) = k.r_max {
            if !(r_max > 0.0) {
                return Err(Error::InvalidParameter(format!("r_max must be > 0, got {r_max}")));
            }
        }
        let n_r = k.n_r.unwrap_or(129);
        if n_r < 2 {
            return Err(Error::InvalidParameter(format!("n_r must be at least 2, got {n_r}")));
        }
        Model::Kernel(KernelModel { kernel, source, r_max: k.r_max, n_r })
    };

    let state = match raw.state {
        Some(st) => Some(SqueezedCoherentParams::new(
            C64::new(st.alpha[0], st.alpha[1]),
            st.s,
            st.theta,
        )?),
        None => None,
    };

    let time = match raw.time {
        Some(t) => {
            if !(t.t_final >= 0.0) || !t.t_final.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "t_final must be >= 0, got {}",
                    t.t_final
                )));
            }
            if t.samples == 0 {
                return Err(Error::InvalidParameter("samples must be >= 1".to_string()));
            }
            if let Some(dt) = t.dt {
                if !(dt > 0.0) {
                    return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
                }
            }
            Some(TimeSpec { t_final: t.t_final, samples: t.samples, dt: t.dt })
        }
        None => None,
    };

    let defaults = SieveGrid::default();
    let sieve = match raw.sieve {
        Some(s) => SieveGrid::new(
            s.s_max.unwrap_or(defaults.s_max),
            s.n_s.unwrap_or(defaults.n_s),
            s.n_theta.unwrap_or(defaults.n_theta),
            s.refinement_tol.unwrap_or(defaults.refinement_tol),
            s.refinement_max_iter.unwrap_or(defaults.refinement_max_iter),
        )?,
        None => defaults,
    };

    let truncation = match raw.truncation {
        Some(t) => Some(match t.tail_tol {
            Some(tol) => FockTruncation::new(t.n, tol)?,
            None => FockTruncation::with_default_tol(t.n)?,
        }),
        None => None,
    };

    Ok(ResolvedConfig {
        osc,
        model,
        state,
        time,
        sieve,
        truncation,
        output: raw.output,
        config_sha256,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(text: &str) -> ResolvedConfig {
        parse(text, Path::new(".")).unwrap()
    }

    #[test]
    fn minimal_quadratic_config() {
        let cfg = parse_ok(
            r#"{
                "model": {"quadratic": {"d_qq": 0.02, "d_pp": 0.005, "d_pq": 0.0,
                                         "lambda": 0.0, "mu": 0.0}},
                "state": {"alpha": [0.0, 0.0], "s": 0.0, "theta": 0.0},
                "time": {"t_final": 1.0, "samples": 1}
            }"#,
        );
        assert_eq!(cfg.osc, OscillatorParams::natural());
        assert!(matches!(cfg.model, Model::Quadratic(_)));
        assert_eq!(cfg.time.unwrap().grid(), vec![1.0]);
        assert_eq!(cfg.config_sha256.len(), 64);
    }

    #[test]
    fn rejects_zero_or_two_model_blocks() {
        let none = r#"{"model": {}}"#;
        assert!(parse(none, Path::new(".")).is_err());
        let two = r#"{
            "model": {
                "quadratic": {"d_qq": 0.1, "d_pp": 0.1, "d_pq": 0.0, "lambda": 0.0, "mu": 0.0},
                "kernel": {"gaussian": {"c0": 1.0, "sigma": 1.0}}
            }
        }"#;
        assert!(parse(two, Path::new(".")).is_err());
    }

    #[test]
    fn rejects_invariant_violations_with_messages() {
        let bad_mass = r#"{
            "oscillator": {"m": -1.0},
            "model": {"quadratic": {"d_qq": 0.1, "d_pp": 0.1, "d_pq": 0.0, "lambda": 0.0, "mu": 0.0}}
        }"#;
        let err = parse(bad_mass, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("mass"));

        let bad_cs = r#"{
            "model": {"quadratic": {"d_qq": 0.1, "d_pp": 0.1, "d_pq": 0.5, "lambda": 0.0, "mu": 0.0}}
        }"#;
        let err = parse(bad_cs, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("Cauchy-Schwarz"));

        let unknown_field = r#"{
            "model": {"quadratic": {"d_qq": 0.1, "d_pp": 0.1, "d_pq": 0.0, "lambda": 0.0, "mu": 0.0}},
            "extra": 1
        }"#;
        assert!(parse(unknown_field, Path::new(".")).is_err());
    }

    #[test]
    fn quadratic_block_requires_all_coefficients() {
        let partial = r#"{
            "model": {"quadratic": {"d_qq": 0.1, "d_pp": 0.1}}
        }"#;
        assert!(parse(partial, Path::new(".")).is_err());
    }

    #[test]
    fn time_grid_shapes() {
        let t = TimeSpec { t_final: 2.0, samples: 4, dt: None };
        assert_eq!(t.grid(), vec![0.5, 1.0, 1.5, 2.0]);
        let zero = TimeSpec { t_final: 0.0, samples: 4, dt: None };
        assert_eq!(zero.grid(), vec![0.0]);
    }

    #[test]
    fn kernel_and_channels_blocks_resolve() {
        let cfg = parse_ok(
            r#"{
                "model": {"kernel": {"gaussian": {"c0": 1.0, "sigma": 2.0}}}
            }"#,
        );
        match cfg.model {
            Model::Kernel(k) => {
                assert_eq!(k.n_r, 129);
                assert!(matches!(k.kernel, CorrelationKernel::Gaussian(_)));
            }
            _ => panic!("expected kernel model"),
        }

        let cfg = parse_ok(
            r#"{
                "model": {"channels": {
                    "channels": [{"a": [1.0, 0.0], "b": [0.0, 0.5]}],
                    "mu": 0.1,
                    "epsilons": [0.02, 0.01]
                }}
            }"#,
        );
        match cfg.model {
            Model::Channels(c) => {
                assert_eq!(c.set.channels.len(), 1);
                assert_eq!(c.epsilon, 1.0);
                assert_eq!(c.epsilons.unwrap(), vec![0.02, 0.01]);
            }
            _ => panic!("expected channels model"),
        }
    }

    #[test]
    fn effective_json_carries_resolved_defaults() {
        let cfg = parse_ok(
            r#"{
                "model": {"quadratic": {"d_qq": 0.02, "d_pp": 0.005, "d_pq": 0.0,
                                         "lambda": 0.0, "mu": 0.0}},
                "time": {"t_final": 1.0, "samples": 1}
            }"#,
        );
        let eff = cfg.effective_json();
        assert_eq!(eff["oscillator"]["m"], 1.0);
        assert_eq!(eff["sieve"]["s_max"], 2.0);
        assert!(eff["time"]["dt"].as_f64().unwrap() > 0.0);
    }
}
