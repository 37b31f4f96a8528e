//! Numerical laboratory for entropy production of harmonic-oscillator states
//! coupled to Markovian environments.
//!
//! The crate computes first-order linear-entropy production for two
//! environment families — Lindblad channels linear in position and momentum,
//! and plane-wave channels generated by a spatially correlated noise kernel —
//! locates the minimum-entropy-production ("maximal") squeezed coherent
//! states with a predictability-sieve search, and validates every closed form
//! against brute-force evolution on a truncated Fock space.

pub mod channels;
pub mod commands;
pub mod config;
pub mod correlated;
pub mod error;
pub mod master;
pub mod oscillator;
pub mod quadrature;
pub mod report;
pub mod sieve;

pub use channels::{
    channels_to_diffusion, entropy_production_closed, entropy_production_quadrature,
    f_coefficients, DiffusionCoefficients, FCoefficients, LindbladChannel, LindbladChannelSet,
};
pub use correlated::{
    char_function, char_function_fock, decoherence_g, entropy_production_correlated,
    entropy_production_correlated_fock, kernel_to_spectrum, long_correlation_map,
    short_correlation_limit, width_condition, CorrelationKernel, GaussianKernel,
    TabulatedSpectrum,
};
pub use error::{Error, Result};
pub use master::{evolve, lindblad_rhs, perturbation_residual, EntropyTrajectory, EvolutionSpec};
pub use oscillator::{
    build_ladder, build_xp, displacement_matrix, gaussian_moments, linear_entropy, make_state,
    moments_of_state, squeeze_matrix, FockTruncation, GaussianMoments, OscillatorParams,
    SqueezedCoherentParams, TruncatedDensity, TruncatedState,
};
pub use sieve::{
    long_time_squeeze_decay, sieve_correlated, sieve_quadratic, squeeze_direction_check,
    SieveGrid, SieveResult,
};
