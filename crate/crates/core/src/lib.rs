//! Quantum Zeno dynamics of a driven two-level system under continuous
//! partial measurement and Gaussian white noise in its Hamiltonian.
//!
//! * [`model`] – parameters, noise covariance and Bloch states.
//! * [`liouvillian`] – the averaged Bloch generator and its propagators.
//! * [`survival`] – closed-form survival probabilities and short-time series.
//! * [`spectral`] – eigenvalues, exceptional points, decay rates and the
//!   noise-enhancement window.
//! * [`trajectory`] – the stochastic trajectory engine.
//! * [`sweep`] – parameter sweeps and brute-force region scans.

pub mod error;
pub mod liouvillian;
pub mod model;
mod reduced;
pub mod spectral;
pub mod survival;
pub mod sweep;
pub mod trajectory;

pub use error::{Result, ZenoError};
pub use liouvillian::{
    build_liouvillian, default_ode_step, expm_series, propagate_bloch, propagate_bloch_ode,
    Liouvillian, Propagator,
};
pub use model::{
    survival_probability, validate_noise_covariance, BlochState, ModelParams, NoiseCovariance,
    Variant,
};
pub use num_complex::Complex64;
pub use reduced::EXCEPTIONAL_TOLERANCE;
pub use spectral::{
    classify_regime, decay_rate, eigenvalues_closed_form, eigenvalues_numeric,
    enhancement_interval, exceptional_point, offdiag_perturbation_error, RegimeReport,
    SpectralDecomposition,
};
pub use survival::{
    short_time_expansion, survival_closed_form, survival_strong_measurement_limit,
    ShortTimeExpansion,
};
pub use trajectory::{run_ensemble, run_trajectory, EnsembleResult, TrajectoryConfig};
