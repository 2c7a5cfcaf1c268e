#![allow(dead_code)]

use proptest::prelude::*;
use zeno_core::{ModelParams, NoiseCovariance, Variant};

pub fn reference_noise() -> NoiseCovariance {
    NoiseCovariance::new(0.05, 0.1, 1.0, 0.0, 0.0, 0.3)
}

pub fn reference(alpha: f64) -> ModelParams {
    ModelParams::new(1.0, alpha, reference_noise()).unwrap()
}

/// PSD noise with `γ12 = γ13 = 0`, entries up to `scale`.
pub fn exact_noise(scale: f64) -> impl Strategy<Value = NoiseCovariance> {
    (0.0..scale, 0.0..scale, 0.0..scale, -0.99..0.99f64)
        .prop_map(|(a, b, c, rho)| NoiseCovariance::new(a, b, c, 0.0, 0.0, rho * (b * c).sqrt()))
}

/// Parameters inside `variant`'s exactness regime.
pub fn exact_params(variant: Variant, alpha_max: f64) -> impl Strategy<Value = ModelParams> {
    (0.5..2.0f64, 0.0..alpha_max, exact_noise(0.5)).prop_map(move |(w, a, g)| {
        ModelParams::new(w, a * w, variant.project(&g.scaled(w))).unwrap()
    })
}

/// Values on `n` evenly spaced points of `[0, t_max]`.
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}
